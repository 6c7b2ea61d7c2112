"""Recursive one-step-ahead prediction and the powLSE power-index sweep.

For i = 4..n the estimator is fitted on x_1..x_{i-1}, MTBF_i is predicted and
the TE/RE/TBS/RBS criteria are recorded. A step whose fit has no root
beyond i - 1 predicts with the estimator's large-N limit instead.
``sweep_alpha`` repeats the run for every power index of a grid and picks
the index with the smallest training criterion (TE, or TBS for the Braun
variant).
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from itertools import repeat
from typing import Callable, Optional, Sequence, Union

import numpy as np

from criteria import braun_or_limit, re_step, summarize, te_segment
from estimators import estimate, estimate_limit
from jm import mtbf, mtbf_series
from schemas.errors import DatasetTooShortError
from schemas.schema import (
    AlphaGrid,
    EstimatorKind,
    FailureDataset,
    PredictionRun,
    SolverConfig,
    StepRecord,
    SweepResult,
)

logger = logging.getLogger(__name__)

FIRST_STEP = 4


def _as_dataset(data: Union[FailureDataset, Sequence[float]]) -> FailureDataset:
    if isinstance(data, FailureDataset):
        return data
    return FailureDataset(name="unnamed", times=tuple(float(v) for v in data))


def _step(x: np.ndarray, i: int, estimator: EstimatorKind, cfg: SolverConfig) -> StepRecord:
    prefix = x[: i - 1]
    fit = estimate(prefix, estimator, cfg)
    params = fit.params
    reason = None
    if not (fit.converged and fit.params.N - i + 1 > 0):
        # no usable root: predict with the estimator's own large-N limit
        params = estimate_limit(prefix, estimator, cfg).params
        reason = "estimator-limit"
        logger.warning(
            "%s step %d: %s (N=%.6g, converged=%s); using the fit capped at N=%g",
            estimator.label,
            i,
            fit.message or "fit cannot predict the next interval",
            fit.params.N,
            fit.converged,
            params.N,
        )

    fitted = mtbf_series(params, prefix.size)
    predicted = mtbf(params, i)
    observed = float(x[i - 1])
    return StepRecord(
        step_index=i,
        segment_params=params,
        predicted_mtbf=predicted,
        observed=observed,
        fitted_mtbf=tuple(float(v) for v in fitted),
        te=te_segment(prefix, i, fitted),
        re=re_step(observed, predicted),
        tbs=braun_or_limit(prefix, fitted),
        rbs=braun_or_limit(x[:i], np.append(fitted, predicted)),
        converged=fit.converged,
        fallback_used=reason is not None,
        fallback_reason=reason,
    )


def run_recursive(
    data: Union[FailureDataset, Sequence[float]],
    estimator: EstimatorKind,
    cfg: Optional[SolverConfig] = None,
) -> PredictionRun:
    dataset = _as_dataset(data)
    if dataset.n < FIRST_STEP:
        raise DatasetTooShortError(f"recursive prediction needs n >= {FIRST_STEP}, got {dataset.n}")
    cfg = cfg or SolverConfig()
    x = dataset.array()
    records = tuple(_step(x, i, estimator, cfg) for i in range(FIRST_STEP, dataset.n + 1))
    run = PredictionRun(dataset=dataset, estimator=estimator, records=records, summary=summarize(records, dataset.n))
    logger.info(
        "%s on %s: TE=%.3f RE=%.3f TBS=%.3f RBS=%.3f",
        estimator.label,
        dataset.name,
        run.summary.te_total,
        run.summary.re_total,
        run.summary.tbs_total,
        run.summary.rbs_total,
    )
    return run


def _power_run(data: FailureDataset, alpha: float, cfg: SolverConfig) -> PredictionRun:
    return run_recursive(data, EstimatorKind.powlse(alpha), cfg)


def _argmin(runs: dict[float, PredictionRun], score: Callable[[PredictionRun], float]) -> float:
    # ties go to the alpha closest to 1, then the smaller |alpha|
    return min(runs, key=lambda a: (score(runs[a]), abs(a - 1.0), abs(a)))


def sweep_alpha(
    data: Union[FailureDataset, Sequence[float]],
    grid: Optional[AlphaGrid] = None,
    cfg: Optional[SolverConfig] = None,
    workers: int = 1,
) -> SweepResult:
    """Run powLSE for every grid index; optimal indices minimise TE and TBS.

    With ``workers > 1`` the indices are spread over a process pool; results
    are merged in grid order and equal the sequential ones.
    """
    dataset = _as_dataset(data)
    if dataset.n < FIRST_STEP:
        raise DatasetTooShortError(f"recursive prediction needs n >= {FIRST_STEP}, got {dataset.n}")
    grid = grid or AlphaGrid()
    cfg = cfg or SolverConfig()
    alphas = grid.values

    if workers > 1 and len(alphas) > 1:
        logger.info("sweeping %d power indices on %s with %d workers", len(alphas), dataset.name, workers)
        with ProcessPoolExecutor(max_workers=min(workers, len(alphas))) as pool:
            results = list(pool.map(_power_run, repeat(dataset), alphas, repeat(cfg)))
    else:
        results = [_power_run(dataset, alpha, cfg) for alpha in alphas]

    runs = dict(zip(alphas, results))
    alpha_te = _argmin(runs, lambda r: r.summary.te_total)
    alpha_tbs = _argmin(runs, lambda r: r.summary.tbs_total)
    return SweepResult(
        runs=runs,
        alpha_opt_te=alpha_te,
        alpha_opt_tbs=alpha_tbs,
        run_opt_te=runs[alpha_te],
        run_opt_tbs=runs[alpha_tbs],
    )


def best_alpha_by_re(sweep: SweepResult) -> tuple[float, float]:
    """Grid index with the smallest predictive RE, and that RE."""
    alpha = _argmin(sweep.runs, lambda r: r.summary.re_total)
    return alpha, sweep.runs[alpha].summary.re_total


def best_alpha_by_rbs(sweep: SweepResult) -> tuple[float, float]:
    alpha = _argmin(sweep.runs, lambda r: r.summary.rbs_total)
    return alpha, sweep.runs[alpha].summary.rbs_total


def parse_grid(text: str) -> AlphaGrid:
    """Parse "-2,-7/4,0.5" into a sorted AlphaGrid; integers, decimals and fractions are accepted."""
    tokens = [t.strip() for t in text.split(",") if t.strip()]
    try:
        values = sorted(float(Fraction(t)) for t in tokens)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"invalid power-index grid {text!r}: {exc}") from exc
    return AlphaGrid(values=tuple(values))
