"""Prediction-quality criteria for recursive one-step-ahead fits.

TE/RE are relative errors in percent (training segment / next point); TBS/RBS
are Braun statistics, raw ratios of squared prediction error to the sample
variance with a small-sample correction.
"""

import math
from typing import Mapping, Sequence, Union

import numpy as np

from schemas.errors import CriteriaInputError, DegenerateVarianceError
from schemas.schema import CriterionSummary, EstimatorKind, FailureDataset, StepRecord, VarianceProfile

Series = Union[FailureDataset, Sequence[float], np.ndarray]


def _values(data: Series) -> np.ndarray:
    if isinstance(data, FailureDataset):
        return data.array()
    return np.asarray(data, dtype=float)


def _positive(x: np.ndarray) -> None:
    if not np.all(x > 0):
        raise CriteriaInputError("relative errors need strictly positive observations")


def te_segment(data: Series, upto: int, fitted_mtbf: Sequence[float]) -> float:
    """sum_{j < upto} |x_j - MTBF_j| / x_j * 100 for the fit made on x_1..x_{upto-1}."""
    x = _values(data)
    fitted = np.asarray(fitted_mtbf, dtype=float)
    if upto < 4:
        raise CriteriaInputError(f"training segments end at index >= 3, got upto={upto}")
    if x.size < upto - 1 or fitted.size < upto - 1:
        raise CriteriaInputError(
            f"need {upto - 1} observations and fitted values, got {x.size} and {fitted.size}"
        )
    x, fitted = x[: upto - 1], fitted[: upto - 1]
    _positive(x)
    return math.fsum(np.abs(x - fitted) / x) * 100.0


def re_step(x_i: float, predicted: float) -> float:
    if not x_i > 0:
        raise CriteriaInputError(f"observation must be positive, got {x_i!r}")
    return abs(x_i - predicted) / x_i * 100.0


def _braun_parts(observed: Series, predicted: Series, s: int) -> tuple[float, float, float]:
    x = _values(observed)
    f = _values(predicted)
    n = x.size
    if f.size != n:
        raise CriteriaInputError(f"observed and predicted differ in length ({n} != {f.size})")
    if not 1 <= s <= n - 2:
        raise CriteriaInputError(f"start index s must lie in [1, {n - 2}], got {s}")
    mean = math.fsum(x) / n
    tail = slice(s - 1, None)
    numerator = math.fsum((x[tail] - f[tail]) ** 2)
    denominator = math.fsum((x[tail] - mean) ** 2)
    return numerator, denominator, (n - s) / (n - s - 1)


def braun(observed: Series, predicted: Series, s: int = 1) -> float:
    """Braun statistic over indices s..n; the mean is taken over the whole sequence.

    Raises
    ------
    DegenerateVarianceError
        The observations s..n do not vary around the mean.
    """
    numerator, denominator, correction = _braun_parts(observed, predicted, s)
    if denominator == 0.0:
        raise DegenerateVarianceError("Braun statistic undefined: observations have zero variance")
    return numerator / denominator * correction


def braun_or_limit(observed: Series, predicted: Series, s: int = 1) -> float:
    """As ``braun`` but a zero-variance segment gives 0 for a perfect fit and +inf otherwise."""
    numerator, denominator, correction = _braun_parts(observed, predicted, s)
    if denominator == 0.0:
        return 0.0 if numerator == 0.0 else math.inf
    return numerator / denominator * correction


def tbs_segment(data_prefix: Series, fitted_mtbf: Series) -> float:
    return braun(data_prefix, fitted_mtbf, 1)


def rbs_step(data_prefix_incl: Series, fitted_mtbf: Series) -> float:
    return braun(data_prefix_incl, fitted_mtbf, 1)


def summarize(records: Sequence[StepRecord], n: int) -> CriterionSummary:
    """Average each per-step criterion over the n - 3 recursive steps."""
    if n < 4:
        raise CriteriaInputError(f"a recursive prediction run needs n >= 4, got {n}")
    steps = n - 3
    return CriterionSummary(
        te_total=math.fsum(r.te for r in records) / steps,
        re_total=math.fsum(r.re for r in records) / steps,
        tbs_total=math.fsum(r.tbs for r in records) / steps,
        rbs_total=math.fsum(r.rbs for r in records) / steps,
        n=n,
    )


def variance_profile(
    data: Series, m: int, fits: Mapping[Union[str, EstimatorKind], Sequence[float]]
) -> VarianceProfile:
    """Sample variance of x_1..x_m and the mean squared residual of each fitted series."""
    x = _values(data)
    if not 1 <= m <= x.size:
        raise CriteriaInputError(f"segment length must lie in [1, {x.size}], got {m}")
    x = x[:m]
    mean = math.fsum(x) / m
    residuals: dict[str, float] = {}
    for key, fitted in fits.items():
        label = key.label if isinstance(key, EstimatorKind) else str(key)
        f = np.asarray(fitted, dtype=float)
        if f.size != m:
            raise CriteriaInputError(f"{label}: expected {m} fitted values, got {f.size}")
        residuals[label] = math.fsum((x - f) ** 2) / m
    return VarianceProfile(
        segment_length=m,
        sample_variance=math.fsum((x - mean) ** 2) / m,
        residual_variance_by_estimator=residuals,
    )
