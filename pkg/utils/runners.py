import json
import logging
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Optional

from config.config import REFERENCE_PATH
from criteria import variance_profile
from datasets import DatasetId, builtin
from estimators import estimate
from jm import remaining_faults
from schemas.schema import (
    AlphaGrid,
    DatasetExperiment,
    EstimationResult,
    EstimatorKind,
    FailureDataset,
    OutputTable,
    PredictionRun,
    SolverConfig,
    SweepResult,
)
from sweep import best_alpha_by_rbs, best_alpha_by_re, run_recursive, sweep_alpha
from utils.reporting import write_csv

logger = logging.getLogger(__name__)

TABLE_CRITERIA = {7: "re", 8: "rbs"}


@lru_cache(maxsize=1)
def published_values() -> dict:
    with open(REFERENCE_PATH, "r", encoding="utf-8") as f:
        return json.load(f)


def _total(run: PredictionRun, criterion: str) -> float:
    return getattr(run.summary, f"{criterion}_total")


class ExperimentRunners:
    """Builds the result tables behind every CLI command."""

    @staticmethod
    def estimate(dataset: FailureDataset, kind: EstimatorKind, cfg: SolverConfig) -> tuple[EstimationResult, OutputTable]:
        result = estimate(dataset, kind, cfg)
        table = OutputTable(
            title=f"{kind.label} estimate on {dataset.name} (n={dataset.n})",
            columns=[
                "dataset", "estimator", "alpha", "N_hat", "phi_hat", "remaining_faults",
                "objective", "iterations", "residual", "converged", "message",
            ],
        )
        table.add(
            dataset=dataset.name,
            estimator=kind.method,
            alpha=kind.alpha,
            N_hat=result.params.N,
            phi_hat=result.params.phi,
            remaining_faults=remaining_faults(result.params, dataset.n),
            objective=result.objective,
            iterations=result.iterations,
            residual=result.residual,
            converged=result.converged,
            message=result.message,
        )
        return result, table

    @staticmethod
    def summary_table(runs: list[PredictionRun], title: str = "") -> OutputTable:
        table = OutputTable(title=title, columns=["dataset", "estimator", "alpha", "TE", "RE", "TBS", "RBS", "fallbacks"])
        for run in runs:
            table.add(
                dataset=run.dataset.name,
                estimator=run.estimator.method,
                alpha=run.estimator.alpha,
                TE=run.summary.te_total,
                RE=run.summary.re_total,
                TBS=run.summary.tbs_total,
                RBS=run.summary.rbs_total,
                fallbacks=sum(r.fallback_used for r in run.records),
            )
        return table

    @staticmethod
    def steps_table(run: PredictionRun) -> OutputTable:
        """Per-step series of a recursive prediction run."""
        table = OutputTable(
            title=f"{run.estimator.label} one-step-ahead prediction on {run.dataset.name}",
            columns=["i", "N_hat", "phi_hat", "mtbf_hat", "x_i", "TE_i", "RE_i", "TBS_i", "RBS_i", "fallback_used"],
        )
        for r in run.records:
            table.add(
                i=r.step_index,
                N_hat=r.segment_params.N,
                phi_hat=r.segment_params.phi,
                mtbf_hat=r.predicted_mtbf,
                x_i=r.observed,
                TE_i=r.te,
                RE_i=r.re,
                TBS_i=r.tbs,
                RBS_i=r.rbs,
                fallback_used=r.fallback_used,
            )
        return table

    @staticmethod
    def predict(dataset: FailureDataset, kind: EstimatorKind, cfg: SolverConfig) -> tuple[PredictionRun, OutputTable]:
        run = run_recursive(dataset, kind, cfg)
        return run, ExperimentRunners.summary_table([run], title=f"{kind.label} on {dataset.name}")

    @staticmethod
    def sweep_table(sweep: SweepResult) -> OutputTable:
        table = OutputTable(columns=["alpha", "TE", "RE", "TBS", "RBS", "fallbacks"])
        for alpha, run in sweep.runs.items():
            table.add(
                alpha=alpha,
                TE=run.summary.te_total,
                RE=run.summary.re_total,
                TBS=run.summary.tbs_total,
                RBS=run.summary.rbs_total,
                fallbacks=sum(r.fallback_used for r in run.records),
            )
        return table

    @staticmethod
    def optimum_table(sweep: SweepResult) -> OutputTable:
        table = OutputTable(title="selected power indices", columns=["selection", "alpha", "criterion", "value"])
        table.add(selection="opt by TE", alpha=sweep.alpha_opt_te, criterion="RE", value=sweep.run_opt_te.summary.re_total)
        table.add(selection="opt by TBS", alpha=sweep.alpha_opt_tbs, criterion="RBS", value=sweep.run_opt_tbs.summary.rbs_total)
        alpha, re = best_alpha_by_re(sweep)
        table.add(selection="best by RE", alpha=alpha, criterion="RE", value=re)
        alpha, rbs = best_alpha_by_rbs(sweep)
        table.add(selection="best by RBS", alpha=alpha, criterion="RBS", value=rbs)
        return table

    @staticmethod
    def sweep(
        dataset: FailureDataset, grid: AlphaGrid, cfg: SolverConfig, workers: int = 1
    ) -> tuple[SweepResult, OutputTable, OutputTable]:
        result = sweep_alpha(dataset, grid, cfg, workers=workers)
        table = ExperimentRunners.sweep_table(result)
        table.title = f"powLSE sweep on {dataset.name}"
        return result, table, ExperimentRunners.optimum_table(result)

    @staticmethod
    def variance_table(mle: PredictionRun, loglse: PredictionRun, sweep: SweepResult) -> OutputTable:
        """Sample variance and residual variances for segment lengths 3..n-1.

        Each residual series uses the in-segment fit that the recursive run
        made on x_1..x_m.
        """
        dataset = mle.dataset
        series = {
            "var_mle": mle,
            "var_loglse": loglse,
            "var_powlse_re": sweep.run_opt_te,
            "var_powlse_bs": sweep.run_opt_tbs,
        }
        table = OutputTable(
            title=f"variance profile of {dataset.name}",
            columns=["m", "variance", *series],
        )
        for k in range(len(mle.records)):
            m = mle.records[k].step_index - 1
            profile = variance_profile(dataset, m, {name: run.records[k].fitted_mtbf for name, run in series.items()})
            table.add(m=m, variance=profile.sample_variance, **profile.residual_variance_by_estimator)
        return table

    @staticmethod
    def variance(
        dataset: FailureDataset, cfg: SolverConfig, grid: Optional[AlphaGrid] = None, workers: int = 1
    ) -> OutputTable:
        """Variance table built from the MLE run, the LogLSE run and the powLSE sweep."""
        mle = run_recursive(dataset, EstimatorKind.mle(), cfg)
        loglse = run_recursive(dataset, EstimatorKind.loglse(), cfg)
        sweep = sweep_alpha(dataset, grid, cfg, workers=workers)
        return ExperimentRunners.variance_table(mle, loglse, sweep)

    @staticmethod
    def run_experiment(
        key: str, dataset: FailureDataset, cfg: SolverConfig, grid: Optional[AlphaGrid] = None, workers: int = 1
    ) -> DatasetExperiment:
        logger.info("running MLE, LSE, LogLSE and the powLSE sweep on %s", dataset.name)
        return DatasetExperiment(
            key=key,
            mle=run_recursive(dataset, EstimatorKind.mle(), cfg),
            lse=run_recursive(dataset, EstimatorKind.lse(), cfg),
            loglse=run_recursive(dataset, EstimatorKind.loglse(), cfg),
            sweep=sweep_alpha(dataset, grid, cfg, workers=workers),
        )

    @staticmethod
    def reproduction_rows(exp: DatasetExperiment, table: int) -> dict[str, tuple[float, Optional[float]]]:
        """Row label -> (value, alpha) for one dataset column of a published table."""
        criterion = TABLE_CRITERIA[table]
        sweep = exp.sweep
        if table == 7:
            opt = (sweep.run_opt_te.summary.re_total, sweep.alpha_opt_te)
            alpha, best = best_alpha_by_re(sweep)
        else:
            opt = (sweep.run_opt_tbs.summary.rbs_total, sweep.alpha_opt_tbs)
            alpha, best = best_alpha_by_rbs(sweep)
        return {
            "MLE": (_total(exp.mle, criterion), None),
            "LSE": (_total(exp.lse, criterion), None),
            "LogLSE": (_total(exp.loglse, criterion), None),
            "powLSE opt": opt,
            "powLSE best": (best, alpha),
        }

    @staticmethod
    def reproduction_table(experiments: list[DatasetExperiment], table: int) -> OutputTable:
        reference = published_values()
        published = reference[f"table{table}"]
        out = OutputTable(
            title=f"Table {table}: {published['title']}",
            columns=["dataset", "estimator", "alpha", "value", "published", "published_alpha", "deviation"],
        )
        for exp in experiments:
            column = reference["datasets"].index(exp.key) if exp.key in reference["datasets"] else None
            for label, (value, alpha) in ExperimentRunners.reproduction_rows(exp, table).items():
                ref = ref_alpha = deviation = None
                if column is not None:
                    ref = published["values"][label][column]
                    deviation = (value - ref) / ref
                    if label in published["alphas"]:
                        ref_alpha = float(Fraction(published["alphas"][label][column]))
                out.add(
                    dataset=exp.mle.dataset.name,
                    estimator=label,
                    alpha=alpha,
                    value=value,
                    published=ref,
                    published_alpha=ref_alpha,
                    deviation=deviation,
                )
        return out

    @staticmethod
    def reproduce(
        cfg: SolverConfig,
        tables: tuple[int, ...] = (7, 8),
        datasets: tuple[DatasetId, ...] = tuple(DatasetId),
        grid: Optional[AlphaGrid] = None,
        workers: int = 1,
        emit: Optional[Path] = None,
    ) -> list[OutputTable]:
        experiments = [
            ExperimentRunners.run_experiment(d.value, builtin(d), cfg, grid, workers) for d in datasets
        ]
        results = [ExperimentRunners.reproduction_table(experiments, t) for t in tables]
        if emit is not None:
            ExperimentRunners.emit_reproduction(experiments, results, tables, Path(emit))
        return results

    @staticmethod
    def emit_reproduction(
        experiments: list[DatasetExperiment], results: list[OutputTable], tables: tuple[int, ...], directory: Path
    ) -> None:
        for table, result in zip(tables, results):
            write_csv(result, directory / f"table{table}.csv")
        for exp in experiments:
            for name in ("mle", "lse", "loglse"):
                write_csv(ExperimentRunners.steps_table(getattr(exp, name)), directory / f"{exp.key}_predict_{name}.csv")
            write_csv(ExperimentRunners.sweep_table(exp.sweep), directory / f"{exp.key}_sweep.csv")
            write_csv(
                ExperimentRunners.variance_table(exp.mle, exp.loglse, exp.sweep),
                directory / f"{exp.key}_variance.csv",
            )
        logger.info("wrote reproduction CSVs to %s", directory)
