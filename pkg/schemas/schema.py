import math
from fractions import Fraction
from typing import Any, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


def alpha_label(alpha: float) -> str:
    """Render a power index as a short fraction: -1.25 -> "-5/4", 2.0 -> "2"."""
    frac = Fraction(alpha).limit_denominator(64)
    if float(frac) != alpha:
        return repr(alpha)
    return str(frac)


class _Frozen(BaseModel):
    model_config = ConfigDict(frozen=True)


# ---------------- Transforms ----------------
class Transform(_Frozen):
    kind: Literal["identity", "log", "power"]
    base: Optional[float] = None
    alpha: Optional[float] = None

    @model_validator(mode="after")
    def _check_parameters(self):
        if self.kind == "log":
            if self.base is None or not math.isfinite(self.base) or self.base <= 0 or self.base == 1:
                raise ValueError(f"log base must be positive and != 1, got {self.base!r}")
            if self.alpha is not None:
                raise ValueError("log transform takes no alpha")
        elif self.kind == "power":
            if self.alpha is None or not math.isfinite(self.alpha) or self.alpha == 0:
                raise ValueError(f"power index must be a nonzero real, got {self.alpha!r}")
            if self.base is not None:
                raise ValueError("power transform takes no base")
        elif self.base is not None or self.alpha is not None:
            raise ValueError("identity transform takes no parameters")
        return self

    @classmethod
    def identity(cls) -> "Transform":
        return cls(kind="identity")

    @classmethod
    def log(cls, base: float = math.e) -> "Transform":
        return cls(kind="log", base=base)

    @classmethod
    def power(cls, alpha: float) -> "Transform":
        return cls(kind="power", alpha=alpha)

    @property
    def label(self) -> str:
        if self.kind == "log":
            return "ln" if self.base == math.e else f"log_{self.base:g}"
        if self.kind == "power":
            return f"x^{alpha_label(self.alpha)}"
        return "x"


class FnlseObjectiveInput(_Frozen):
    observed: tuple[float, ...]
    fitted: tuple[float, ...]
    transform: Transform

    @model_validator(mode="after")
    def _check_sequences(self):
        if not self.observed:
            raise ValueError("observed must be non-empty")
        if len(self.observed) != len(self.fitted):
            raise ValueError(
                f"observed and fitted differ in length ({len(self.observed)} != {len(self.fitted)})"
            )
        for name, values in (("observed", self.observed), ("fitted", self.fitted)):
            if any(not (v > 0 and math.isfinite(v)) for v in values):
                raise ValueError(f"every {name} value must be finite and strictly positive")
        return self


# ---------------- Jelinski-Moranda ----------------
class JmParams(_Frozen):
    N: float = Field(gt=0, description="total fault count, continuous")
    phi: float = Field(gt=0, description="per-fault hazard coefficient, 1/time")

    @field_validator("N", "phi")
    @classmethod
    def _finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("parameters must be finite")
        return value


class FailureDataset(_Frozen):
    name: str
    unit: str = "unspecified"
    times: tuple[float, ...]

    @field_validator("times")
    @classmethod
    def _positive_times(cls, times: tuple[float, ...]) -> tuple[float, ...]:
        if not times:
            raise ValueError("a dataset needs at least one failure time")
        for k, value in enumerate(times, start=1):
            if not (value > 0 and math.isfinite(value)):
                raise ValueError(f"failure time {value!r} at entry {k} is not a positive real")
        return times

    @property
    def n(self) -> int:
        return len(self.times)

    def array(self) -> np.ndarray:
        return np.asarray(self.times, dtype=float)

    def prefix(self, length: int) -> "FailureDataset":
        return FailureDataset(name=self.name, unit=self.unit, times=self.times[:length])


# ---------------- Estimation ----------------
class EstimatorKind(_Frozen):
    method: Literal["mle", "lse", "loglse", "powlse"]
    alpha: Optional[float] = None

    @model_validator(mode="after")
    def _check_alpha(self):
        if self.method == "powlse":
            if self.alpha is None or not math.isfinite(self.alpha) or self.alpha == 0:
                raise ValueError(f"powLSE needs a nonzero power index, got {self.alpha!r}")
        elif self.alpha is not None:
            raise ValueError(f"{self.method} takes no power index")
        return self

    @classmethod
    def mle(cls) -> "EstimatorKind":
        return cls(method="mle")

    @classmethod
    def lse(cls) -> "EstimatorKind":
        return cls(method="lse")

    @classmethod
    def loglse(cls) -> "EstimatorKind":
        return cls(method="loglse")

    @classmethod
    def powlse(cls, alpha: float) -> "EstimatorKind":
        return cls(method="powlse", alpha=alpha)

    @property
    def label(self) -> str:
        if self.method == "powlse":
            return f"powLSE(α={alpha_label(self.alpha)})"
        return {"mle": "MLE", "lse": "LSE", "loglse": "LogLSE"}[self.method]


class SolverConfig(_Frozen):
    root_tol: float = Field(default=1e-10, gt=0)
    max_iter: int = Field(default=200, gt=0)
    n_lower_offset: float = Field(default=1e-6, gt=0)
    n_upper: float = Field(default=1e7, gt=0)
    fallback: bool = True


class RootResult(_Frozen):
    root: float
    iterations: int = Field(ge=0)
    residual: float = Field(ge=0)
    converged: bool
    method: Literal["newton", "newton+bisection"] = "newton"


class EstimationResult(_Frozen):
    params: JmParams
    kind: EstimatorKind
    n: int = Field(ge=1)
    iterations: int = Field(ge=0)
    residual: float = Field(ge=0)
    converged: bool
    objective: float = Field(
        description=(
            "Criterion minimised at the solution. For the least-squares estimators it is the "
            "sum of squares and never negative; for MLE it is the negative log-likelihood, "
            "which is below zero whenever the likelihood exceeds 1."
        )
    )
    brackets: int = Field(default=0, ge=0)
    message: Optional[str] = None

    @model_validator(mode="after")
    def _valid_for_segment(self):
        if not self.params.N > self.n - 1:
            raise ValueError(f"N={self.params.N} is not above n - 1 = {self.n - 1}")
        if self.kind.method != "mle" and self.objective < 0:
            raise ValueError(f"{self.kind.label} objective is a sum of squares, got {self.objective}")
        return self


# ---------------- Criteria ----------------
FallbackReason = Literal["estimator-limit"]


class StepRecord(_Frozen):
    step_index: int = Field(ge=4)
    segment_params: JmParams
    predicted_mtbf: float = Field(gt=0)
    observed: float = Field(gt=0)
    fitted_mtbf: tuple[float, ...]
    te: float = Field(ge=0)
    re: float = Field(ge=0)
    tbs: float = Field(ge=0)
    rbs: float = Field(ge=0)
    converged: bool
    fallback_used: bool = False
    fallback_reason: Optional[FallbackReason] = None

    @model_validator(mode="after")
    def _consistent_fallback(self):
        if self.fallback_used != (self.fallback_reason is not None):
            raise ValueError("fallback_used and fallback_reason disagree")
        if len(self.fitted_mtbf) != self.step_index - 1:
            raise ValueError("fitted_mtbf must cover the whole training segment")
        return self


class CriterionSummary(_Frozen):
    te_total: float
    re_total: float
    tbs_total: float
    rbs_total: float
    n: int = Field(ge=4)


class VarianceProfile(_Frozen):
    segment_length: int = Field(ge=1)
    sample_variance: float = Field(ge=0)
    residual_variance_by_estimator: dict[str, float]


# ---------------- Sweep ----------------
DEFAULT_ALPHAS: tuple[float, ...] = tuple(k / 4 for k in range(-8, 9) if k != 0)


class AlphaGrid(_Frozen):
    values: tuple[float, ...] = DEFAULT_ALPHAS

    @field_validator("values")
    @classmethod
    def _check_values(cls, values: tuple[float, ...]) -> tuple[float, ...]:
        if not values:
            raise ValueError("alpha grid must not be empty")
        if any(v == 0 or not math.isfinite(v) for v in values):
            raise ValueError("alpha grid entries must be finite and nonzero")
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ValueError("alpha grid must be strictly increasing")
        return values


class PredictionRun(_Frozen):
    dataset: FailureDataset
    estimator: EstimatorKind
    records: tuple[StepRecord, ...]
    summary: CriterionSummary

    @model_validator(mode="after")
    def _covers_all_steps(self):
        if len(self.records) != self.dataset.n - 3:
            raise ValueError(f"expected {self.dataset.n - 3} step records, got {len(self.records)}")
        return self


class SweepResult(_Frozen):
    runs: dict[float, PredictionRun]
    alpha_opt_te: float
    alpha_opt_tbs: float
    run_opt_te: PredictionRun
    run_opt_tbs: PredictionRun

    @model_validator(mode="after")
    def _optima_on_grid(self):
        for alpha in (self.alpha_opt_te, self.alpha_opt_tbs):
            if alpha not in self.runs:
                raise ValueError(f"optimal alpha {alpha} is not a grid member")
        return self


# ---------------- Output ----------------
class OutputTable(BaseModel):
    title: str = ""
    columns: list[str]
    rows: list[dict[str, Any]] = Field(default_factory=list)

    def add(self, **row: Any) -> None:
        unknown = set(row) - set(self.columns)
        if unknown:
            raise KeyError(f"unknown columns {sorted(unknown)}")
        self.rows.append({c: row.get(c) for c in self.columns})


class DatasetExperiment(_Frozen):
    """Every recursive run the reproduction tables need for one dataset."""

    key: str
    mle: PredictionRun
    lse: PredictionRun
    loglse: PredictionRun
    sweep: SweepResult
