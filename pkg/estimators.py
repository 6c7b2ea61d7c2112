"""Jelinski-Moranda parameter estimation: MLE, LSE, LogLSE and powLSE.

Every estimator reduces to a one-dimensional estimating equation in N. Its
roots are bracketed by a log-spaced scan above n - 1, refined by Newton-Raphson
(bisection fallback) and phi follows in closed form. When several roots exist
the one with the smallest objective wins (for MLE: the largest likelihood).
Without a root the result is the non-converged fit capped at N = n_upper.

The equations are evaluated in a scale-free form with the same roots and
signs as the textbook ones:

* MLE, LSE, powLSE: f = P - Q with P, Q > 0; we solve u = ln P - ln Q with the
  sums formed by log-sum-exp, and report |P - Q| / (P + Q) = |tanh(u/2)|.
* LogLSE: f = P - Q with P = mean(z) * sum(1/d), Q = sum(z/d); we solve
  r = f / sum(1/d), the gap between the plain and 1/d-weighted means of z.
"""

import logging
import math
from typing import Sequence, Union

import numpy as np

from jm import log_likelihood, mtbf_series
from schemas.errors import DatasetTooShortError, DomainError, NoSignChangeError
from schemas.schema import (
    EstimationResult,
    EstimatorKind,
    FailureDataset,
    FnlseObjectiveInput,
    JmParams,
    RootResult,
    SolverConfig,
    Transform,
)
from tools.solver import SCAN_POINTS, brackets_from_grid, newton_solve, scan_points
from transforms import fnlse_objective

logger = logging.getLogger(__name__)

MIN_POINTS = 3

Data = Union[FailureDataset, Sequence[float], np.ndarray]


def _log_sum_exp(terms: np.ndarray) -> np.ndarray:
    top = np.max(terms, axis=-1, keepdims=True)
    return top[..., 0] + np.log(np.sum(np.exp(terms - top), axis=-1))


def _out(values: np.ndarray, N):
    return float(values) if np.ndim(N) == 0 else values


def _times(data: Data, minimum: int = MIN_POINTS) -> np.ndarray:
    times = data.array() if isinstance(data, FailureDataset) else np.asarray(data, dtype=float)
    if times.ndim != 1 or times.size < minimum:
        raise DatasetTooShortError(f"need at least {minimum} failure times, got {times.size}")
    if not np.all(np.isfinite(times) & (times > 0)):
        raise DomainError("failure times must be finite and strictly positive")
    return times


# ---------------- Estimating equations ----------------
class EstimatingEquation:
    """Root function in N for one estimator on a fixed segment x_1..x_n.

    ``value`` and ``derivative`` accept a scalar or an array of N values.
    """

    kind: EstimatorKind

    def __init__(self, times: np.ndarray):
        self.times = np.asarray(times, dtype=float)
        self.n = self.times.size
        self.log_x = np.log(self.times)
        self.offsets = np.arange(self.n, dtype=float)

    def _log_remaining(self, N) -> np.ndarray:
        remaining = np.asarray(N, dtype=float)[..., None] - self.offsets
        if np.any(remaining <= 0):
            raise DomainError(f"N must exceed n - 1 = {self.n - 1}")
        return np.log(remaining)

    def value(self, N):
        raise NotImplementedError

    def derivative(self, N):
        raise NotImplementedError

    def residual(self, N: float) -> float:
        return abs(math.tanh(0.5 * self.value(N)))

    def phi(self, N: float) -> float:
        raise NotImplementedError

    def objective(self, params: JmParams) -> float:
        raise NotImplementedError

    def _transformed_objective(self, params: JmParams, transform: Transform) -> float:
        fitted = mtbf_series(params, self.n)
        return fnlse_objective(
            FnlseObjectiveInput(observed=tuple(self.times), fitted=tuple(fitted), transform=transform)
        )


class MleEquation(EstimatingEquation):
    """sum 1/(N-i+1) = n / (N - sum((i-1)x_i)/sum(x_i)); phi = n / (N sum x_i - sum (i-1)x_i)."""

    kind = EstimatorKind.mle()

    def __init__(self, times: np.ndarray):
        super().__init__(times)
        self.total = math.fsum(self.times)
        self.weighted = math.fsum(self.offsets * self.times)
        self.centre = self.weighted / self.total

    def value(self, N):
        log_d = self._log_remaining(N)
        gap = np.asarray(N, dtype=float) - self.centre
        return _out(_log_sum_exp(-log_d) - (math.log(self.n) - np.log(gap)), N)

    def derivative(self, N):
        log_d = self._log_remaining(N)
        gap = np.asarray(N, dtype=float) - self.centre
        log_p = _log_sum_exp(-log_d)
        dlog_p = -np.exp(_log_sum_exp(-2.0 * log_d) - log_p)
        dlog_q = -1.0 / gap
        return _out(dlog_p - dlog_q, N)

    def phi(self, N: float) -> float:
        return self.n / (N * self.total - self.weighted)

    def objective(self, params: JmParams) -> float:
        return -log_likelihood(params, self.times)


class PowerEquation(EstimatingEquation):
    """f(N) = S1*S2 - S3*S4 for the power transform x**alpha, with

    S1 = sum (x_i/d_i)**a, S2 = sum d_i**-(2a+1), S3 = sum x_i**a / d_i**(a+1), S4 = sum d_i**-2a
    and d_i = N - i + 1; phi**a = S4 / S1.
    """

    def __init__(self, times: np.ndarray, alpha: float):
        super().__init__(times)
        if alpha == 0 or not math.isfinite(alpha):
            raise DomainError(f"power index must be a nonzero real, got {alpha!r}")
        self.alpha = float(alpha)
        self.kind = EstimatorKind.powlse(self.alpha)
        a = self.alpha
        # (power of x_i, power of 1/d_i) for S1..S4
        self._sums = ((a, a), (0.0, 2.0 * a + 1.0), (a, a + 1.0), (0.0, 2.0 * a))

    def _log_sums(self, N, with_slopes: bool):
        log_d = self._log_remaining(N)
        logs, slopes = [], []
        for x_pow, d_pow in self._sums:
            terms = x_pow * self.log_x - d_pow * log_d
            log_s = _log_sum_exp(terms)
            logs.append(log_s)
            if with_slopes:
                # d(ln S)/dN = -d_pow * sum(t_i / d_i) / sum(t_i)
                slopes.append(-d_pow * np.exp(_log_sum_exp(terms - log_d) - log_s))
        return logs, slopes

    def value(self, N):
        (l1, l2, l3, l4), _ = self._log_sums(N, with_slopes=False)
        return _out((l1 + l2) - (l3 + l4), N)

    def derivative(self, N):
        _, (s1, s2, s3, s4) = self._log_sums(N, with_slopes=True)
        return _out((s1 + s2) - (s3 + s4), N)

    def phi(self, N: float) -> float:
        (l1, _, _, l4), _ = self._log_sums(N, with_slopes=False)
        log_phi = (float(l4) - float(l1)) / self.alpha
        return math.exp(log_phi)

    def objective(self, params: JmParams) -> float:
        return self._transformed_objective(params, Transform.power(self.alpha))


class LseEquation(PowerEquation):
    """(sum x/d^2)(sum 1/d^2) = (sum x/d)(sum 1/d^3); phi = sum 1/d^2 / sum x/d.

    h(N) = A2*B2 - A1*B3 is exactly -f(N) of the power equation at alpha = 1, so
    both are evaluated by the same code and LSE equals powLSE(1) bit for bit.
    """

    kind = EstimatorKind.lse()

    def __init__(self, times: np.ndarray):
        super().__init__(times, 1.0)
        self.kind = EstimatorKind.lse()

    def value(self, N):
        return -super().value(N)

    def derivative(self, N):
        return -super().derivative(N)

    def objective(self, params: JmParams) -> float:
        return self._transformed_objective(params, Transform.identity())


class LogLseEquation(EstimatingEquation):
    """mean(z) * sum 1/d = sum z/d with z_i = ln x_i + ln d_i; phi = exp(-mean(z))."""

    kind = EstimatorKind.loglse()

    def _moments(self, N):
        log_d = self._log_remaining(N)
        z = self.log_x + log_d
        w = np.exp(-log_d)
        b1 = w.sum(axis=-1)
        return z, w, b1

    def value(self, N):
        z, w, b1 = self._moments(N)
        return _out(z.mean(axis=-1) - (z * w).sum(axis=-1) / b1, N)

    def derivative(self, N):
        z, w, b1 = self._moments(N)
        w2 = w * w
        c = (z * w).sum(axis=-1)
        dc = (w2 * (1.0 - z)).sum(axis=-1)
        dweighted = (dc * b1 + c * w2.sum(axis=-1)) / (b1 * b1)
        return _out(w.mean(axis=-1) - dweighted, N)

    def residual(self, N: float) -> float:
        z, w, b1 = self._moments(N)
        zbar = float(z.mean())
        scale = float((np.abs(z) * w).sum() / b1) + abs(zbar)
        gap = abs(zbar - float((z * w).sum() / b1))
        return gap / scale if scale > 0 else gap

    def phi(self, N: float) -> float:
        z, _, _ = self._moments(N)
        return math.exp(-float(z.mean()))

    def objective(self, params: JmParams) -> float:
        return self._transformed_objective(params, Transform.log())


def equation_for(kind: EstimatorKind, times: np.ndarray) -> EstimatingEquation:
    if kind.method == "mle":
        return MleEquation(times)
    if kind.method == "lse":
        return LseEquation(times)
    if kind.method == "loglse":
        return LogLseEquation(times)
    return PowerEquation(times, kind.alpha)


# ---------------- Solving ----------------
def search_grid(n: int, cfg: SolverConfig) -> np.ndarray:
    """N values n - 1 + delta with delta log-spaced from the lower offset up to n_upper."""
    base = n - 1
    if not cfg.n_upper - base > cfg.n_lower_offset:
        raise ValueError(f"n_upper={cfg.n_upper} leaves no search interval for n={n}")
    return scan_points(base, cfg.n_upper, SCAN_POINTS, first_step=cfg.n_lower_offset)


def _to_result(eq: EstimatingEquation, root: RootResult, brackets: int) -> EstimationResult | None:
    N = root.root
    phi = eq.phi(N)
    if not (phi > 0 and math.isfinite(phi)):
        logger.debug("%s: discarding root N=%r with phi=%r", eq.kind.label, N, phi)
        return None
    params = JmParams(N=N, phi=phi)
    message = None if root.converged else f"residual {root.residual:.3e} above tolerance"
    return EstimationResult(
        params=params,
        kind=eq.kind,
        n=eq.n,
        iterations=root.iterations,
        residual=root.residual,
        converged=root.converged,
        objective=eq.objective(params),
        brackets=brackets,
        message=message,
    )


def limit_fit(eq: EstimatingEquation, cfg: SolverConfig, message: str | None = None) -> EstimationResult:
    """The fit capped at N = n_upper.

    With phi * N held fixed the model tends to a constant MTBF as N grows, and
    each estimator's phi then tends to its own location estimate of the
    segment: the arithmetic mean for MLE and LSE, the geometric mean for LogLSE
    and (mean of x**alpha)**(1/alpha) for powLSE.
    """
    N = float(cfg.n_upper)
    if not N > eq.n - 1:
        raise ValueError(f"n_upper={N} does not exceed n - 1 = {eq.n - 1}")
    phi = eq.phi(N)
    if not (phi > 0 and math.isfinite(phi)):
        raise DomainError(f"{eq.kind.label}: no valid phi at the cap N={N:g}")
    params = JmParams(N=N, phi=phi)
    return EstimationResult(
        params=params,
        kind=eq.kind,
        n=eq.n,
        iterations=0,
        residual=eq.residual(N),
        converged=False,
        objective=eq.objective(params),
        brackets=0,
        message=message or f"capped at N={N:g}",
    )


def solve_equation(eq: EstimatingEquation, cfg: SolverConfig) -> EstimationResult:
    n = eq.n
    lo, hi = n - 1 + cfg.n_lower_offset, cfg.n_upper
    grid = search_grid(n, cfg)
    values = np.asarray(eq.value(grid), dtype=float)
    brackets = brackets_from_grid(grid, values)
    logger.debug("%s n=%d: %d sign-change bracket(s)", eq.kind.label, n, len(brackets))

    roots: list[RootResult] = []
    failure = "no root of the estimating equation"
    if brackets:
        for br in brackets:
            if br.width == 0.0:
                res = eq.residual(br.a)
                roots.append(
                    RootResult(root=br.a, iterations=0, residual=res, converged=res <= cfg.root_tol)
                )
                continue
            x0 = 2.0 * n if br.contains(2.0 * n) else br.midpoint()
            roots.append(newton_solve(eq.value, eq.derivative, x0, br.a, br.b, cfg, residual=eq.residual))
    else:
        try:
            roots.append(
                newton_solve(eq.value, eq.derivative, 2.0 * n, lo, hi, cfg, residual=eq.residual, grid=grid)
            )
        except NoSignChangeError as exc:
            failure = f"no root in ({lo:g}, {hi:g}): {exc}"

    results = [r for r in (_to_result(eq, root, len(brackets)) for root in roots) if r is not None]
    converged = [r for r in results if r.converged]
    if converged:
        return min(converged, key=lambda r: (r.objective, r.params.N))
    if results:
        return min(results, key=lambda r: r.residual)
    return limit_fit(eq, cfg, failure)


# ---------------- Public estimators ----------------
def mle_root_fn(data: Data, N: float) -> float:
    """g(N) = sum 1/(N-i+1) - n / (N - sum((i-1)x_i)/sum(x_i)); its root is the MLE of N."""
    times = _times(data, minimum=1)
    n = times.size
    if not N > n - 1:
        raise DomainError(f"N must exceed n - 1 = {n - 1}, got {N!r}")
    offsets = np.arange(n, dtype=float)
    centre = math.fsum(offsets * times) / math.fsum(times)
    return math.fsum(1.0 / (N - offsets)) - n / (N - centre)


def estimate_mle(data: Data, cfg: SolverConfig | None = None) -> EstimationResult:
    return solve_equation(MleEquation(_times(data)), cfg or SolverConfig())


def estimate_lse(data: Data, cfg: SolverConfig | None = None) -> EstimationResult:
    return solve_equation(LseEquation(_times(data)), cfg or SolverConfig())


def estimate_loglse(data: Data, cfg: SolverConfig | None = None, base: float = math.e) -> EstimationResult:
    """LogLSE estimate; ``base`` is validated but cannot change the estimate."""
    Transform.log(base)
    return solve_equation(LogLseEquation(_times(data)), cfg or SolverConfig())


def estimate_powlse(data: Data, alpha: float, cfg: SolverConfig | None = None) -> EstimationResult:
    return solve_equation(PowerEquation(_times(data), alpha), cfg or SolverConfig())


def estimate(data: Data, kind: EstimatorKind, cfg: SolverConfig | None = None) -> EstimationResult:
    return solve_equation(equation_for(kind, _times(data)), cfg or SolverConfig())


def estimate_limit(data: Data, kind: EstimatorKind, cfg: SolverConfig | None = None) -> EstimationResult:
    """Large-N limit of ``kind`` on ``data``: the fit capped at N = n_upper, always non-converged."""
    return limit_fit(equation_for(kind, _times(data)), cfg or SolverConfig())
