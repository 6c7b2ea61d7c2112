"""Root finding for one-dimensional estimating equations (Newton-Raphson with bisection fallback)."""

import logging
import math
import sys
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from schemas.errors import NoSignChangeError
from schemas.schema import RootResult, SolverConfig

logger = logging.getLogger(__name__)

Func = Callable[[float], float]

SCAN_POINTS = 64
_STEP_EPS = 4 * sys.float_info.epsilon


@dataclass(frozen=True)
class Bracket:
    a: float
    fa: float
    b: float
    fb: float

    @property
    def width(self) -> float:
        return self.b - self.a

    def midpoint(self) -> float:
        return self.a + 0.5 * (self.b - self.a)

    def contains(self, x: float) -> bool:
        return self.a < x < self.b

    def narrow(self, x: float, fx: float) -> "Bracket":
        if math.copysign(1.0, fx) == math.copysign(1.0, self.fa):
            return Bracket(x, fx, self.b, self.fb)
        return Bracket(self.a, self.fa, x, fx)

    def collapsed(self) -> bool:
        return self.width <= _STEP_EPS * max(abs(self.a), abs(self.b), 1.0)


def _opposite(fa: float, fb: float) -> bool:
    return math.isfinite(fa) and math.isfinite(fb) and fa * fb < 0


def scan_points(lo: float, hi: float, points: int = SCAN_POINTS, first_step: Optional[float] = None) -> np.ndarray:
    """Points lo + d with d log-spaced from first_step up to hi - lo; lo itself is excluded.

    The estimators search these points for sign changes and pass the same
    points to ``newton_solve`` for its rescan.
    """
    span = hi - lo
    if first_step is None:
        first_step = max(span * 1e-12, sys.float_info.min)
    if not span > first_step > 0:
        raise ValueError(f"first step {first_step!r} does not fit in ({lo!r}, {hi!r})")
    return lo + np.geomspace(first_step, span, points)


def brackets_from_grid(grid: np.ndarray, values: np.ndarray) -> list[Bracket]:
    """Adjacent grid cells whose values change sign; an exact zero gives a zero-width bracket."""
    found = []
    for k in range(len(grid) - 1):
        fa, fb = float(values[k]), float(values[k + 1])
        if fa == 0.0:
            found.append(Bracket(float(grid[k]), fa, float(grid[k]), fa))
        elif _opposite(fa, fb):
            found.append(Bracket(float(grid[k]), fa, float(grid[k + 1]), fb))
    if float(values[-1]) == 0.0:
        found.append(Bracket(float(grid[-1]), 0.0, float(grid[-1]), 0.0))
    return found


def scan_brackets(
    f: Func, lo: float, hi: float, points: int = SCAN_POINTS, first_step: Optional[float] = None
) -> list[Bracket]:
    return grid_brackets(f, scan_points(lo, hi, points, first_step))


def grid_brackets(f: Func, grid: np.ndarray) -> list[Bracket]:
    values = np.array([f(float(x)) for x in grid])
    return brackets_from_grid(grid, values)


def central_difference(f: Func) -> Func:
    def fprime(x: float) -> float:
        h = max(1e-6, 1e-8 * abs(x))
        return (f(x + h) - f(x - h)) / (2.0 * h)

    return fprime


def _closest(brackets: list[Bracket], x: float) -> Bracket:
    def distance(br: Bracket) -> float:
        return 0.0 if br.a <= x <= br.b else min(abs(br.a - x), abs(br.b - x))

    return min(brackets, key=distance)


def newton_solve(
    f: Func,
    fprime: Optional[Func],
    x0: float,
    lo: float,
    hi: float,
    cfg: SolverConfig,
    *,
    residual: Optional[Func] = None,
    grid: Optional[np.ndarray] = None,
) -> RootResult:
    """Newton-Raphson on (lo, hi) with a bisection fallback.

    Iterates x <- x - f(x)/f'(x). A step that leaves the current bracket, or a
    vanishing/non-finite derivative, is replaced by a bisection step on a
    sign-change bracket: (lo, hi) itself when f changes sign there, otherwise
    one found by scanning ``grid``. Iteration stops once the step is at
    machine precision; ``converged`` means residual(x) <= cfg.root_tol.

    Parameters
    ----------
    f, fprime:
        Function and derivative. Without ``fprime`` a central difference with
        step max(1e-6, 1e-8|x|) is used.
    residual:
        Scale-free size of f at x; defaults to |f(x)|.
    grid:
        Points rescanned for a sign change; defaults to ``scan_points(lo, hi)``.

    Raises
    ------
    NoSignChangeError
        Newton left the interval and no sign-change bracket exists.
    """
    if not lo < hi:
        raise ValueError(f"empty search interval ({lo}, {hi})")
    derivative = fprime or central_difference(f)
    measure = residual or (lambda v: abs(f(v)))

    f_lo, f_hi = f(lo), f(hi)
    bracket = Bracket(lo, f_lo, hi, f_hi) if _opposite(f_lo, f_hi) else None
    x = min(max(float(x0), lo), hi)
    method = "newton"
    iterations = 0

    while iterations < cfg.max_iter:
        iterations += 1
        fx = f(x)
        if fx == 0.0:
            break
        if bracket is not None and bracket.contains(x):
            bracket = bracket.narrow(x, fx)
        dfx = derivative(x)
        x_new = x - fx / dfx if (dfx != 0.0 and math.isfinite(dfx)) else math.nan
        lower, upper = (bracket.a, bracket.b) if bracket is not None else (lo, hi)
        logger.debug("iter %d: x=%r f=%r f'=%r", iterations, x, fx, dfx)

        if not lower < x_new < upper:
            if not cfg.fallback:
                logger.debug("Newton step left (%r, %r); fallback disabled", lower, upper)
                break
            if bracket is None:
                candidates = grid_brackets(f, scan_points(lo, hi) if grid is None else grid)
                if not candidates:
                    raise NoSignChangeError(
                        f"Newton left ({lo}, {hi}) after {iterations} iterations "
                        f"and f has no sign change there"
                    )
                bracket = _closest(candidates, x)
                if bracket.width == 0.0:
                    x = bracket.a
                    break
            x_new = bracket.midpoint()
            method = "newton+bisection"

        step_done = abs(x_new - x) <= _STEP_EPS * max(abs(x), 1.0)
        x = x_new
        if step_done or (bracket is not None and bracket.collapsed()):
            break

    res = float(measure(x))
    converged = res <= cfg.root_tol
    if not converged:
        logger.debug("no convergence after %d iterations: x=%r residual=%r", iterations, x, res)
    return RootResult(root=x, iterations=iterations, residual=res, converged=converged, method=method)
