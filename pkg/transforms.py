"""H-family transforms and the function-transformed least squares objective.

An FNLSE fit minimises ``sum_i (H(y_i) - H(f_i))**2`` for a transform ``H``
(identity, logarithm or power). By the mean-value theorem this is a weighted
least squares criterion with weights ``H'(xi_i)**2``; ``implied_weights``
returns those weights so the equivalence can be checked numerically.
"""

import math
from typing import Sequence

from schemas.errors import DomainError
from schemas.schema import FnlseObjectiveInput, Transform


def _int_power(x: float, k: int) -> float:
    result = 1.0
    for _ in range(abs(k)):
        result *= x
    return 1.0 / result if k < 0 else result


def _check_domain(t: Transform, x: float) -> None:
    if t.kind != "identity" and not x > 0:
        raise DomainError(f"{t.label} is only defined for x > 0, got {x!r}")


def apply(t: Transform, x: float) -> float:
    """H(x) for the given transform."""
    _check_domain(t, x)
    if t.kind == "identity":
        return x
    if t.kind == "log":
        # natural log divided by ln(base): base changes only rescale
        if t.base == math.e:
            return math.log(x)
        return math.log(x) / math.log(t.base)
    if float(t.alpha).is_integer():
        return _int_power(x, int(t.alpha))
    return math.exp(t.alpha * math.log(x))


def derivative(t: Transform, x: float) -> float:
    """H'(x) for the given transform."""
    _check_domain(t, x)
    if t.kind == "identity":
        return 1.0
    if t.kind == "log":
        return 1.0 / (x * math.log(t.base))
    alpha = t.alpha
    if float(alpha).is_integer():
        return alpha * _int_power(x, int(alpha) - 1)
    return alpha * math.exp((alpha - 1.0) * math.log(x))


def fnlse_objective(data: FnlseObjectiveInput) -> float:
    t = data.transform
    return math.fsum(
        (apply(t, y) - apply(t, f)) ** 2 for y, f in zip(data.observed, data.fitted)
    )


def implied_weights(data: FnlseObjectiveInput) -> list[float]:
    """Weights w_i with sum_i w_i (y_i - f_i)**2 == fnlse_objective(data).

    For y_i == f_i the mean-value point collapses onto y_i and the weight is H'(y_i)**2.
    """
    t = data.transform
    weights = []
    for y, f in zip(data.observed, data.fitted):
        if y == f:
            weights.append(derivative(t, y) ** 2)
        else:
            weights.append(((apply(t, y) - apply(t, f)) / (y - f)) ** 2)
    return weights


def weighted_objective(data: FnlseObjectiveInput, weights: Sequence[float]) -> float:
    """sum_i w_i (y_i - f_i)**2, the weighted least squares form of the objective."""
    return math.fsum(
        w * ((y - f) * (y - f)) for w, y, f in zip(weights, data.observed, data.fitted)
    )


def contraction_interval(t: Transform) -> tuple[float, float]:
    """Open interval of x > 0 on which |H'(x)| <= 1.

    On data confined to this interval the transformed objective never exceeds
    the untransformed one.
    """
    if t.kind == "identity":
        return 0.0, math.inf
    if t.kind == "log":
        return 1.0 / abs(math.log(t.base)), math.inf
    alpha = t.alpha
    if alpha == 1:
        return 0.0, math.inf
    if alpha < 1:
        return abs(alpha) ** (1.0 / (1.0 - alpha)), math.inf
    return 0.0, (1.0 / abs(alpha)) ** (1.0 / (alpha - 1.0))
