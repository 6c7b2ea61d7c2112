"""Jelinski-Moranda model: hazard rate and MTBF of the i-th inter-failure interval.

N faults are present initially, each detected fault is removed at once, and
during the i-th interval the hazard is phi * (N - i + 1).
"""

import math
from typing import Sequence

import numpy as np

from schemas.errors import OutOfRangeError
from schemas.schema import JmParams


def hazard(p: JmParams, i: int) -> float:
    if i < 1:
        raise OutOfRangeError(f"failure index must be >= 1, got {i}")
    remaining = p.N - i + 1
    if remaining <= 0:
        raise OutOfRangeError(f"no faults left at index {i} for N={p.N}")
    return p.phi * remaining


def mtbf(p: JmParams, i: int) -> float:
    return 1.0 / hazard(p, i)


def mtbf_series(p: JmParams, count: int) -> np.ndarray:
    """MTBF for indices 1..count."""
    remaining = p.N - np.arange(count, dtype=float)
    if count and remaining[-1] <= 0:
        raise OutOfRangeError(f"no faults left at index {count} for N={p.N}")
    return 1.0 / (p.phi * remaining)


def log_likelihood(p: JmParams, times: Sequence[float]) -> float:
    """log prod_i phi(N-i+1) exp(-phi(N-i+1) x_i); -inf outside the valid region."""
    x = np.asarray(times, dtype=float)
    rates = p.phi * (p.N - np.arange(x.size, dtype=float))
    if np.any(rates <= 0):
        return -math.inf
    return math.fsum(np.log(rates) - rates * x)


def remaining_faults(p: JmParams, n: int) -> float:
    return p.N - n
