import math

import numpy as np
import pytest

from jm import hazard, log_likelihood, mtbf, mtbf_series, remaining_faults
from schemas.errors import OutOfRangeError
from schemas.schema import JmParams


def test_hazard_and_mtbf():
    p = JmParams(N=10.0, phi=0.1)
    assert hazard(p, 1) == pytest.approx(1.0)
    assert mtbf(p, 1) == pytest.approx(1.0)
    assert mtbf(p, 10) == pytest.approx(10.0)
    assert mtbf(JmParams(N=10.5, phi=0.1), 11) == pytest.approx(20.0)


@pytest.mark.parametrize("i", [0, 11, 12])
def test_out_of_range_indices(i):
    with pytest.raises(OutOfRangeError):
        mtbf(JmParams(N=10.0, phi=0.1), i)


def test_mtbf_series_matches_scalar():
    p = JmParams(N=20.0, phi=0.01)
    series = mtbf_series(p, 5)
    np.testing.assert_allclose(series, [mtbf(p, i) for i in range(1, 6)], rtol=1e-15)
    with pytest.raises(OutOfRangeError):
        mtbf_series(p, 21)


def test_log_likelihood():
    p = JmParams(N=3.0, phi=1.0)
    expected = math.log(3) - 3 + math.log(2) - 2
    assert log_likelihood(p, [1.0, 1.0]) == pytest.approx(expected)
    assert log_likelihood(JmParams(N=1.5, phi=1.0), [1.0, 1.0, 1.0]) == -math.inf


def test_remaining_faults():
    assert remaining_faults(JmParams(N=31.2, phi=0.01), 26) == pytest.approx(5.2)


@pytest.mark.parametrize("N, phi, i, rate", [(1.0, 1.0, 1, 1.0), (10.0, 0.5, 1, 5.0), (10.0, 0.5, 10, 0.5)])
def test_hazard_is_reciprocal_of_mtbf(N, phi, i, rate):
    p = JmParams(N=N, phi=phi)
    assert hazard(p, i) == rate
    assert mtbf(p, i) == pytest.approx(1.0 / rate)
    assert mtbf(p, i) * hazard(p, i) == pytest.approx(1.0, rel=1e-15)


def test_mtbf_grows_with_index():
    series = mtbf_series(JmParams(N=12.5, phi=0.3), 12)
    assert np.all(np.diff(series) > 0)
