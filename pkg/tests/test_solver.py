import math

import numpy as np
import pytest

from schemas.errors import NoSignChangeError
from schemas.schema import SolverConfig
from tools.solver import Bracket, brackets_from_grid, central_difference, newton_solve, scan_points


def test_linear_root_with_analytic_derivative():
    result = newton_solve(lambda x: x - 5.0, lambda x: 1.0, 1.0, 0.0, 10.0, SolverConfig())
    assert result.root == 5.0
    assert result.converged
    assert result.method == "newton"


def test_square_root_with_numerical_derivative():
    result = newton_solve(lambda x: math.sqrt(x) - 2.0, None, 1.0, 0.0, 10.0, SolverConfig())
    assert result.root == pytest.approx(4.0, rel=1e-12)
    assert result.converged


def test_overshooting_newton_falls_back_to_bisection():
    f = lambda x: math.atan(x - 3.0)
    fprime = lambda x: 1.0 / (1.0 + (x - 3.0) ** 2)
    result = newton_solve(f, fprime, 10.0, 0.0, 20.0, SolverConfig())
    assert result.method == "newton+bisection"
    assert result.converged
    assert result.root == pytest.approx(3.0, abs=1e-10)


def test_fallback_disabled_reports_non_convergence():
    f = lambda x: math.atan(x - 3.0)
    fprime = lambda x: 1.0 / (1.0 + (x - 3.0) ** 2)
    result = newton_solve(f, fprime, 10.0, 0.0, 20.0, SolverConfig(fallback=False))
    assert not result.converged
    assert result.root == 10.0


def test_no_sign_change_raises():
    with pytest.raises(NoSignChangeError):
        newton_solve(lambda x: x * x + 1.0, lambda x: 2.0 * x, 5.0, 0.0, 10.0, SolverConfig())


def test_empty_interval_rejected():
    with pytest.raises(ValueError):
        newton_solve(lambda x: x, None, 1.0, 2.0, 2.0, SolverConfig())


def test_brackets_from_grid_handles_exact_zeros():
    grid = np.array([0.0, 1.0, 2.0, 3.0])
    values = np.array([-1.0, 1.0, 0.0, 2.0])
    found = brackets_from_grid(grid, values)
    assert found == [Bracket(0.0, -1.0, 1.0, 1.0), Bracket(2.0, 0.0, 2.0, 0.0)]


def test_scan_points_span_interval():
    points = scan_points(1.0, 1e6, points=64)
    assert len(points) == 64
    assert points[0] > 1.0
    assert points[-1] == pytest.approx(1e6)
    assert np.all(np.diff(points) > 0)


def test_scan_points_first_step():
    points = scan_points(4.0, 1e7, first_step=1e-6)
    assert points[0] == pytest.approx(4.0 + 1e-6, abs=1e-12)
    assert points[-1] == pytest.approx(1e7)
    with pytest.raises(ValueError):
        scan_points(4.0, 5.0, first_step=2.0)


def test_newton_rescans_the_given_grid():
    f = lambda x: (x - 2.0) * (x - 4.0)
    fprime = lambda x: 2.0 * x - 6.0
    # f'(3) = 0 forces a rescan; f(0) and f(10) share a sign
    result = newton_solve(f, fprime, 3.0, 0.0, 10.0, SolverConfig(), grid=np.array([3.5, 4.5, 9.0]))
    assert result.root == pytest.approx(4.0, abs=1e-12)
    assert result.method == "newton+bisection"
    with pytest.raises(NoSignChangeError):
        newton_solve(f, fprime, 3.0, 0.0, 10.0, SolverConfig(), grid=np.array([5.0, 6.0, 7.0]))


def test_bracket_narrowing_keeps_sign_change():
    br = Bracket(0.0, -1.0, 4.0, 3.0)
    assert br.narrow(1.0, -0.5) == Bracket(1.0, -0.5, 4.0, 3.0)
    assert br.narrow(3.0, 0.5) == Bracket(0.0, -1.0, 3.0, 0.5)
    assert br.midpoint() == 2.0


def test_central_difference():
    fprime = central_difference(lambda x: x**3)
    assert fprime(2.0) == pytest.approx(12.0, rel=1e-8)


def test_square_root_of_two():
    result = newton_solve(lambda x: x * x - 2.0, lambda x: 2.0 * x, 1.0, 0.0, 10.0, SolverConfig())
    assert result.converged
    assert result.root == pytest.approx(math.sqrt(2.0), rel=1e-14)
