import math

import numpy as np
import pytest
from pydantic import ValidationError

from criteria import braun, te_segment
from datasets import DatasetId, builtin
from jm import mtbf
from schemas.errors import DatasetTooShortError
from schemas.schema import DEFAULT_ALPHAS, AlphaGrid, EstimatorKind
from sweep import best_alpha_by_rbs, best_alpha_by_re, parse_grid, run_recursive, sweep_alpha
from tests.conftest import exact_model

SMALL_GRID = AlphaGrid(values=(-2.0, -0.5, 1.0, 1.5))


def test_default_grid_is_quarter_steps_without_zero():
    assert len(DEFAULT_ALPHAS) == 16
    assert DEFAULT_ALPHAS[0] == -2.0 and DEFAULT_ALPHAS[-1] == 2.0
    assert -1.25 in DEFAULT_ALPHAS and 0.0 not in DEFAULT_ALPHAS


def test_parse_grid():
    assert parse_grid("1/4, -2, -7/4").values == (-2.0, -1.75, 0.25)
    assert parse_grid("0.5").values == (0.5,)
    with pytest.raises(ValueError):
        parse_grid("1,abc")
    with pytest.raises(ValidationError):
        parse_grid("-1,0,1")
    with pytest.raises(ValidationError):
        parse_grid("1,1")


def test_run_recursive_structure(jdm2):
    run = run_recursive(jdm2, EstimatorKind.loglse())
    assert [r.step_index for r in run.records] == list(range(4, jdm2.n + 1))
    assert run.summary.re_total == pytest.approx(math.fsum(r.re for r in run.records) / (jdm2.n - 3))
    for r in run.records:
        assert r.observed == jdm2.times[r.step_index - 1]
        assert r.predicted_mtbf == pytest.approx(mtbf(r.segment_params, r.step_index))


def test_recorded_criteria_match_direct_evaluation(jdm2):
    run = run_recursive(jdm2, EstimatorKind.mle())
    x = list(jdm2.times)
    for r in run.records:
        i = r.step_index
        fitted = list(r.fitted_mtbf)
        assert r.te == pytest.approx(te_segment(x[: i - 1], i, fitted))
        assert r.rbs == pytest.approx(braun(x[:i], fitted + [r.predicted_mtbf], 1))
        assert r.tbs == pytest.approx(braun(x[: i - 1], fitted, 1))


@pytest.mark.parametrize("kind", [EstimatorKind.lse(), EstimatorKind.loglse()], ids=lambda k: k.label)
def test_exact_model_predictions_are_exact(kind):
    run = run_recursive(exact_model(12), kind)
    assert not any(r.fallback_used for r in run.records)
    for r in run.records:
        assert r.re < 1e-6
        assert r.te < 1e-6
        assert r.tbs < 1e-6


@pytest.mark.parametrize(
    "kind, location, re_total",
    [
        (EstimatorKind.mle(), np.mean, 216.6059),
        (EstimatorKind.loglse(), lambda x: np.exp(np.mean(np.log(x))), 150.1335),
    ],
    ids=["MLE", "LogLSE"],
)
def test_rootless_steps_predict_the_estimators_own_limit(kind, location, re_total):
    data = builtin(DatasetId.JDM1)
    run = run_recursive(data, kind)
    for r in run.records:
        prefix = np.asarray(data.times[: r.step_index - 1])
        assert r.fallback_reason == "estimator-limit"
        assert r.predicted_mtbf == pytest.approx(location(prefix), rel=1e-5)
    assert run.summary.re_total == pytest.approx(re_total, rel=1e-5)


def test_rootless_steps_do_not_reuse_earlier_fits(ntds):
    run = run_recursive(ntds, EstimatorKind.mle())
    steps = {r.step_index: r for r in run.records}
    # x_1..x_3 has a finite root at N = 11.70
    assert steps[4].fallback_reason is None
    assert steps[4].segment_params.N == pytest.approx(11.6978, rel=1e-4)
    # x_1..x_11 has none; the prediction is the segment mean, not the step-4 fit
    assert steps[12].fallback_reason == "estimator-limit"
    assert steps[12].predicted_mtbf == pytest.approx(71.0 / 11.0, rel=1e-5)


def test_root_below_next_index_uses_the_limit(ntds):
    run = run_recursive(ntds, EstimatorKind.mle())
    step = next(r for r in run.records if r.step_index == 33)
    # x_1..x_32 converges to N = 31.58, which cannot predict x_33
    assert step.converged
    assert step.fallback_reason == "estimator-limit"
    assert step.predicted_mtbf == pytest.approx(798.0 / 32.0, rel=1e-5)


def test_too_short_for_recursion():
    with pytest.raises(DatasetTooShortError):
        run_recursive([1.0, 2.0, 3.0], EstimatorKind.mle())


def test_sweep_selects_minimal_training_criteria(jdm2):
    sweep = sweep_alpha(jdm2, SMALL_GRID)
    assert set(sweep.runs) == set(SMALL_GRID.values)
    te = {a: run.summary.te_total for a, run in sweep.runs.items()}
    tbs = {a: run.summary.tbs_total for a, run in sweep.runs.items()}
    assert all(te[sweep.alpha_opt_te] <= v for v in te.values())
    assert all(tbs[sweep.alpha_opt_tbs] <= v for v in tbs.values())
    assert sweep.run_opt_te == sweep.runs[sweep.alpha_opt_te]

    alpha, re = best_alpha_by_re(sweep)
    assert re == min(run.summary.re_total for run in sweep.runs.values())
    assert re <= sweep.run_opt_te.summary.re_total
    alpha, rbs = best_alpha_by_rbs(sweep)
    assert rbs == min(run.summary.rbs_total for run in sweep.runs.values())


def test_sweep_is_deterministic(jdm2):
    assert sweep_alpha(jdm2, SMALL_GRID) == sweep_alpha(jdm2, SMALL_GRID)


def test_power_index_one_run_equals_lse_run(jdm2):
    sweep = sweep_alpha(jdm2, SMALL_GRID)
    lse = run_recursive(jdm2, EstimatorKind.lse())
    assert sweep.runs[1.0].records == lse.records
    assert sweep.runs[1.0].summary == lse.summary


def test_parallel_sweep_equals_sequential(jdm2):
    grid = AlphaGrid(values=(-1.0, 1.0))
    assert sweep_alpha(jdm2, grid, workers=2) == sweep_alpha(jdm2, grid, workers=1)
