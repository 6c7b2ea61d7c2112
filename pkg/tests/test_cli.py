import io
import json

import pandas as pd
import pytest

from main import EXIT_INPUT, EXIT_OK, main


def _csv(capsys) -> pd.DataFrame:
    return pd.read_csv(io.StringIO(capsys.readouterr().out))


def test_estimate_prints_result(capsys):
    assert main(["estimate", "ntds", "mle", "--format", "csv"]) == EXIT_OK
    frame = _csv(capsys)
    assert frame.loc[0, "converged"]
    assert frame.loc[0, "residual"] <= 1e-10
    assert frame.loc[0, "N_hat"] > 33


def test_power_index_one_matches_lse(capsys):
    assert main(["estimate", "jdm2", "powlse", "--alpha", "1", "--format", "csv"]) == EXIT_OK
    pow1 = _csv(capsys)
    assert main(["estimate", "--dataset", "jdm2", "lse", "--format", "csv"]) == EXIT_OK
    lse = _csv(capsys)
    assert pow1.loc[0, "N_hat"] == pytest.approx(lse.loc[0, "N_hat"], rel=1e-8)
    assert pow1.loc[0, "phi_hat"] == pytest.approx(lse.loc[0, "phi_hat"], rel=1e-8)


@pytest.mark.parametrize(
    "argv",
    [
        ["estimate", "ntds", "powlse"],
        ["estimate", "ntds", "mle", "--alpha", "1"],
        ["estimate", "ntds", "nls"],
        ["estimate", "no-such-dataset", "mle"],
        ["estimate", "mle"],
        ["sweep", "jdm2", "--grid", "0,1"],
    ],
)
def test_input_errors_exit_with_one(argv, capsys):
    assert main(argv) == EXIT_INPUT
    assert capsys.readouterr().err


def test_non_convergence_exits_with_two(capsys):
    assert main(["estimate", "ntds", "mle", "--max-iter", "1"]) == 2


def test_human_output_uses_fractions(capsys):
    assert main(["estimate", "jdm2", "powlse", "--alpha=-5/4"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "-5/4" in out
    assert "powLSE" in out


def test_predict_emits_step_series(tmp_path, capsys):
    target = tmp_path / "steps.csv"
    assert main(["predict", "jdm2", "loglse", "--emit", str(target), "--format", "jsonl"]) == EXIT_OK
    summary = json.loads(capsys.readouterr().out.splitlines()[0])
    steps = pd.read_csv(target)
    assert list(steps.columns) == ["i", "N_hat", "phi_hat", "mtbf_hat", "x_i", "TE_i", "RE_i", "TBS_i", "RBS_i", "fallback_used"]
    assert list(steps["i"]) == list(range(4, 16))
    assert summary["RE"] == pytest.approx(steps["RE_i"].sum() / 12)


def test_sweep_with_custom_grid(tmp_path, capsys):
    target = tmp_path / "sweep.csv"
    assert main(["sweep", "jdm2", "--grid=-1,1/2,1", "--emit", str(target)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "opt by TE" in out and "best by RBS" in out
    assert list(pd.read_csv(target)["alpha"]) == [-1.0, 0.5, 1.0]


def test_variance_series(capsys):
    assert main(["variance", "jdm2", "--grid=-1,1", "--format", "csv"]) == EXIT_OK
    frame = _csv(capsys)
    assert list(frame.columns) == ["m", "variance", "var_mle", "var_loglse", "var_powlse_re", "var_powlse_bs"]
    assert list(frame["m"]) == list(range(3, 15))
    assert (frame.drop(columns="m") >= 0).all().all()
