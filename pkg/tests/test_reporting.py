import io
import json
import math

import pandas as pd

from schemas.schema import OutputTable
from utils.reporting import render, write_csv


def _table() -> OutputTable:
    table = OutputTable(title="demo", columns=["alpha", "value", "flag"])
    table.add(alpha=-1.25, value=1 / 3, flag=True)
    table.add(alpha=None, value=math.pi, flag=False)
    return table


def test_human_rounds_and_prints_fractions():
    text = render(_table(), "human")
    assert text.splitlines()[0] == "demo"
    assert "-5/4" in text
    assert "0.333" in text and "0.3333" not in text


def test_csv_and_jsonl_keep_full_precision(tmp_path):
    frame = pd.read_csv(io.StringIO(render(_table(), "csv")), float_precision="round_trip")
    assert frame.loc[0, "value"] == 1 / 3
    assert frame.loc[1, "value"] == math.pi
    rows = [json.loads(line) for line in render(_table(), "jsonl").splitlines()]
    assert rows[0] == {"alpha": -1.25, "value": 1 / 3, "flag": True}
    path = write_csv(_table(), tmp_path / "out" / "demo.csv")
    assert pd.read_csv(path, float_precision="round_trip").loc[1, "value"] == math.pi
