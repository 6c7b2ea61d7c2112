"""Rendering of OutputTable rows as human text, CSV or JSON lines."""

import json
import math
from pathlib import Path
from typing import Any, Literal

import pandas as pd

from schemas.schema import OutputTable, alpha_label

OutputFormat = Literal["human", "csv", "jsonl"]
FORMATS: tuple[str, ...] = ("human", "csv", "jsonl")


def _human_cell(column: str, value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        if column.startswith("alpha"):
            return alpha_label(value)
        if math.isinf(value) or math.isnan(value):
            return str(value)
        return f"{value:.3f}"
    return str(value)


def to_frame(table: OutputTable) -> pd.DataFrame:
    return pd.DataFrame(table.rows, columns=table.columns)


def render_human(table: OutputTable) -> str:
    cells = [[_human_cell(c, row[c]) for c in table.columns] for row in table.rows]
    widths = [max([len(c)] + [len(r[k]) for r in cells]) for k, c in enumerate(table.columns)]
    lines = []
    if table.title:
        lines.append(table.title)
    lines.append("  ".join(c.rjust(w) for c, w in zip(table.columns, widths)))
    for row in cells:
        lines.append("  ".join(v.rjust(w) for v, w in zip(row, widths)))
    return "\n".join(lines) + "\n"


def render_csv(table: OutputTable) -> str:
    return to_frame(table).to_csv(index=False, lineterminator="\n")


def render_jsonl(table: OutputTable) -> str:
    return "".join(json.dumps(row, ensure_ascii=False) + "\n" for row in table.rows)


def render(table: OutputTable, fmt: OutputFormat = "human") -> str:
    if fmt == "human":
        return render_human(table)
    if fmt == "csv":
        return render_csv(table)
    if fmt == "jsonl":
        return render_jsonl(table)
    raise ValueError(f"unknown output format {fmt!r}")


def write_csv(table: OutputTable, path: Path | str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render_csv(table), encoding="utf-8")
    return path
