"""Embedded benchmark failure datasets and failure-time file ingestion."""

import json
import logging
import math
from enum import Enum
from functools import lru_cache
from pathlib import Path
from typing import Literal, Union

import pandas as pd

from config.config import DATASETS_PATH
from schemas.errors import DatasetParseError, NonPositiveValueError
from schemas.schema import FailureDataset

logger = logging.getLogger(__name__)


class DatasetId(str, Enum):
    NTDS = "ntds"
    JDM1 = "jdm1"
    JDM2 = "jdm2"
    JDM3 = "jdm3"
    JDM4 = "jdm4"
    ATT = "att"


_ALIASES = {
    "ndts": DatasetId.NTDS,
    "jdm-i": DatasetId.JDM1,
    "jdm-ii": DatasetId.JDM2,
    "jdm-iii": DatasetId.JDM3,
    "jdm-iv": DatasetId.JDM4,
    "at&t": DatasetId.ATT,
}


@lru_cache(maxsize=1)
def _embedded() -> dict[str, FailureDataset]:
    with open(DATASETS_PATH, "r", encoding="utf-8") as f:
        entries = json.load(f)

    found = {}
    for entry in entries:
        times = tuple(float(v) for v in entry["times"])
        if len(times) != entry["count"]:
            raise DatasetParseError(f"{entry['id']}: expected {entry['count']} values, found {len(times)}")
        total = math.fsum(times)
        if not math.isclose(total, entry["checksum"], rel_tol=1e-12):
            raise DatasetParseError(f"{entry['id']}: checksum {total!r} != {entry['checksum']!r}")
        found[entry["id"]] = FailureDataset(name=entry["name"], unit=entry["unit"], times=times)
    return found


def builtin(id: Union[DatasetId, str]) -> FailureDataset:
    key = DatasetId(id).value
    return _embedded()[key]


def _parse_value(token: str, entry: int, line: int) -> float:
    try:
        value = float(token)
    except ValueError:
        raise DatasetParseError(f"cannot parse {token!r} as a failure time", line=line, text=token) from None
    if not (value > 0 and math.isfinite(value)):
        raise NonPositiveValueError(entry, value, line=line)
    return value


def _load_plain(text: str) -> list[float]:
    values: list[float] = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        for token in line.split():
            values.append(_parse_value(token, len(values) + 1, line_no))
    return values


def _is_number(token: str) -> bool:
    try:
        float(token)
    except ValueError:
        return False
    return True


def _cell(value) -> str:
    return "" if pd.isna(value) else str(value).strip()


def _load_csv(path: Path) -> list[float]:
    # blank lines stay in the frame so that row k is line k + 1
    try:
        frame = pd.read_csv(path, header=None, dtype=str, skip_blank_lines=False, keep_default_na=False)
    except pd.errors.EmptyDataError:
        return []
    except pd.errors.ParserError as exc:
        raise DatasetParseError(f"malformed CSV: {exc}") from exc

    column = frame.columns[-1]
    rows = [row for row in range(len(frame)) if any(_cell(v) for v in frame.iloc[row])]
    if rows and not _is_number(_cell(frame.at[rows[0], column])):
        rows = rows[1:]
    values: list[float] = []
    for row in rows:
        values.append(_parse_value(_cell(frame.at[row, column]), len(values) + 1, row + 1))
    return values


def load(path: Union[str, Path], format: Literal["plain", "csv"] = "plain") -> FailureDataset:
    """Read failure times from a file.

    ``plain`` is whitespace- or newline-separated decimals; ``csv`` is one
    ``index,time`` record per row with an optional header row.
    """
    path = Path(path)
    if format == "csv":
        values = _load_csv(path)
    elif format == "plain":
        values = _load_plain(path.read_text(encoding="utf-8"))
    else:
        raise ValueError(f"unknown dataset format {format!r}")
    if not values:
        raise DatasetParseError(f"{path} contains no failure times")
    logger.debug("loaded %d failure times from %s", len(values), path)
    return FailureDataset(name=path.stem, times=tuple(values))


def serialize(dataset: FailureDataset) -> str:
    """Plain format, one value per line at full precision."""
    return "".join(f"{value!r}\n" for value in dataset.times)


def resolve(ref: str) -> FailureDataset:
    """A builtin id (case-insensitive, e.g. ``ntds``, ``JDM-II``, ``AT&T``) or a file path."""
    key = ref.strip().lower()
    if key in _ALIASES:
        return builtin(_ALIASES[key])
    if key in {d.value for d in DatasetId}:
        return builtin(key)
    path = Path(ref)
    if not path.is_file():
        raise FileNotFoundError(f"{ref!r} is neither a builtin dataset nor a readable file")
    return load(path, "csv" if path.suffix.lower() == ".csv" else "plain")
