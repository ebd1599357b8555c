"""CSV tables for trial records, sweep summaries and reports.

Every file starts with a ``# fcsconf <kind> v<version>`` comment line followed
by a header row.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .conformal import CandidateGrid, GridConfidenceSet
from .simulate import TrialRecord
from .split import StaircaseSet

SCHEMA_VERSION = 1

RECORD_COLUMNS = ["trial", "method", "n", "lambda", "test_id", "label", "fitness", "predicted",
                  "covered", "width_or_size", "grid", "set"]


class TableError(ValueError):
    pass


def _num(x):
    x = float(x)
    if np.isnan(x):
        return "nan"
    if np.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def encode_grid_set(cs: GridConfidenceSet) -> str:
    idx = np.flatnonzero(cs.included)
    if idx.size == 0:
        return ""
    breaks = np.flatnonzero(np.diff(idx) > 1)
    starts = np.concatenate([[idx[0]], idx[breaks + 1]])
    ends = np.concatenate([idx[breaks], [idx[-1]]])
    return ";".join(f"{a}-{b}" for a, b in zip(starts, ends))


def decode_grid_set(grid: CandidateGrid, text: str) -> GridConfidenceSet:
    flags = np.zeros(grid.count, dtype=bool)
    for part in filter(None, text.split(";")):
        a, b = (int(t) for t in part.split("-"))
        flags[a:b + 1] = True
    return GridConfidenceSet(grid, flags)


def encode_intervals(cs: StaircaseSet) -> str:
    return ";".join(f"{_num(a)},{_num(b)}" for a, b in cs.intervals)


def decode_intervals(text: str) -> StaircaseSet:
    ivs = []
    for part in filter(None, text.split(";")):
        a, b = part.split(",")
        ivs.append((float(a), float(b)))
    return StaircaseSet(tuple(ivs))


def _write(path, kind, columns, rows):
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# fcsconf {kind} v{SCHEMA_VERSION}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow(row)


def _read(path, kind):
    with open(path, newline="", encoding="utf-8") as fh:
        first = fh.readline()
        if not first.startswith(f"# fcsconf {kind} v"):
            raise TableError(f"{path}: not an fcsconf {kind} table")
        version = int(first.strip().rsplit("v", 1)[1])
        if version != SCHEMA_VERSION:
            raise TableError(f"{path}: unsupported schema version {version}")
        return list(csv.DictReader(fh))


def write_records(path, records):
    rows = []
    for r in records:
        if r.is_grid:
            grid, enc = str(r.conf_set.grid), encode_grid_set(r.conf_set)
        else:
            grid, enc = "", encode_intervals(r.conf_set)
        rows.append([r.trial, r.method, r.n, _num(r.lam), r.test_id, _num(r.label), _num(r.fitness),
                     _num(r.predicted), int(r.covered), _num(r.size), grid, enc])
    _write(path, "records", RECORD_COLUMNS, rows)


def read_records(path):
    rows = _read(path, "records")
    out = []
    grids = {}
    for row in rows:
        if row["grid"]:
            grid = grids.setdefault(row["grid"], CandidateGrid.parse(row["grid"]))
            cs = decode_grid_set(grid, row["set"])
        else:
            cs = decode_intervals(row["set"])
        out.append(TrialRecord(int(row["trial"]), row["method"], int(row["n"]), float(row["lambda"]),
                               int(row["test_id"]), float(row["label"]), float(row["fitness"]),
                               float(row["predicted"]), cs, row["covered"] == "1",
                               float(row["width_or_size"])))
    return out


def write_summaries(path, summaries):
    summaries = list(summaries)
    if not summaries:
        _write(path, "summary", [], [])
        return
    cols = list(summaries[0].as_row())
    _write(path, "summary", cols,
           [[_num(v) if isinstance(v, float) else v for v in s.as_row().values()] for s in summaries])


def write_table(path, kind, columns, rows):
    _write(path, kind, columns, [[_num(v) if isinstance(v, float) else v for v in row] for row in rows])
