"""Readers for the simulator's emitted files.

Input schemas (produced by the ``opmax`` CLI):

- ``trace_<hash>_rep<NNNN>.csv`` — header ``t,class,total_opinion``, one row
  per (step, class).
- ``trace_<hash>_rep<NNNN>.json`` — sidecar with ``final_alpha`` (n x K),
  ``mean_final_alpha`` and ``snapshots`` mapping step -> n x K belief matrix.
- ``sweep.csv`` — header ``placement,algorithm,mean_final_total,<centrality...>``.

Readers never modify their inputs.
"""

from __future__ import annotations

import csv
import glob
import json
import os
from dataclasses import dataclass

import numpy as np

__all__ = [
    "PlotsError",
    "SchemaError",
    "EmptyInputError",
    "UnsupportedError",
    "TraceSet",
    "SweepTable",
    "read_trace_dir",
    "read_sidecar",
    "read_sweep_csv",
]


class PlotsError(Exception):
    """Base class for figure-generation failures."""


class SchemaError(PlotsError):
    """An input file does not match the expected column/key layout."""


class EmptyInputError(PlotsError):
    """No usable input files were found."""


class UnsupportedError(PlotsError):
    """The input is valid but outside what this figure can draw."""


@dataclass(frozen=True)
class TraceSet:
    """Per-class total-opinion curves for one or more replications.

    ``totals`` has shape (replications, steps, classes); ``steps`` is the
    shared time axis.
    """

    totals: np.ndarray
    steps: np.ndarray
    paths: tuple[str, ...]

    @property
    def n_replications(self) -> int:
        return self.totals.shape[0]

    @property
    def n_classes(self) -> int:
        return self.totals.shape[2]


def _read_one_trace(path: str) -> tuple[np.ndarray, np.ndarray]:
    with open(path, newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        expected = ["t", "class", "total_opinion"]
        if header != expected:
            raise SchemaError(
                f"{path}: expected columns {expected}, found {header}"
            )
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise SchemaError(f"{path}:{lineno}: expected 3 fields")
            try:
                rows.append((int(row[0]), int(row[1]), float(row[2])))
            except ValueError as exc:
                raise SchemaError(f"{path}:{lineno}: {exc}") from None
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    steps = sorted({t for t, _, _ in rows})
    classes = sorted({k for _, k, _ in rows})
    if steps != list(range(len(steps))) or classes != list(range(len(classes))):
        raise SchemaError(f"{path}: steps/classes are not contiguous from 0")
    totals = np.full((len(steps), len(classes)), np.nan)
    for t, k, v in rows:
        totals[t, k] = v
    if np.isnan(totals).any():
        raise SchemaError(f"{path}: missing (t, class) combinations")
    return totals, np.asarray(steps)


def read_trace_dir(trace_dir: str) -> TraceSet:
    """Load every ``trace_*.csv`` in a directory into one aligned array."""
    if not os.path.isdir(trace_dir):
        raise EmptyInputError(f"{trace_dir}: not a directory")
    paths = sorted(glob.glob(os.path.join(trace_dir, "trace_*.csv")))
    if not paths:
        raise EmptyInputError(f"{trace_dir}: no trace_*.csv files found")
    loaded = [_read_one_trace(p) for p in paths]
    shape = loaded[0][0].shape
    for p, (totals, _) in zip(paths, loaded):
        if totals.shape != shape:
            raise SchemaError(
                f"{p}: shape {totals.shape} differs from {paths[0]} {shape}"
            )
    return TraceSet(
        totals=np.stack([t for t, _ in loaded]),
        steps=loaded[0][1],
        paths=tuple(paths),
    )


def read_sidecar(path: str) -> dict:
    """Load one trace JSON sidecar and validate the keys the figures use."""
    try:
        with open(path) as f:
            payload = json.load(f)
    except OSError as exc:
        raise EmptyInputError(f"{path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON ({exc})") from None
    for key in ("final_alpha", "snapshots"):
        if key not in payload:
            raise SchemaError(f"{path}: missing key {key!r}")
    if not isinstance(payload["snapshots"], dict):
        raise SchemaError(f"{path}: 'snapshots' must be an object")
    return payload


@dataclass(frozen=True)
class SweepTable:
    """One sweep CSV: per-placement final totals and centrality columns."""

    placements: np.ndarray
    algorithm: str
    mean_final_total: np.ndarray
    centralities: dict[str, np.ndarray]
    path: str


def read_sweep_csv(path: str) -> SweepTable:
    try:
        f = open(path, newline="")
    except OSError as exc:
        raise EmptyInputError(f"{path}: {exc}") from None
    with f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        fixed = ["placement", "algorithm", "mean_final_total"]
        if header[: len(fixed)] != fixed or len(header) <= len(fixed):
            raise SchemaError(
                f"{path}: expected columns {fixed} + centrality columns, "
                f"found {header}"
            )
        kinds = header[len(fixed):]
        rows = [row for row in reader if row]
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    algorithms = {row[1] for row in rows}
    if len(algorithms) != 1:
        raise SchemaError(f"{path}: mixed algorithms {sorted(algorithms)}")
    try:
        placements = np.asarray([int(row[0]) for row in rows])
        totals = np.asarray([float(row[2]) for row in rows])
        cents = {
            kind: np.asarray([float(row[3 + j]) for row in rows])
            for j, kind in enumerate(kinds)
        }
    except (ValueError, IndexError) as exc:
        raise SchemaError(f"{path}: {exc}") from None
    return SweepTable(
        placements=placements,
        algorithm=algorithms.pop(),
        mean_final_total=totals,
        centralities=cents,
        path=path,
    )
