"""Pre-render validation of the CSV inputs.

Each figure declares its column schema; validation reports missing
columns by name, parses numerics, and applies figure-specific sanity
checks before anything is drawn.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass


class SchemaError(ValueError):
    """CSV does not match the declared schema for the requested figure."""


SCHEMAS = {
    1: ("rho", "k", "pmf", "mc_sigma"),
    2: ("k", "x", "cdf"),
    3: ("z", "f"),
}


@dataclass
class Table:
    columns: tuple
    rows: list  # list of dicts, values parsed to float

    def column(self, name):
        return [r[name] for r in self.rows]

    def groups(self, key):
        """Rows grouped by a key column, insertion-ordered."""
        out: dict = {}
        for r in self.rows:
            out.setdefault(r[key], []).append(r)
        return out


def load_table(path: str, fig: int) -> Table:
    """Read and validate a CSV for the given figure id."""
    if fig not in SCHEMAS:
        raise SchemaError(f"unknown figure id {fig}; expected one of 1, 2, 3")
    want = SCHEMAS[fig]
    with open(path, newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file")
        raw = list(reader)
    missing = [c for c in want if c not in header]
    if missing:
        raise SchemaError(
            f"{path}: missing column(s) {', '.join(missing)} "
            f"(figure {fig} needs {', '.join(want)}; found {', '.join(header)})"
        )
    idx = {c: header.index(c) for c in want}
    rows = []
    for lineno, rec in enumerate(raw, start=2):
        row = {}
        for c in want:
            try:
                row[c] = float(rec[idx[c]])
            except (ValueError, IndexError):
                raise SchemaError(
                    f"{path}:{lineno}: column {c!r} is not numeric"
                )
        rows.append(row)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    table = Table(want, rows)
    _SANITY[fig](table, path)
    return table


def _check_fig1(t: Table, path: str) -> None:
    for r in t.rows:
        if not (0.0 <= r["pmf"] <= 1.0):
            raise SchemaError(f"{path}: pmf value {r['pmf']} outside [0, 1]")
        if r["mc_sigma"] < 0:
            raise SchemaError(f"{path}: negative mc_sigma {r['mc_sigma']}")
    for rho, rows in t.groups("rho").items():
        total = sum(r["pmf"] for r in rows)
        slack = 3.0 * math.sqrt(sum(r["mc_sigma"] ** 2 for r in rows)) + 1e-12
        if total > 1.0 + slack:
            raise SchemaError(
                f"{path}: pmf for rho={rho:g} sums to {total:.6f} > 1"
            )


def _check_fig2(t: Table, path: str) -> None:
    for k, rows in t.groups("k").items():
        cdf = [r["cdf"] for r in rows]
        if any(not (0.0 <= v <= 1.0) for v in cdf):
            raise SchemaError(f"{path}: cdf values for k={k:g} outside [0, 1]")
        if any(b < a for a, b in zip(cdf, cdf[1:])):
            raise SchemaError(f"{path}: cdf for k={k:g} is not nondecreasing")
        xs = [r["x"] for r in rows]
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise SchemaError(f"{path}: x grid for k={k:g} is not increasing")


def _check_fig3(t: Table, path: str) -> None:
    zs = t.column("z")
    fs = t.column("f")
    if any(b <= a for a, b in zip(zs, zs[1:])):
        raise SchemaError(f"{path}: z grid is not increasing")
    if any(b < a for a, b in zip(fs, fs[1:])):
        raise SchemaError(f"{path}: f column is not monotone nondecreasing")


_SANITY = {1: _check_fig1, 2: _check_fig2, 3: _check_fig3}
