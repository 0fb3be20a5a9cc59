"""Readers for the simulator's delimited exports.

CSV files carry a `# key=value` metadata block, then a header row, then data
rows; density matrices are a dimension header followed by row-major `re im`
pairs.  Schema problems raise SchemaError before any figure is touched.
"""

from __future__ import annotations

import csv
import io
import math

import numpy as np


class SchemaError(ValueError):
    """Input file does not match the expected column schema."""


def read_csv(path, required_columns):
    """Parse metadata, header, and rows; verify the required columns exist."""
    metadata = {}
    with open(path, newline="") as fh:
        lines = []
        for line in fh:
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, value = body.split("=", 1)
                    metadata[key.strip()] = value.strip()
            else:
                lines.append(line)
    reader = csv.reader(io.StringIO("".join(lines)))
    try:
        header = next(reader)
    except StopIteration:
        raise SchemaError(f"{path}: no header row")
    missing = [col for col in required_columns if col not in header]
    if missing:
        raise SchemaError(
            f"{path}: missing columns {missing}; found {header}"
        )
    idx = {col: header.index(col) for col in header}
    rows = []
    for raw in reader:
        if not raw:
            continue
        rows.append({col: raw[k] for col, k in idx.items()})
    return metadata, rows


def parse_float(value: str) -> float:
    return math.nan if value == "" else float(value)


def read_fidelity_rows(path):
    """Rows of the fidelity/photon scans as (gamma -> sorted [(r, F, F_std)])."""
    _, rows = read_csv(path, ["state", "n", "r", "gamma", "F", "F_std"])
    curves = {}
    for row in rows:
        gamma = float(row["gamma"])
        f = parse_float(row["F"])
        if math.isnan(f):
            continue
        curves.setdefault(gamma, []).append(
            (float(row["r"]), f, parse_float(row["F_std"])))
    if not curves:
        raise SchemaError(f"{path}: no rows with a fidelity value")
    return {g: sorted(pts) for g, pts in curves.items()}


def read_mermin_rows(path):
    """Mermin scan rows plus the (constant) classical/quantum bounds."""
    _, rows = read_csv(path, ["n", "r", "gamma", "M",
                              "classical_bound", "quantum_bound"])
    curves = {}
    bounds = None
    for row in rows:
        gamma = float(row["gamma"])
        m = parse_float(row["M"])
        bounds = (float(row["classical_bound"]), float(row["quantum_bound"]))
        if math.isnan(m):
            continue
        curves.setdefault(gamma, []).append((float(row["r"]), m))
    if bounds is None:
        raise SchemaError(f"{path}: no data rows")
    return {g: sorted(pts) for g, pts in curves.items()}, bounds


def read_density_matrix(path) -> np.ndarray:
    with open(path) as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    try:
        dim = int(lines[0])
    except (IndexError, ValueError):
        raise SchemaError(f"{path}: expected a dimension header line")
    if len(lines) < dim + 1:
        raise SchemaError(f"{path}: expected {dim} matrix rows, got {len(lines) - 1}")
    rho = np.zeros((dim, dim), dtype=complex)
    for i in range(dim):
        parts = lines[1 + i].split()
        if len(parts) != 2 * dim:
            raise SchemaError(
                f"{path}: row {i} has {len(parts)} fields, expected {2 * dim}")
        values = [float(x) for x in parts]
        rho[i] = [complex(values[2 * j], values[2 * j + 1]) for j in range(dim)]
    return rho


__all__ = ["SchemaError", "read_csv", "read_fidelity_rows", "read_mermin_rows",
           "read_density_matrix", "parse_float"]
