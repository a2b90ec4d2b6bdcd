"""Plain-text matrix exchange.

One header line ``# dim=<d> basis=<lattice|grid> L=<L>`` followed by one
``i j re im`` line per entry in row-major order. ``L`` is the half width
for lattice matrices and the total length for grid matrices.
"""
from __future__ import annotations

import io
import re
from pathlib import Path

import numpy as np

_HEADER = re.compile(r"#\s*dim=(\d+)\s+basis=(lattice|grid)\s+L=(\S+)")


def format_matrix(matrix, basis: str = "lattice", extent=None) -> str:
    m = np.asarray(matrix, dtype=complex)
    d = m.shape[0]
    if m.shape != (d, d):
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if basis not in ("lattice", "grid"):
        raise ValueError(f"unknown basis {basis!r}")
    if extent is None:
        extent = (d - 1) // 2
    out = io.StringIO()
    out.write(f"# dim={d} basis={basis} L={extent}\n")
    for i in range(d):
        for j in range(d):
            z = m[i, j]
            out.write(f"{i} {j} {z.real:.17g} {z.imag:.17g}\n")
    return out.getvalue()


def parse_matrix(text: str) -> tuple[np.ndarray, dict]:
    """Inverse of :func:`format_matrix`; returns the matrix and the header fields."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty matrix file")
    match = _HEADER.match(lines[0].strip())
    if match is None:
        raise ValueError(f"bad matrix header: {lines[0]!r}")
    d = int(match.group(1))
    extent = match.group(3)
    header = {
        "dim": d,
        "basis": match.group(2),
        "L": int(extent) if extent.lstrip("-").isdigit() else float(extent),
    }
    m = np.zeros((d, d), dtype=complex)
    seen = np.zeros((d, d), dtype=bool)
    for ln in lines[1:]:
        if ln.lstrip().startswith("#"):
            continue
        parts = ln.split()
        if len(parts) != 4:
            raise ValueError(f"bad matrix entry line: {ln!r}")
        i, j = int(parts[0]), int(parts[1])
        if not (0 <= i < d and 0 <= j < d):
            raise ValueError(f"entry ({i}, {j}) outside a {d}x{d} matrix")
        m[i, j] = complex(float(parts[2]), float(parts[3]))
        seen[i, j] = True
    if not seen.all():
        raise ValueError(f"matrix file is missing {int((~seen).sum())} entries")
    return m, header


def write_matrix(path, matrix, basis: str = "lattice", extent=None) -> None:
    Path(path).write_text(format_matrix(matrix, basis, extent))


def read_matrix(path) -> tuple[np.ndarray, dict]:
    return parse_matrix(Path(path).read_text())
