"""Small shared helpers for row-wise norms and cosines.

All arithmetic is float64. Cosines are computed as
dot(a, b) / sqrt(dot(a, a) * dot(b, b)) so that the cosine of a row
with itself is exactly 1.0 (IEEE sqrt(x*x) == |x|), which the loss
anchors rely on.
"""

from __future__ import annotations

import numpy as np

from .errors import ZeroNormRowError

# Rows whose norm is already this close to 1 are left untouched by
# normalize_rows, making load -> save -> load byte-stable.
UNIT_SNAP_TOL = 1e-7


def row_norms(a: np.ndarray) -> np.ndarray:
    """Euclidean norm of each row of a 2-D array."""
    return np.sqrt(np.einsum("ij,ij->i", a, a))


def normalize_rows(a: np.ndarray, snap_tol: float = UNIT_SNAP_TOL) -> np.ndarray:
    """Return a copy of `a` with unit-norm rows.

    Rows whose norm is within `snap_tol` of 1 are copied verbatim, so
    normalizing already-normalized data is an exact fixed point. A
    zero-norm row raises ZeroNormRowError naming the row.
    """
    a = np.asarray(a, dtype=np.float64)
    norms = row_norms(a)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise ZeroNormRowError(f"row {zero[0]} has zero norm and cannot be normalized")
    out = a.copy()
    off = np.abs(norms - 1.0) > snap_tol
    if np.any(off):
        out[off] = a[off] / norms[off, None]
    return out


def row_cosines(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Cosine similarity of corresponding rows of two equal-shape arrays."""
    dots = np.einsum("ij,ij->i", a, b)
    qa = np.einsum("ij,ij->i", a, a)
    qb = np.einsum("ij,ij->i", b, b)
    return dots / np.sqrt(qa * qb)
