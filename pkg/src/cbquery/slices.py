"""Slice matrices of multilinear cubic forms and the quantity Delta(f).

For a cubic form f = sum c_{ijk} x_i x_j x_k the i-th slice is the symmetric
n x n matrix whose (j, k) entry is c_{{i,j,k}} when i, j, k are pairwise
distinct and 0 otherwise.  Delta(f) is the largest operator norm among the
slices.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .boolean_poly import MultilinearPoly, subset_of

MAX_SLICE_DIM = 4096


class NotCubicError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SliceMatrix:
    i: int
    M: np.ndarray

    def to_json(self) -> dict:
        return {"i": self.i, "M": self.M.tolist()}


def require_cubic(f: MultilinearPoly) -> None:
    for mask in f.coeffs:
        if mask.bit_count() != 3:
            raise NotCubicError(
                f"not a multilinear cubic form: monomial {subset_of(mask)} has degree {mask.bit_count()}"
            )
    if f.n > MAX_SLICE_DIM:
        raise ValueError(f"dense slices are capped at {MAX_SLICE_DIM} rows, got n={f.n}")


def _slices_dense(f: MultilinearPoly) -> list[np.ndarray]:
    n = f.n
    out = [np.zeros((n, n)) for _ in range(n)]
    for mask, c in f.coeffs.items():
        i, j, k = (v - 1 for v in subset_of(mask))
        for a, b, d in ((i, j, k), (j, i, k), (k, i, j)):
            out[a][b, d] = c
            out[a][d, b] = c
    for m in out:
        m.flags.writeable = False
    return out


def slice_matrix(f: MultilinearPoly, i: int) -> SliceMatrix:
    """The i-th slice M_i of the cubic form ``f`` (1-based ``i``)."""
    require_cubic(f)
    if not 1 <= i <= f.n:
        raise ValueError(f"slice index {i} outside 1..{f.n}")
    M = np.zeros((f.n, f.n))
    bit = 1 << (i - 1)
    for mask, c in f.coeffs.items():
        if mask & bit:
            j, k = (v - 1 for v in subset_of(mask ^ bit))
            M[j, k] = M[k, j] = c
    M.flags.writeable = False
    return SliceMatrix(i, M)


def all_slices(f: MultilinearPoly) -> list[SliceMatrix]:
    require_cubic(f)
    return [SliceMatrix(i + 1, m) for i, m in enumerate(_slices_dense(f))]


def operator_norm(M: np.ndarray) -> float:
    """Spectral norm of a symmetric matrix: the largest |eigenvalue|.

    Uses LAPACK's symmetric tridiagonal eigensolver, which is deterministic
    for a fixed input.
    """
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    if not np.array_equal(M, M.T):
        raise ValueError("operator_norm expects a symmetric matrix")
    if M.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvalsh(M))))


def delta(f: MultilinearPoly) -> float:
    """Delta(f) = max_i ||M_i||."""
    require_cubic(f)
    if f.is_zero():
        return 0.0
    return max(operator_norm(m) for m in _slices_dense(f))
