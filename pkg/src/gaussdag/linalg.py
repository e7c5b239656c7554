"""Dense symmetric positive-definite matrix helpers.

Matrices are plain 2-D ``numpy`` arrays. Functions that take a symmetric
matrix validate it through :func:`as_symmetric`, which returns an exactly
symmetric float copy. Index sets are tuples of strictly increasing ints.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable

import numpy as np
import scipy.linalg as sla

from .errors import DimensionMismatch, EmptySubset, NotPositiveDefinite, ParseError

PD_RTOL = 1e-12
SYMMETRY_TOL = 1e-9


def as_symmetric(M, tol: float = SYMMETRY_TOL) -> np.ndarray:
    """Return ``M`` as an exactly symmetric float array.

    Entries may differ from their transpose by at most ``tol`` relative to
    the largest absolute entry; the result is the average of ``M`` and
    ``M.T``.
    """
    A = np.array(M, dtype=float, copy=True)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise DimensionMismatch(f"expected a non-empty square matrix, got shape {A.shape}")
    scale = max(1.0, float(np.max(np.abs(A))))
    if np.max(np.abs(A - A.T)) > tol * scale:
        raise DimensionMismatch("matrix is not symmetric")
    return 0.5 * (A + A.T)


def index_set(members: Iterable[int], n: int | None = None) -> tuple[int, ...]:
    """Canonical (sorted, duplicate-free) index tuple, range-checked against ``n``."""
    out = tuple(sorted(int(i) for i in members))
    if len(set(out)) != len(out):
        raise ValueError(f"duplicate indices in {out}")
    if n is not None and out and (out[0] < 0 or out[-1] >= n):
        raise IndexError(f"indices {out} out of range for order {n}")
    return out


def complement(block: Iterable[int], n: int) -> tuple[int, ...]:
    block = set(block)
    return tuple(i for i in range(n) if i not in block)


def _factor(A: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor of an already-symmetric array."""
    tol = PD_RTOL * max(float(np.max(np.diag(A))), 0.0)
    try:
        L = np.linalg.cholesky(A)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite("matrix is not positive definite") from exc
    pivots = np.diag(L) ** 2
    if np.any(pivots <= tol) or not np.all(np.isfinite(L)):
        raise NotPositiveDefinite(
            f"matrix is numerically singular (smallest pivot {pivots.min():.3g})"
        )
    return L


def cholesky_logdet(M) -> tuple[np.ndarray, float]:
    """Lower Cholesky factor and log-determinant of a symmetric PD matrix.

    Raises
    ------
    NotPositiveDefinite
        If a pivot is not above ``1e-12`` times the largest diagonal entry.
    """
    L = _factor(as_symmetric(M))
    return L, 2.0 * float(np.sum(np.log(np.diag(L))))


def logdet(M) -> float:
    return cholesky_logdet(M)[1]


def is_positive_definite(M) -> bool:
    try:
        cholesky_logdet(M)
    except NotPositiveDefinite:
        return False
    return True


def solve_spd(M, B) -> np.ndarray:
    """Solve ``M X = B`` for symmetric PD ``M`` by Cholesky and triangular solves."""
    L = _factor(as_symmetric(M))
    return sla.cho_solve((L, True), np.asarray(B, dtype=float))


def inv_spd(M) -> np.ndarray:
    A = as_symmetric(M)
    X = solve_spd(A, np.eye(A.shape[0]))
    return 0.5 * (X + X.T)


def _blocks(M, block1) -> tuple[np.ndarray, tuple[int, ...], tuple[int, ...]]:
    A = as_symmetric(M)
    n = A.shape[0]
    b1 = index_set(block1, n)
    if not b1:
        raise EmptySubset("block1 must be non-empty")
    return A, b1, complement(b1, n)


def schur_complement(M, block1) -> np.ndarray:
    """``M_11 - M_12 M_22^{-1} M_21`` where block 2 is the sorted complement of ``block1``.

    ``block1`` may cover every index, in which case ``M`` itself is returned.
    """
    A, b1, b2 = _blocks(M, block1)
    M11 = A[np.ix_(b1, b1)]
    if not b2:
        return M11.copy()
    M12 = A[np.ix_(b1, b2)]
    M22 = A[np.ix_(b2, b2)]
    S = M11 - M12 @ solve_spd(M22, M12.T)
    return 0.5 * (S + S.T)


def submatrix_inverse_marginal(M, Y) -> np.ndarray:
    """``((M^{-1})_YY)^{-1}``, computed by explicit inversion of ``M`` and of the block.

    Mathematically equal to :func:`schur_complement` but evaluated along an
    independent route, which the tests exploit.
    """
    A, y, rest = _blocks(M, Y)
    if not rest:
        return A
    Minv = inv_spd(A)
    return inv_spd(Minv[np.ix_(y, y)])


def read_matrix_csv(path) -> np.ndarray:
    """Read a headerless CSV of ``n`` rows by ``n`` decimal columns as a symmetric matrix."""
    rows = []
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        row = []
        for col, cell in enumerate(line.split(","), start=1):
            try:
                row.append(float(cell))
            except ValueError:
                raise ParseError(f"not a number: {cell.strip()!r}", lineno, col) from None
        rows.append(row)
    if not rows or any(len(r) != len(rows) for r in rows):
        raise ParseError(f"{path}: expected a square matrix")
    try:
        return as_symmetric(rows)
    except DimensionMismatch as exc:
        raise ParseError(f"{path}: {exc}") from None
