"""Scaled matrix arithmetic and generalized singular-value functions.

Everything here works in log space with natural logarithms. Long products
are represented as a well-conditioned base matrix times exp(log_scale) so
that chains of thousands of factors neither overflow nor underflow.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np


class NumericError(ArithmeticError):
    """A quantity left the range representable by the scaled format."""


_WINDOW_LO = 0.5
_WINDOW_HI = 2.0


def _row_sum_norm(M: np.ndarray) -> float:
    # max absolute row sum; exactly 1 on permutation matrices
    return float(np.abs(M).sum(axis=1).max())


@dataclass(frozen=True)
class ScaledMatrix:
    """A square matrix stored as ``base * exp(log_scale)``.

    The base is kept with max-row-sum norm inside [1/2, 2]; log_scale
    absorbs the magnitude. Construct via :meth:`from_matrix`,
    :meth:`identity`, or :func:`scaled_multiply` to keep that window.
    """

    base: np.ndarray
    log_scale: float = 0.0

    @staticmethod
    def identity(d: int) -> "ScaledMatrix":
        return ScaledMatrix(np.eye(d), 0.0)

    @staticmethod
    def from_matrix(M) -> "ScaledMatrix":
        M = np.array(M, dtype=float)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ValueError("expected a square matrix")
        return _renormalized(M, 0.0)

    @property
    def d(self) -> int:
        return self.base.shape[0]

    def matrix(self) -> np.ndarray:
        """Dense value ``base * exp(log_scale)``; may overflow for huge scales."""
        return self.base * np.exp(self.log_scale)


def _renormalized(base: np.ndarray, log_scale: float) -> ScaledMatrix:
    r = _row_sum_norm(base)
    if r == 0.0 or not np.isfinite(r):
        raise NumericError("matrix norm outside float range")
    if not (_WINDOW_LO <= r <= _WINDOW_HI):
        base = base / r
        log_scale = log_scale + np.log(r)
    if not np.isfinite(log_scale):
        raise NumericError("log scale overflow")
    return ScaledMatrix(base, float(log_scale))


def scaled_multiply(A: ScaledMatrix, B: ScaledMatrix) -> ScaledMatrix:
    """Product A @ B with the base renormalized back into the norm window."""
    if A.d != B.d:
        raise ValueError(f"dimension mismatch: {A.d} vs {B.d}")
    return _renormalized(A.base @ B.base, A.log_scale + B.log_scale)


def singular_values(M) -> np.ndarray:
    """Log singular values of M, sorted nonincreasing.

    Args:
        M: square matrix (array-like).

    Returns:
        Array of log sigma_1 >= ... >= log sigma_d. A singular matrix
        yields -inf in the trailing entries.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("expected a square matrix")
    s = np.linalg.svd(M, compute_uv=False)
    with np.errstate(divide="ignore"):
        return np.log(s)


def scaled_singular_values(S: ScaledMatrix) -> np.ndarray:
    """Log singular values of a scaled matrix: SVD of the base plus log_scale."""
    return singular_values(S.base) + S.log_scale


def exterior_power(M, m: int) -> np.ndarray:
    """m-th exterior power (compound matrix) of M.

    Entry (R, C) is the m x m minor of M with rows R and columns C, both
    index sets enumerated in lexicographic order, so the result satisfies
    exterior_power(M @ N, m) = exterior_power(M, m) @ exterior_power(N, m).

    Args:
        M: square matrix (array-like).
        m: exterior degree, 1 <= m <= d.
    """
    M = np.asarray(M, dtype=float)
    d = M.shape[0]
    if M.ndim != 2 or M.shape[1] != d:
        raise ValueError("expected a square matrix")
    if not 1 <= m <= d:
        raise ValueError(f"exterior degree must be in 1..{d}, got {m}")
    if m == 1:
        return M.copy()
    subsets = list(combinations(range(d), m))
    out = np.empty((len(subsets), len(subsets)))
    for i, rows in enumerate(subsets):
        block = M[np.ix_(rows, range(d))]
        for j, cols in enumerate(subsets):
            out[i, j] = np.linalg.det(block[:, cols])
    return out


def log_psi(M, q) -> float:
    """Log of the generalized singular value function, sum_i q_i log sigma_i(M).

    Entries of q with q_i = 0 contribute nothing even when sigma_i = 0.
    Raises ValueError when a negative exponent meets a vanishing singular
    value (the quantity is +inf, outside the function's range).
    """
    q = np.asarray(q, dtype=float)
    s = singular_values(M)
    if q.shape != s.shape:
        raise ValueError(f"q has length {q.size}, matrix dimension is {s.size}")
    active = q != 0.0
    if np.any(np.isneginf(s[active]) & (q[active] < 0)):
        raise ValueError("singular matrix with a negative exponent")
    return float(np.dot(q[active], s[active]))
