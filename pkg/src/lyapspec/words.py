"""Words over {1..k} and products of one-step cocycle generators.

A word I = (i_0, ..., i_{n-1}) names the cylinder of sequences starting
with those symbols; the cocycle product along it is
A_I = A_{i_{n-1}} @ ... @ A_{i_0} (the last symbol acts last, hence sits
leftmost).
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .matrices import ScaledMatrix, exterior_power, scaled_multiply

Word = tuple[int, ...]

DEFAULT_BUDGET = 1 << 26
_SINGULAR_REL_TOL = 1e-12


class BudgetError(RuntimeError):
    """An enumeration would visit more leaves than the budget allows."""

    def __init__(self, message: str, *, leaves: int, budget: int):
        super().__init__(message)
        self.leaves = leaves
        self.budget = budget


def default_budget() -> int:
    """Leaf budget for exhaustive enumeration; COCYCLE_BUDGET overrides."""
    raw = os.environ.get("COCYCLE_BUDGET")
    if raw is None or raw.strip() == "":
        return DEFAULT_BUDGET
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"COCYCLE_BUDGET must be an integer, got {raw!r}") from None
    if value <= 0:
        raise ValueError(f"COCYCLE_BUDGET must be positive, got {value}")
    return value


@dataclass(eq=False)
class OneStepCocycle:
    """Generators (A_1, ..., A_k) of invertible d x d matrices.

    Attributes:
        generators: array of shape (k, d, d); generators[i] is A_{i+1}.
        max_log_norm: max_i log ||A_i||_2, cached at construction.
        max_log_inv_norm: max_i log ||A_i^{-1}||_2, cached at construction.
    """

    generators: np.ndarray
    max_log_norm: float = field(init=False)
    max_log_inv_norm: float = field(init=False)

    def __post_init__(self):
        G = np.array(self.generators, dtype=float)
        if G.ndim != 3 or G.shape[1] != G.shape[2]:
            raise ValueError("generators must be a stack of square matrices")
        if G.shape[0] < 1:
            raise ValueError("need at least one generator")
        if not np.all(np.isfinite(G)):
            raise ValueError("generators contain non-finite entries")
        d = G.shape[1]
        for i, A in enumerate(G):
            norm = np.linalg.norm(A, ord=2)
            if abs(np.linalg.det(A)) <= _SINGULAR_REL_TOL * norm**d:
                raise ValueError(f"generator {i + 1} is singular")
        self.generators = G
        norms = [np.linalg.norm(A, ord=2) for A in G]
        inv_norms = [np.linalg.norm(np.linalg.inv(A), ord=2) for A in G]
        self.max_log_norm = float(np.log(max(norms)))
        self.max_log_inv_norm = float(np.log(max(inv_norms)))
        self._compounds: dict[int, np.ndarray] = {1: G}

    @property
    def k(self) -> int:
        return self.generators.shape[0]

    @property
    def d(self) -> int:
        return self.generators.shape[1]

    def compound_generators(self, m: int) -> np.ndarray:
        """Stack of m-th exterior powers of the generators, cached."""
        if m not in self._compounds:
            self._compounds[m] = np.stack(
                [exterior_power(A, m) for A in self.generators]
            )
        return self._compounds[m]


def _check_word(C: OneStepCocycle, word: Iterable[int]) -> Word:
    w = tuple(int(s) for s in word)
    for s in w:
        if not 1 <= s <= C.k:
            raise ValueError(f"symbol {s} outside alphabet 1..{C.k}")
    return w


def word_product(C: OneStepCocycle, word: Sequence[int]) -> ScaledMatrix:
    """Cocycle product A_I along the word, as a ScaledMatrix.

    The empty word gives the identity.
    """
    w = _check_word(C, word)
    S = ScaledMatrix.identity(C.d)
    for s in w:
        S = scaled_multiply(ScaledMatrix.from_matrix(C.generators[s - 1]), S)
    return S


def enumerate_products(
    C: OneStepCocycle,
    n: int,
    visit: Callable[[Word, ScaledMatrix], None],
    *,
    budget: int | None = None,
) -> None:
    """Visit (word, A_word) for every word of length n in lexicographic order.

    Products are built once per tree node (depth-first, prefix products
    reused down the stack), so the total work is O(k^n) multiplications.

    Raises:
        BudgetError: when k^n exceeds the leaf budget.
    """
    if n < 0:
        raise ValueError("word length must be nonnegative")
    limit = default_budget() if budget is None else budget
    leaves = C.k**n
    if leaves > limit:
        raise BudgetError(
            f"enumeration of k^n = {leaves} words exceeds budget {limit}",
            leaves=leaves,
            budget=limit,
        )
    gens = [ScaledMatrix.from_matrix(A) for A in C.generators]
    word: list[int] = []

    def rec(S: ScaledMatrix) -> None:
        if len(word) == n:
            visit(tuple(word), S)
            return
        for s in range(1, C.k + 1):
            word.append(s)
            rec(scaled_multiply(gens[s - 1], S))
            word.pop()

    rec(ScaledMatrix.identity(C.d))
