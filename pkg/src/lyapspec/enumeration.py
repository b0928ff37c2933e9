"""Block-vectorized enumeration of cocycle products over all words.

The word tree of depth n is split into k^{n0} prefix blocks; inside a
block every suffix is expanded level by level with one batched
matrix-multiply per level, and singular values are read off in a single
batched SVD per block. Work is identical for any worker count, so a run
is reproducible; only the order in which block partials are merged can
differ (see ``map_reduce``).

Per-leaf log singular values are not taken from one SVD of the full
product: a dense SVD loses absolute accuracy eps * kappa in the small
singular values once the product is badly conditioned. Instead every
exterior-power level of the cocycle is accumulated alongside the
original (each level renormalized independently), the top singular value
of each level gives log||wedge^m A_I|| = log sigma_1 + ... + log sigma_m
to near machine precision, and differences recover each log sigma_m.
The top level m = d is carried as an exact running sum of log|det|, so
the sum rule sum_m log sigma_m = log|det A_I| holds by construction.
"""

from __future__ import annotations

from concurrent.futures import FIRST_COMPLETED, ThreadPoolExecutor, wait
from dataclasses import dataclass
from functools import lru_cache
from itertools import product as iter_product
from typing import Callable, TypeVar

import numpy as np

from .matrices import NumericError
from .words import BudgetError, OneStepCocycle, Word, default_budget

CHUNK_TARGET = 1 << 14
TABLE_MAX_LEAVES = 1 << 21

T = TypeVar("T")


@dataclass(frozen=True)
class LeafBlock:
    """One prefix block of leaves, in lexicographic suffix order.

    Attributes:
        prefix: the shared word prefix (1-based symbols).
        log_sigma: (K, d) log singular values of A_word per leaf.
        suffixes0: (K, j) 0-based suffix symbols, shared and read-only.
    """

    prefix: Word
    log_sigma: np.ndarray
    suffixes0: np.ndarray

    def words0(self) -> np.ndarray:
        """(K, n) full 0-based symbol array for the block's words."""
        K, j = self.suffixes0.shape
        n0 = len(self.prefix)
        out = np.empty((K, n0 + j), dtype=np.int16)
        out[:, :n0] = np.asarray(self.prefix, dtype=np.int16) - 1
        out[:, n0:] = self.suffixes0
        return out


def split_depth(k: int, n: int) -> int:
    """Prefix length n0: suffix blocks hold at most CHUNK_TARGET leaves,
    and there are at least k^min(n,3) blocks to keep workers busy."""
    j = 0
    while j < n and k ** (j + 1) <= CHUNK_TARGET:
        j += 1
    return max(n - j, min(n, 3))


@lru_cache(maxsize=32)
def suffix_symbols(k: int, j: int) -> np.ndarray:
    """(k^j, j) array of 0-based suffix words in lexicographic order."""
    idx = np.arange(k**j)
    cols = [(idx // k ** (j - 1 - pos)) % k for pos in range(j)]
    arr = (
        np.stack(cols, axis=1).astype(np.int16)
        if j > 0
        else np.zeros((1, 0), dtype=np.int16)
    )
    arr.flags.writeable = False
    return arr


def _block_log_sigma(C: OneStepCocycle, prefix: Word, j: int) -> np.ndarray:
    """Log singular values for every leaf under one prefix, lex order."""
    d, k = C.d, C.k
    pref0 = [s - 1 for s in prefix]
    log_dets = np.log(np.abs(np.linalg.det(C.generators)))
    K = k**j
    tops = np.empty((K, d))

    # levels 1..d-1 are matrix channels; level d is the exact det channel
    for m in range(1, d):
        G = C.compound_generators(m)
        base = np.eye(G.shape[1])
        ls = 0.0
        for s in pref0:
            base = G[s] @ base
            r = np.abs(base).sum(axis=1).max()
            base /= r
            ls += np.log(r)
        B = base[None, :, :]
        scale = np.array([ls])
        for _ in range(j):
            P = np.matmul(G[:, None, :, :], B[None, :, :, :])
            B = np.swapaxes(P, 0, 1).reshape(-1, G.shape[1], G.shape[2])
            scale = np.repeat(scale, k)
            r = np.abs(B).sum(axis=2).max(axis=1)
            B = B / r[:, None, None]
            scale = scale + np.log(r)
        svals = np.linalg.svd(B, compute_uv=False)
        tops[:, m - 1] = np.log(svals[:, 0]) + scale

    det_prefix = float(log_dets[pref0].sum()) if pref0 else 0.0
    if j > 0:
        tops[:, d - 1] = det_prefix + log_dets[suffix_symbols(k, j)].sum(axis=1)
    else:
        tops[:, d - 1] = det_prefix

    if not np.all(np.isfinite(tops)):
        raise NumericError("log scale overflow during enumeration")

    out = np.empty_like(tops)
    out[:, 0] = tops[:, 0]
    if d > 1:
        out[:, 1:] = np.diff(tops, axis=1)
        # mathematically nonincreasing; sorting only removes eps-level jitter
        out = np.sort(out, axis=1)[:, ::-1]
    return np.ascontiguousarray(out)


def map_reduce(
    C: OneStepCocycle,
    n: int,
    block_fn: Callable[[LeafBlock], T],
    merge_fn: Callable[[T, T], T],
    *,
    workers: int = 1,
    deterministic: bool = False,
    budget: int | None = None,
) -> T:
    """Fold block_fn over all leaf blocks of depth n.

    With ``deterministic`` (or a single worker) partials merge in
    lexicographic block order, so results are bit-identical for any
    worker count. Otherwise partials merge as blocks complete, which can
    reorder floating-point sums at the 1e-16 level.

    Raises:
        BudgetError: when k^n exceeds the leaf budget.
    """
    if n < 0:
        raise ValueError("depth must be nonnegative")
    limit = default_budget() if budget is None else budget
    leaves = C.k**n
    if leaves > limit:
        raise BudgetError(
            f"enumeration of k^n = {leaves} words exceeds budget {limit}",
            leaves=leaves,
            budget=limit,
        )
    n0 = split_depth(C.k, n)
    j = n - n0
    suffixes = suffix_symbols(C.k, j)
    prefixes = list(iter_product(range(1, C.k + 1), repeat=n0))

    def job(prefix: Word) -> T:
        return block_fn(LeafBlock(prefix, _block_log_sigma(C, prefix, j), suffixes))

    if workers <= 1:
        parts = (job(p) for p in prefixes)
        acc = None
        first = True
        for part in parts:
            acc = part if first else merge_fn(acc, part)
            first = False
        return acc

    with ThreadPoolExecutor(max_workers=workers) as ex:
        if deterministic:
            acc = None
            first = True
            for part in ex.map(job, prefixes):
                acc = part if first else merge_fn(acc, part)
                first = False
            return acc
        pending = {ex.submit(job, p) for p in prefixes}
        acc = None
        first = True
        while pending:
            done, pending = wait(pending, return_when=FIRST_COMPLETED)
            for fut in done:
                part = fut.result()
                acc = part if first else merge_fn(acc, part)
                first = False
        return acc


def leaf_table(
    C: OneStepCocycle,
    n: int,
    *,
    with_words: bool = False,
    workers: int = 1,
    budget: int | None = None,
    max_leaves: int = TABLE_MAX_LEAVES,
) -> tuple[np.ndarray, np.ndarray | None]:
    """Materialized (k^n, d) log-sigma table in lexicographic word order.

    Optionally also the (k^n, n) 0-based word array. Content does not
    depend on the worker count. Raises BudgetError when k^n exceeds
    either the enumeration budget or ``max_leaves``.
    """
    leaves = C.k**n
    if leaves > max_leaves:
        raise BudgetError(
            f"table of k^n = {leaves} leaves exceeds materialization cap {max_leaves}",
            leaves=leaves,
            budget=max_leaves,
        )

    def block_fn(b: LeafBlock):
        return [(b.prefix, b.log_sigma, b.words0() if with_words else None)]

    parts = map_reduce(
        C, n, block_fn, lambda a, b: a + b,
        workers=workers, deterministic=True, budget=budget,
    )
    parts.sort(key=lambda t: t[0])
    logsig = np.vstack([p[1] for p in parts])
    words0 = np.vstack([p[2] for p in parts]) if with_words else None
    return logsig, words0
