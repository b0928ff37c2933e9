"""Finite-depth generalized singular-value pressure.

P_n(q) = (1/n) log sum over words of length n of psi^q(A_word), where
log psi^q = sum_i q_i log sigma_i. The gradient is the Gibbs-weighted
average of the per-word vectors (1/n) log sigma, so its components are
automatically nonincreasing and sum to (1/n) E[log|det A_word|].
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .enumeration import LeafBlock, map_reduce
from .words import OneStepCocycle


@dataclass(frozen=True)
class PressureEstimate:
    """Depth-n pressure value with Gibbs gradient and optional brackets.

    upper_bound / lower_bound are one-sided bounds on the depth limit,
    available when the exponent vector is monotone (see
    :func:`pressure_bracket`); cauchy_gap is |P_a - P_b| for the two
    deepest levels evaluated.
    """

    q: np.ndarray
    n: int
    value: float
    gradient: np.ndarray
    upper_bound: float | None = None
    lower_bound: float | None = None
    cauchy_gap: float | None = None


def _check_q(C: OneStepCocycle, q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if q.shape != (C.d,):
        raise ValueError(f"q must have length d = {C.d}, got shape {q.shape}")
    if not np.all(np.isfinite(q)):
        raise ValueError("q contains non-finite entries")
    return q


def _grid_partial(block: LeafBlock, Q: np.ndarray):
    X = block.log_sigma @ Q.T  # (K, nq)
    m = X.max(axis=0)
    W = np.exp(X - m)
    return m, W.sum(axis=0), W.T @ block.log_sigma


def _grid_merge(a, b):
    m = np.maximum(a[0], b[0])
    ea, eb = np.exp(a[0] - m), np.exp(b[0] - m)
    return m, a[1] * ea + b[1] * eb, a[2] * ea[:, None] + b[2] * eb[:, None]


def pressure_grid(
    C: OneStepCocycle,
    qs: Sequence[Sequence[float]],
    n: int,
    *,
    workers: int = 1,
    deterministic: bool = False,
    budget: int | None = None,
) -> list[PressureEstimate]:
    """Pressure estimates for many exponent vectors from one enumeration pass."""
    Q = np.atleast_2d(np.asarray(qs, dtype=float))
    if Q.ndim != 2 or Q.shape[1] != C.d:
        raise ValueError(f"qs must have shape (m, {C.d})")
    if not np.all(np.isfinite(Q)):
        raise ValueError("qs contains non-finite entries")
    if n < 1:
        raise ValueError("depth must be at least 1")
    m, S, V = map_reduce(
        C, n,
        lambda b: _grid_partial(b, Q),
        _grid_merge,
        workers=workers, deterministic=deterministic, budget=budget,
    )
    values = (m + np.log(S)) / n
    grads = V / (S[:, None] * n)
    return [
        PressureEstimate(q=Q[i].copy(), n=n, value=float(values[i]), gradient=grads[i])
        for i in range(Q.shape[0])
    ]


def pressure(
    C: OneStepCocycle,
    q,
    n: int,
    *,
    workers: int = 1,
    deterministic: bool = False,
    budget: int | None = None,
) -> PressureEstimate:
    """Depth-n pressure P_n(q) with its Gibbs gradient.

    Args:
        C: the cocycle.
        q: exponent vector of length d.
        n: word length, at least 1.
        workers: thread count for block expansion.
        deterministic: merge block partials in a fixed order so repeated
            runs are bit-identical for any worker count.
        budget: leaf budget override (default: COCYCLE_BUDGET or 2^26).
    """
    q = _check_q(C, q)
    return pressure_grid(
        C, q[None, :], n,
        workers=workers, deterministic=deterministic, budget=budget,
    )[0]


def table_pressure(log_sigma: np.ndarray, q, n: int) -> tuple[float, np.ndarray]:
    """(value, gradient) of P_n(q) from a materialized leaf table."""
    x = log_sigma @ np.asarray(q, dtype=float)
    m = float(x.max())
    w = np.exp(x - m)
    S = w.sum()
    value = (m + np.log(S)) / n
    grad = (w @ log_sigma) / (S * n)
    return float(value), grad


def pressure_bracket(
    C: OneStepCocycle,
    q,
    depths: Sequence[int],
    *,
    workers: int = 1,
    deterministic: bool = False,
    budget: int | None = None,
) -> PressureEstimate:
    """Pressure at the deepest level with monotonicity brackets.

    The step vector t_m = q_m - q_{m+1} (m < d) decides which side is
    certified: t >= 0 makes psi^q submultiplicative, so every P_n is an
    upper bound for the limit and the minimum over depths is reported;
    t <= 0 gives lower bounds symmetrically. When every t_m is zero
    (d = 1 included) psi^q is exactly multiplicative and P_n equals the
    limit at every depth, so both brackets collapse onto the value. A
    non-monotone q certifies neither side; only the Cauchy gap between
    the two deepest levels is reported.
    """
    q = _check_q(C, q)
    ns = sorted(set(int(n) for n in depths))
    if not ns:
        raise ValueError("depths must be nonempty")
    if ns[0] < 1:
        raise ValueError("depths must be at least 1")
    estimates = [
        pressure(C, q, n, workers=workers, deterministic=deterministic, budget=budget)
        for n in ns
    ]
    values = [e.value for e in estimates]
    deepest = estimates[-1]
    steps = q[:-1] - q[1:]
    upper = lower = None
    if np.all(steps == 0.0):
        upper = lower = deepest.value
    elif np.all(steps >= 0.0):
        upper = min(values)
    elif np.all(steps <= 0.0):
        lower = max(values)
    gap = abs(values[-1] - values[-2]) if len(values) >= 2 else None
    return PressureEstimate(
        q=q,
        n=deepest.n,
        value=deepest.value,
        gradient=deepest.gradient,
        upper_bound=upper,
        lower_bound=lower,
        cauchy_gap=gap,
    )
