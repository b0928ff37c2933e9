"""Shift-invariant measures, Lyapunov vectors, and the variational check.

Supports Bernoulli (i.i.d.) and one-step Markov measures on the symbol
shift. Cylinder weights are evaluated in log space with a large negative
sentinel for vanishing probabilities, so zero-probability symbols never
produce NaNs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .enumeration import LeafBlock, leaf_table, map_reduce
from .pressure import pressure
from .words import OneStepCocycle

LOG_ZERO = -1.0e6  # stands in for log 0; exp underflows to exactly 0.0
_PROB_TOL = 1e-9
_CLAMP = 1e-15


def _xlogx(p: np.ndarray) -> np.ndarray:
    # 0 log 0 = 0
    out = np.zeros_like(p)
    mask = p > 0
    out[mask] = p[mask] * np.log(p[mask])
    return out


def _safe_log(p: np.ndarray) -> np.ndarray:
    return np.where(p > 0, np.log(np.maximum(p, _CLAMP)), LOG_ZERO)


@dataclass(frozen=True)
class BernoulliMeasure:
    """Product measure given by a probability vector on the k symbols."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.ndim != 1 or p.size < 1:
            raise ValueError("probs must be a nonempty vector")
        if np.any(p < -_PROB_TOL) or abs(p.sum() - 1.0) > _PROB_TOL:
            raise ValueError("probs must be nonnegative and sum to 1")
        object.__setattr__(self, "probs", np.maximum(p, 0.0))

    @property
    def k(self) -> int:
        return self.probs.size

    def log_cylinder(self, words0: np.ndarray) -> np.ndarray:
        """Log measure of the cylinders given by 0-based word rows."""
        return _safe_log(self.probs)[words0].sum(axis=1)


def _stationary(P: np.ndarray) -> np.ndarray:
    k = P.shape[0]
    A = np.vstack([P.T - np.eye(k), np.ones(k)])
    b = np.zeros(k + 1)
    b[-1] = 1.0
    pi, *_ = np.linalg.lstsq(A, b, rcond=None)
    pi = np.maximum(pi, 0.0)
    s = pi.sum()
    if s <= 0:
        raise ValueError("could not compute a stationary vector")
    return pi / s


@dataclass(frozen=True)
class MarkovMeasure:
    """One-step Markov measure: row-stochastic transition matrix plus an
    initial vector (the stationary one is computed when omitted)."""

    transition: np.ndarray
    initial: np.ndarray | None = None

    def __post_init__(self):
        P = np.asarray(self.transition, dtype=float)
        if P.ndim != 2 or P.shape[0] != P.shape[1] or P.shape[0] < 1:
            raise ValueError("transition must be a square matrix")
        if np.any(P < -_PROB_TOL) or np.any(np.abs(P.sum(axis=1) - 1.0) > _PROB_TOL):
            raise ValueError("transition rows must be probability vectors")
        P = np.maximum(P, 0.0)
        object.__setattr__(self, "transition", P)
        if self.initial is None:
            object.__setattr__(self, "initial", _stationary(P))
        else:
            pi = np.asarray(self.initial, dtype=float)
            if pi.shape != (P.shape[0],) or np.any(pi < -_PROB_TOL) or abs(pi.sum() - 1.0) > _PROB_TOL:
                raise ValueError("initial must be a probability vector of length k")
            object.__setattr__(self, "initial", np.maximum(pi, 0.0))

    @property
    def k(self) -> int:
        return self.transition.shape[0]

    def log_cylinder(self, words0: np.ndarray) -> np.ndarray:
        lw = _safe_log(self.initial)[words0[:, 0]]
        if words0.shape[1] > 1:
            lw = lw + _safe_log(self.transition)[words0[:, :-1], words0[:, 1:]].sum(axis=1)
        return lw


Measure = Union[BernoulliMeasure, MarkovMeasure]


def entropy(mu: Measure) -> float:
    """Shannon entropy rate (nats per symbol).

    For a Markov measure this is the stationary rate of its transition
    matrix, independent of the stored initial vector.
    """
    if isinstance(mu, BernoulliMeasure):
        return float(-_xlogx(mu.probs).sum())
    pi = _stationary(mu.transition)
    return float(-(pi[:, None] * _xlogx(mu.transition)).sum())


def _check_measure(C: OneStepCocycle, mu: Measure) -> None:
    if mu.k != C.k:
        raise ValueError(f"measure is over {mu.k} symbols, cocycle has k = {C.k}")


def lyapunov_vector(
    C: OneStepCocycle,
    mu: Measure,
    n: int,
    *,
    workers: int = 1,
    deterministic: bool = False,
    budget: int | None = None,
) -> np.ndarray:
    """Depth-n Lyapunov exponent vector (1/n) sum_I mu[I] log sigma(A_I)."""
    _check_measure(C, mu)
    if n < 1:
        raise ValueError("depth must be at least 1")

    def block_fn(b: LeafBlock):
        w = np.exp(mu.log_cylinder(b.words0()))
        return w @ b.log_sigma

    V = map_reduce(
        C, n, block_fn, lambda a, b: a + b,
        workers=workers, deterministic=deterministic, budget=budget,
    )
    return V / n


def bowen_check(
    C: OneStepCocycle,
    mu: Measure,
    q,
    n: int,
    *,
    workers: int = 1,
    deterministic: bool = False,
    budget: int | None = None,
) -> tuple[float, float]:
    """Both sides of the finite-depth variational inequality.

    Returns (lhs, rhs) with
    lhs = (1/n) sum_I mu[I] (log psi^q(A_I) - log mu[I]) and
    rhs = P_n(q); lhs <= rhs always, with equality at q = 0 for the
    uniform Bernoulli measure.
    """
    _check_measure(C, mu)
    q = np.asarray(q, dtype=float)
    if q.shape != (C.d,):
        raise ValueError(f"q must have length d = {C.d}")
    if n < 1:
        raise ValueError("depth must be at least 1")

    def block_fn(b: LeafBlock):
        lpsi = b.log_sigma @ q
        lw = mu.log_cylinder(b.words0())
        w = np.exp(lw)
        lhs_part = float((w * lpsi).sum() - (w * np.where(w > 0, lw, 0.0)).sum())
        m = float(lpsi.max())
        return lhs_part, m, float(np.exp(lpsi - m).sum())

    def merge(a, b):
        m = max(a[1], b[1])
        return a[0] + b[0], m, a[2] * np.exp(a[1] - m) + b[2] * np.exp(b[1] - m)

    lhs_sum, m, S = map_reduce(
        C, n, block_fn, merge,
        workers=workers, deterministic=deterministic, budget=budget,
    )
    return lhs_sum / n, (m + np.log(S)) / n


# ---------------------------------------------------------------------------
# variational cross-check: maximize h(mu) + <q, chi_n(mu)> over a family


@dataclass(frozen=True)
class CrosscheckResult:
    family: str
    best: float
    witness: Measure
    pressure: float
    gap: float
    converged: bool
    iterations: int


def _project_simplex(v: np.ndarray) -> np.ndarray:
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    rho = np.nonzero(u * np.arange(1, v.size + 1) > css)[0][-1]
    return np.maximum(v - css[rho] / (rho + 1.0), 0.0)


def _project_rows(x: np.ndarray) -> np.ndarray:
    return np.apply_along_axis(_project_simplex, -1, x)


def _ascend(F, grad, x0, *, tol=1e-7, max_iter=200):
    """Projected gradient ascent over a stack of probability rows."""
    x = _project_rows(x0)
    f = F(x)
    step = 1.0
    for it in range(1, max_iter + 1):
        g = grad(x)
        pg = _project_rows(x + g) - x
        if np.linalg.norm(pg) <= tol:
            return x, f, it, True
        s, accepted = step, False
        for _ in range(40):
            xn = _project_rows(x + s * g)
            fn = F(xn)
            if fn > f + 1e-14:
                x, f, step, accepted = xn, fn, min(s * 1.5, 16.0), True
                break
            s /= 2
        if not accepted:
            return x, f, it, np.linalg.norm(pg) <= tol
    return x, f, max_iter, False


def _bernoulli_starts(k: int, count: int) -> list[np.ndarray]:
    starts = [np.full(k, 1.0 / k)]
    for a in range(k):
        v = np.full(k, 0.1 / max(k - 1, 1))
        v[a] = 0.9
        starts.append(v / v.sum())
    rng = np.random.default_rng(12345)
    while len(starts) < count:
        starts.append(rng.dirichlet(np.ones(k)))
    return starts[:count]


def _markov_starts(k: int, count: int) -> list[np.ndarray]:
    starts = [np.full((k, k), 1.0 / k)]
    starts.append(_project_rows(0.8 * np.eye(k) + 0.2 / k))
    starts.append(_project_rows(0.8 * (1 - np.eye(k)) / max(k - 1, 1) + 0.2 / k))
    rng = np.random.default_rng(54321)
    while len(starts) < count:
        starts.append(rng.dirichlet(np.ones(k), size=k))
    return starts[:count]


def variational_crosscheck(
    C: OneStepCocycle,
    q,
    n: int,
    family: str = "bernoulli",
    *,
    restarts: int = 8,
    tol: float = 1e-7,
    max_iter: int = 200,
    workers: int = 1,
    budget: int | None = None,
) -> CrosscheckResult:
    """Maximize h(mu) + <q, chi_n(mu)> over a measure family.

    The optimum is a lower bound for P_n(q); the result records the gap
    P_n(q) - best (tiny negative values only through float roundoff).
    Non-convergence of every restart is flagged, not raised.
    """
    q = np.asarray(q, dtype=float)
    if q.shape != (C.d,):
        raise ValueError(f"q must have length d = {C.d}")
    if family not in ("bernoulli", "markov"):
        raise ValueError(f"unknown family {family!r}")
    if n < 1:
        raise ValueError("depth must be at least 1")

    logsig, words0 = leaf_table(
        C, n, with_words=True, workers=workers, budget=budget, max_leaves=1 << 18
    )
    g = logsig @ q
    k = C.k
    p_est = pressure(C, q, n, workers=workers, budget=budget)

    if family == "bernoulli":
        counts = np.stack([(words0 == a).sum(axis=1) for a in range(k)], axis=1)
        classes, inv = np.unique(counts, axis=0, return_inverse=True)
        Gsum = np.bincount(inv, weights=g) / n
        Cls = classes.astype(float)  # (m, k) symbol counts per class

        def F(x):
            p = np.maximum(x.ravel(), 0.0)
            lp = _safe_log(p)
            return float(-_xlogx(p).sum() + np.exp(Cls @ lp) @ Gsum)

        def grad(x):
            p = np.maximum(x.ravel(), _CLAMP)
            lp = np.log(p)
            ent = -(lp + 1.0)
            # d/dp_a of sum_c W_c Gsum_c, with W_c = prod_a p_a^{c_a}
            expo = Cls @ lp
            out = np.empty(k)
            for a in range(k):
                active = Cls[:, a] > 0
                out[a] = (
                    np.exp(expo[active] - lp[a]) * Cls[active, a]
                ) @ Gsum[active] if np.any(active) else 0.0
            return (ent + out)[None, :]

        starts = _bernoulli_starts(k, restarts)
        best = None
        for x0 in starts:
            x, f, it, ok = _ascend(F, grad, x0[None, :], tol=tol, max_iter=max_iter)
            if best is None or f > best[1]:
                best = (x, f, it, ok)
        witness = BernoulliMeasure(best[0][0])
    else:
        first = words0[:, 0]
        trans = np.zeros((words0.shape[0], k * k))
        if n > 1:
            idx = words0[:, :-1].astype(int) * k + words0[:, 1:].astype(int)
            np.add.at(trans, (np.arange(words0.shape[0])[:, None], idx), 1.0)
        key = np.column_stack([first[:, None], trans])
        classes, inv = np.unique(key, axis=0, return_inverse=True)
        Gsum = np.bincount(inv, weights=g) / n
        cls_first = classes[:, 0].astype(int)
        cls_trans = classes[:, 1:]  # (m, k*k)

        def F(x):
            P = np.maximum(x, 0.0)
            rs = P.sum(axis=1, keepdims=True)
            P = np.where(rs > 0, P / rs, 1.0 / k)
            pi = _stationary(P)
            h = float(-(pi[:, None] * _xlogx(P)).sum())
            lp = _safe_log(P).ravel()
            lpi = _safe_log(pi)
            return h + float(np.exp(lpi[cls_first] + cls_trans @ lp) @ Gsum)

        def grad(x):
            h = 1e-6
            out = np.zeros_like(x)
            for i in range(k):
                for jcol in range(k - 1):
                    d = np.zeros_like(x)
                    d[i, jcol] = 1.0
                    d[i, k - 1] = -1.0
                    out[i, jcol] = (F(x + h * d) - F(x - h * d)) / (2 * h)
            return out

        starts = _markov_starts(k, restarts)
        best = None
        for x0 in starts:
            x, f, it, ok = _ascend(F, grad, x0, tol=tol, max_iter=max_iter)
            if best is None or f > best[1]:
                best = (x, f, it, ok)
        witness = MarkovMeasure(_project_rows(best[0]))

    return CrosscheckResult(
        family=family,
        best=float(best[1]),
        witness=witness,
        pressure=p_est.value,
        gap=float(p_est.value - best[1]),
        converged=bool(best[3]),
        iterations=int(best[2]),
    )
