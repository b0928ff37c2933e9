"""Exponent range estimation and the entropy spectrum via convex duality.

S(alpha) = inf_q { P(q) - <q, alpha> } at finite depth; the infimum is
found by gradient descent with backtracking, the range Omega by taking
the convex hull of Gibbs gradients over a probe grid of q vectors.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .enumeration import leaf_table
from .pressure import pressure, pressure_grid, table_pressure
from .words import BudgetError, OneStepCocycle, default_budget

Q_MAX = 64.0
BOUNDARY_NORM = 32.0
SLOW_RATE = 1e-6

STATUS_INTERIOR = "interior"
STATUS_BOUNDARY = "boundary-suspect"
STATUS_INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class SpectrumPoint:
    """One Legendre transform evaluation.

    status is "interior" when the minimizer certifiably sits at a
    stationary point, "infeasible" when the objective ran away beyond
    the q-norm cap at a steady rate (alpha outside the exponent range),
    and "boundary-suspect" for the slow in-between cases.
    """

    alpha: np.ndarray
    value: float
    minimizer_q: np.ndarray
    status: str
    iterations: int


@dataclass(frozen=True)
class OmegaEstimate:
    """Depth-n estimate of the exponent range Omega.

    vertices are the hull vertices of the Gibbs-gradient cloud (the raw
    cloud itself when the affine rank exceeds 3); points is the full
    cloud, one gradient per probed q.
    """

    depth: int
    vertices: np.ndarray
    points: np.ndarray
    q_samples: np.ndarray


def _check_alpha(C: OneStepCocycle, alpha) -> np.ndarray:
    a = np.asarray(alpha, dtype=float)
    if a.shape != (C.d,):
        raise ValueError(f"alpha must have length d = {C.d}, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("alpha contains non-finite entries")
    if np.any(np.diff(a) > 1e-12):
        raise ValueError("alpha components must be nonincreasing")
    return a


def _make_objective(C, n, workers, deterministic, budget):
    """(value, gradient) evaluator for P_n; table-backed when it fits."""
    try:
        logsig, _ = leaf_table(C, n, workers=workers, budget=budget)

        def eval_q(q):
            return table_pressure(logsig, q, n)

        return eval_q
    except BudgetError:
        if C.k**n > (default_budget() if budget is None else budget):
            raise

        def eval_q(q):
            est = pressure(
                C, q, n, workers=workers, deterministic=deterministic, budget=budget
            )
            return est.value, est.gradient

        return eval_q


def spectrum_point(
    C: OneStepCocycle,
    alpha,
    n: int,
    q_init=None,
    *,
    grad_tol: float = 1e-7,
    max_iter: int = 500,
    q_max: float = Q_MAX,
    workers: int = 1,
    deterministic: bool = False,
    budget: int | None = None,
) -> SpectrumPoint:
    """Legendre transform inf_q { P_n(q) - <q, alpha> } at depth n.

    Gradient descent from q_init (default 0) with Armijo backtracking.
    The reported value always equals P_n(q_hat) - <q_hat, alpha> at the
    final iterate q_hat.
    """
    alpha = _check_alpha(C, alpha)
    if n < 1:
        raise ValueError("depth must be at least 1")
    eval_q = _make_objective(C, n, workers, deterministic, budget)

    q = np.zeros(C.d) if q_init is None else np.asarray(q_init, dtype=float).copy()
    if q.shape != (C.d,):
        raise ValueError("q_init must have length d")

    def F(qv):
        value, grad = eval_q(qv)
        return value - float(qv @ alpha), grad - alpha

    f, g = F(q)
    step = 1.0
    status = STATUS_BOUNDARY
    it = 0
    prev: tuple[np.ndarray, np.ndarray] | None = None
    for it in range(1, max_iter + 1):
        gn = float(np.linalg.norm(g))
        if gn <= grad_tol:
            status = (
                STATUS_INTERIOR if np.linalg.norm(q) <= BOUNDARY_NORM else STATUS_BOUNDARY
            )
            break
        # Barzilai-Borwein initial step handles the nearly flat valleys
        # this objective develops when Gibbs weights concentrate
        s = step * 2.0
        if prev is not None:
            dq, dg = q - prev[0], g - prev[1]
            denom = float(dq @ dg)
            if denom > 0:
                s = float(dq @ dq) / denom
        s = float(np.clip(s, 1e-6, 1e6))
        accepted = False
        for _ in range(60):
            qn = q - s * g
            fn, gnew = F(qn)
            if fn <= f - 1e-4 * s * gn * gn:
                drop = f - fn
                prev = (q, g)
                q, f, g = qn, fn, gnew
                step = s
                accepted = True
                break
            s *= 0.5
        if not accepted:
            # no descent possible at float resolution: treat as converged
            status = (
                STATUS_INTERIOR
                if gn <= 10 * grad_tol and np.linalg.norm(q) <= BOUNDARY_NORM
                else STATUS_BOUNDARY
            )
            break
        if np.linalg.norm(q) > q_max:
            status = STATUS_INFEASIBLE if drop > SLOW_RATE else STATUS_BOUNDARY
            break
    return SpectrumPoint(
        alpha=alpha, value=float(f), minimizer_q=q, status=status, iterations=it
    )


def spectrum_curve(
    C: OneStepCocycle,
    alphas: Sequence[Sequence[float]],
    n: int,
    *,
    grad_tol: float = 1e-7,
    max_iter: int = 500,
    workers: int = 1,
    deterministic: bool = False,
    budget: int | None = None,
) -> list[SpectrumPoint]:
    """Spectrum points along a list of alphas, warm-starting each
    minimization from the previous minimizer."""
    out: list[SpectrumPoint] = []
    q0 = None
    for alpha in alphas:
        pt = spectrum_point(
            C, alpha, n, q_init=q0,
            grad_tol=grad_tol, max_iter=max_iter,
            workers=workers, deterministic=deterministic, budget=budget,
        )
        out.append(pt)
        q0 = pt.minimizer_q if pt.status != STATUS_INFEASIBLE else None
    return out


def _probe_directions(d: int, count: int) -> np.ndarray:
    if d == 1:
        dirs = np.array([[1.0], [-1.0]])
    elif d == 2:
        th = 2 * np.pi * np.arange(count) / max(count, 1)
        dirs = np.column_stack([np.cos(th), np.sin(th)])
    elif d == 3:
        # Fibonacci sphere
        i = np.arange(count) + 0.5
        phi = np.arccos(1 - 2 * i / count)
        th = np.pi * (1 + 5**0.5) * i
        dirs = np.column_stack(
            [np.sin(phi) * np.cos(th), np.sin(phi) * np.sin(th), np.cos(phi)]
        )
    else:
        rng = np.random.default_rng(0)
        dirs = rng.standard_normal((count, d))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    axes = np.vstack([np.eye(d), -np.eye(d)])
    return np.vstack([dirs, axes])


def _hull_vertices(pts: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    center = pts.mean(axis=0)
    X = pts - center
    _, s, Vt = np.linalg.svd(X, full_matrices=False)
    scale = float(s[0]) if s.size else 0.0
    rank = int((s > max(tol * scale, 1e-12)).sum()) if scale > 0 else 0
    if rank == 0:
        return pts[:1].copy()
    if rank > 3:
        return pts.copy()
    while rank >= 2:
        Y = X @ Vt[:rank].T
        try:
            hull = ConvexHull(Y)
            return pts[np.sort(hull.vertices)].copy()
        except QhullError:
            # nearly degenerate in this rank; flatten one dimension
            rank -= 1
    t = X @ Vt[0]
    return pts[sorted({int(np.argmin(t)), int(np.argmax(t))})].copy()


def estimate_omega(
    C: OneStepCocycle,
    n: int,
    *,
    probe_radius: float = 8.0,
    probe_count: int = 16,
    workers: int = 1,
    deterministic: bool = False,
    budget: int | None = None,
) -> OmegaEstimate:
    """Depth-n exponent range estimate from Gibbs gradients.

    Probes q on a sphere of the given radius (plus the axes and the
    origin), collects the pressure gradients in one shared enumeration
    pass, and returns the convex hull of the gradient cloud.
    """
    if n < 1:
        raise ValueError("depth must be at least 1")
    if probe_radius <= 0 or probe_count < 1:
        raise ValueError("probe radius and count must be positive")
    dirs = _probe_directions(C.d, probe_count)
    qs = np.vstack([probe_radius * dirs, np.zeros((1, C.d))])
    grid = pressure_grid(
        C, qs, n, workers=workers, deterministic=deterministic, budget=budget
    )
    points = np.vstack([est.gradient for est in grid])
    return OmegaEstimate(
        depth=n, vertices=_hull_vertices(points), points=points, q_samples=qs
    )
