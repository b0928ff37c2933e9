"""Shared request handlers.

Each function takes a validated cocycle plus plain parameters and
returns JSON-ready dicts. The HTTP service and the batch CLI both
dispatch here, so the two front ends cannot drift apart numerically.
Errors propagate as ValueError (semantic), BudgetError (resources) or
NumericError (conditioning) for the caller to map onto its own codes.
"""

from __future__ import annotations

import numpy as np

from .measures import (
    BernoulliMeasure,
    MarkovMeasure,
    entropy,
    lyapunov_vector,
    variational_crosscheck,
)
from .pressure import PressureEstimate, pressure, pressure_bracket
from .spectrum import estimate_omega, spectrum_curve
from .typicality import (
    HomoclinicSpec,
    TypicalityReport,
    check_dominated,
    check_typical,
    search_homoclinic,
)
from .words import OneStepCocycle


def _floats(x) -> list[float]:
    return [float(v) for v in np.asarray(x).ravel()]


def _estimate_dict(est: PressureEstimate) -> dict:
    return {
        "q": _floats(est.q),
        "n": int(est.n),
        "value": float(est.value),
        "gradient": _floats(est.gradient),
        "upper": None if est.upper_bound is None else float(est.upper_bound),
        "lower": None if est.lower_bound is None else float(est.lower_bound),
        "gap": None if est.cauchy_gap is None else float(est.cauchy_gap),
    }


def pressure_records(
    C: OneStepCocycle,
    q,
    depths,
    *,
    workers: int = 1,
    deterministic: bool = False,
    budget: int | None = None,
) -> list[dict]:
    """One record per depth; the deepest record carries the brackets."""
    ns = sorted(set(int(n) for n in depths))
    if not ns:
        raise ValueError("need at least one depth")
    kw = dict(workers=workers, deterministic=deterministic, budget=budget)
    records = [_estimate_dict(pressure(C, q, n, **kw)) for n in ns[:-1]]
    records.append(_estimate_dict(pressure_bracket(C, q, ns, **kw)))
    return records


def spectrum_records(
    C: OneStepCocycle,
    alphas,
    n: int,
    *,
    workers: int = 1,
    deterministic: bool = False,
    budget: int | None = None,
) -> list[dict]:
    points = spectrum_curve(
        C, alphas, n, workers=workers, deterministic=deterministic, budget=budget
    )
    return [
        {
            "alpha": _floats(p.alpha),
            "value": float(p.value),
            "status": p.status,
            "q": _floats(p.minimizer_q),
            "iterations": int(p.iterations),
        }
        for p in points
    ]


def _measure_dict(mu) -> dict:
    if isinstance(mu, BernoulliMeasure):
        return {"family": "bernoulli", "probs": _floats(mu.probs)}
    if isinstance(mu, MarkovMeasure):
        return {
            "family": "markov",
            "transition": np.asarray(mu.transition).tolist(),
            "initial": _floats(mu.initial),
        }
    raise ValueError(f"unknown measure type {type(mu).__name__}")


def lyapunov_record(
    C: OneStepCocycle,
    n: int,
    probs=None,
    *,
    workers: int = 1,
    deterministic: bool = False,
    budget: int | None = None,
) -> dict:
    if probs is None:
        probs = np.full(C.k, 1.0 / C.k)
    mu = BernoulliMeasure(np.asarray(probs, dtype=float))
    chi = lyapunov_vector(
        C, mu, n, workers=workers, deterministic=deterministic, budget=budget
    )
    return {
        "n": int(n),
        "exponents": _floats(chi),
        "entropy": float(entropy(mu)),
        "measure": _measure_dict(mu),
    }


def omega_record(
    C: OneStepCocycle,
    n: int,
    *,
    probe_radius: float = 8.0,
    probe_count: int = 16,
    workers: int = 1,
    deterministic: bool = False,
    budget: int | None = None,
) -> dict:
    est = estimate_omega(
        C,
        n,
        probe_radius=probe_radius,
        probe_count=probe_count,
        workers=workers,
        deterministic=deterministic,
        budget=budget,
    )
    return {
        "n": int(est.depth),
        "vertices": np.asarray(est.vertices).tolist(),
        "points": np.asarray(est.points).tolist(),
        "q_samples": np.asarray(est.q_samples).tolist(),
    }


def _report_dict(report: TypicalityReport, with_sections: bool = True) -> dict:
    out = {
        "spec": {
            "periodic_word": list(report.spec.periodic_word),
            "bridge_word": list(report.spec.bridge_word),
        },
        "overall": report.overall,
        "failed_condition": report.failed_condition,
        "per_exterior_power": {
            str(t): v for t, v in sorted(report.per_exterior_power.items())
        },
        "eigenvalue_check": {
            "moduli": _floats(report.eigenvalue_check.moduli),
            "min_gap": float(report.eigenvalue_check.min_gap),
            "verdict": report.eigenvalue_check.verdict,
        },
        "independence_checks": [
            {
                "left": list(c.left_indices),
                "right": list(c.right_indices),
                "smin_ratio": float(c.smin_ratio),
                "verdict": c.verdict,
            }
            for c in report.independence_checks
        ],
        "margin": float(report.margin()),
    }
    if with_sections:
        out["sections"] = {
            str(t): _report_dict(r, with_sections=False)
            for t, r in sorted(report.sections.items())
        }
    return out


def typical_record(
    C: OneStepCocycle,
    *,
    periodic_word=None,
    bridge_word=None,
    max_period: int = 2,
    max_bridge: int = 3,
    tol: float = 1e-8,
) -> dict:
    """Direct check when a homoclinic spec is given, search otherwise."""
    if (periodic_word is None) != (bridge_word is None):
        raise ValueError("periodic_word and bridge_word must be given together")
    if periodic_word is not None:
        spec = HomoclinicSpec(tuple(periodic_word), tuple(bridge_word))
        report = check_typical(C, spec, tol)
        return {
            "mode": "direct",
            "verdict": report.overall,
            "report": _report_dict(report),
        }
    result = search_homoclinic(C, max_period, max_bridge, tol)
    margin = float(result.best_margin)
    return {
        "mode": "search",
        "verdict": result.report.overall if result.found else "inconclusive",
        "found": result.found,
        "candidates_checked": int(result.candidates_checked),
        "best_margin": margin if np.isfinite(margin) else None,
        "report": _report_dict(result.report) if result.found else None,
    }


def dominated_record(
    C: OneStepCocycle,
    index: int,
    *,
    lengths=None,
    mode: str = "exhaustive",
    workers: int = 1,
    budget: int | None = None,
) -> dict:
    report = check_dominated(
        C, index, lengths=lengths, mode=mode, workers=workers, budget=budget
    )
    return {
        "index": int(report.index),
        "lengths": list(report.lengths),
        "worst_log_ratios": _floats(report.worst_log_ratios),
        "decay_rate": float(report.decay_rate),
        "offset": float(report.offset),
        "verdict": report.verdict,
        "mode": report.mode,
        "burn_in": int(report.burn_in),
    }


def crosscheck_record(
    C: OneStepCocycle,
    q,
    n: int,
    family: str = "bernoulli",
    *,
    workers: int = 1,
    budget: int | None = None,
) -> dict:
    res = variational_crosscheck(C, q, n, family, workers=workers, budget=budget)
    return {
        "family": res.family,
        "best": float(res.best),
        "witness": _measure_dict(res.witness),
        "pressure": float(res.pressure),
        "gap": float(res.gap),
        "converged": bool(res.converged),
        "iterations": int(res.iterations),
    }
