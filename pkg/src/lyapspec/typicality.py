"""Typicality and domination certificates for one-step cocycles.

Typicality is checked through a homoclinic loop: a periodic word p and a
bridge word describing an orbit homoclinic to p. Because a one-step
cocycle is constant on one-symbol cylinders, all local holonomies are
the identity and the holonomy loop collapses to
W = (A^n(p))^{-1} A^n(z), where z follows the bridge and then continues
periodically in phase with p, and n is the bridge length padded up to a
whole number of periods.

Certificates are tri-state: margins below tol/10 certify failure,
margins above tol certify success, anything between is inconclusive.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, product as iter_product
from typing import Sequence

import numpy as np

from .enumeration import LeafBlock, map_reduce
from .matrices import NumericError
from .words import OneStepCocycle, Word, word_product

VERDICT_PASS = "typical"
VERDICT_FAIL = "not-typical"
VERDICT_UNDECIDED = "inconclusive"

_COND_LOG_RANGE = 33.0  # ~0.9 * log(1/eps); beyond this a solve is garbage
DOMINATION_BURN_IN = 4
_SAMPLE_COUNT = 10_000


@dataclass(frozen=True)
class HomoclinicSpec:
    """A periodic word p and a bridge word defining a homoclinic orbit."""

    periodic_word: Word
    bridge_word: Word

    def __post_init__(self):
        object.__setattr__(self, "periodic_word", tuple(int(s) for s in self.periodic_word))
        object.__setattr__(self, "bridge_word", tuple(int(s) for s in self.bridge_word))
        if len(self.periodic_word) < 1:
            raise ValueError("periodic word must be nonempty")
        if len(self.bridge_word) < 1:
            raise ValueError("bridge word must be nonempty")

    @property
    def period(self) -> int:
        return len(self.periodic_word)

    def padded_bridge(self) -> Word:
        """Bridge continued in phase with p up to a whole number of periods."""
        per = self.period
        n = per * ((len(self.bridge_word) + per - 1) // per)
        tail = tuple(self.periodic_word[j % per] for j in range(len(self.bridge_word), n))
        return self.bridge_word + tail


@dataclass(frozen=True)
class EigenvalueCheck:
    moduli: np.ndarray
    min_gap: float
    verdict: str


@dataclass(frozen=True)
class IndependenceCheck:
    left_indices: tuple[int, ...]   # eigenvector indices hit by W
    right_indices: tuple[int, ...]  # eigenvector indices used directly
    smin_ratio: float
    verdict: str


@dataclass(frozen=True)
class TypicalityReport:
    """Certificate for one spec; sections hold one entry per exterior power."""

    spec: HomoclinicSpec
    eigenvalue_check: EigenvalueCheck
    independence_checks: tuple[IndependenceCheck, ...]
    per_exterior_power: dict[int, str]
    overall: str
    failed_condition: str | None = None
    sections: dict[int, "TypicalityReport"] = field(default_factory=dict)

    def margin(self) -> float:
        m = self.eigenvalue_check.min_gap
        for c in self.independence_checks:
            m = min(m, c.smin_ratio)
        for sub in self.sections.values():
            if sub is not self:
                m = min(m, sub.margin())
        return m


@dataclass(frozen=True)
class SearchResult:
    found: bool
    spec: HomoclinicSpec | None
    report: TypicalityReport | None
    best_margin: float
    candidates_checked: int


@dataclass(frozen=True)
class DominationReport:
    index: int
    lengths: tuple[int, ...]
    worst_log_ratios: np.ndarray
    decay_rate: float
    offset: float
    verdict: str
    mode: str
    burn_in: int = DOMINATION_BURN_IN


def holonomy_loop(C: OneStepCocycle, spec: HomoclinicSpec) -> np.ndarray:
    """The holonomy loop W = (A^n(p))^{-1} A^n(z) as a dense matrix."""
    padded = spec.padded_bridge()
    n = len(padded)
    reps = n // spec.period
    Ap = word_product(C, spec.periodic_word * reps)
    Az = word_product(C, padded)
    s = np.linalg.svd(Ap.base, compute_uv=False)
    if np.log(s[0]) - np.log(s[-1]) > _COND_LOG_RANGE:
        raise NumericError("period-return product too ill-conditioned to invert")
    W = np.linalg.solve(Ap.base, Az.base) * np.exp(Az.log_scale - Ap.log_scale)
    if not np.all(np.isfinite(W)):
        raise NumericError("holonomy loop overflow")
    return W


def _verdict_from_margin(margin: float, tol: float) -> str:
    if margin >= tol:
        return VERDICT_PASS
    if margin < tol / 10.0:
        return VERDICT_FAIL
    return VERDICT_UNDECIDED


def _period_return_eigens(C: OneStepCocycle, spec: HomoclinicSpec):
    Ap = word_product(C, spec.periodic_word)
    lam, vecs = np.linalg.eig(Ap.base)
    order = np.argsort(-np.abs(lam))
    lam, vecs = lam[order], vecs[:, order]
    # moduli of the true eigenvalues; log_scale shifts all equally so the
    # relative gaps are unaffected
    moduli = np.abs(lam) * np.exp(Ap.log_scale)
    return moduli, vecs


def check_one_typical(
    C: OneStepCocycle, spec: HomoclinicSpec, tol: float = 1e-8
) -> TypicalityReport:
    """1-typicality of this cocycle for the given homoclinic data.

    Condition (i): the period-return matrix has d eigenvalues of
    distinct absolute value (hence simple). Condition (ii): for all
    index sets I, J with |I| + |J| <= d, the vectors {W v_i : i in I}
    together with {v_j : j in J} are linearly independent, measured by
    the smallest-to-largest singular value ratio of the stacked columns.
    """
    moduli, vecs = _period_return_eigens(C, spec)
    d = C.d
    if d > 1:
        gaps = 1.0 - moduli[1:] / moduli[:-1]
        min_gap = float(gaps.min())
    else:
        min_gap = 1.0
    eig_check = EigenvalueCheck(
        moduli=moduli, min_gap=min_gap, verdict=_verdict_from_margin(min_gap, tol)
    )

    W = holonomy_loop(C, spec)
    cols = vecs / np.linalg.norm(vecs, axis=0, keepdims=True)
    # deterministic basis: make the first nonzero coordinate of each
    # eigenvector real and positive
    for j in range(cols.shape[1]):
        nz = np.flatnonzero(np.abs(cols[:, j]) > 1e-12)
        if nz.size:
            lead = cols[nz[0], j]
            cols[:, j] = cols[:, j] * (np.conj(lead) / np.abs(lead))
    if np.all(np.abs(np.imag(cols)) < 1e-12):
        cols = np.real(cols).copy()
    wcols = W @ cols
    norms = np.linalg.norm(wcols, axis=0, keepdims=True)
    if np.any(norms == 0):
        raise NumericError("holonomy image of an eigenvector vanished")
    wcols = wcols / norms

    checks: list[IndependenceCheck] = []
    idx = range(d)
    for a in range(0, d + 1):
        for b in range(0, d + 1 - a):
            if a + b == 0:
                continue
            for I in combinations(idx, a):
                for J in combinations(idx, b):
                    M = np.column_stack(
                        [wcols[:, list(I)], cols[:, list(J)]]
                    ) if a and b else (wcols[:, list(I)] if a else cols[:, list(J)])
                    sv = np.linalg.svd(M, compute_uv=False)
                    ratio = float(sv[-1] / sv[0]) if sv[0] > 0 else 0.0
                    checks.append(
                        IndependenceCheck(
                            left_indices=I,
                            right_indices=J,
                            smin_ratio=ratio,
                            verdict=_verdict_from_margin(ratio, tol),
                        )
                    )

    verdicts = [eig_check.verdict] + [c.verdict for c in checks]
    if any(v == VERDICT_FAIL for v in verdicts):
        overall = VERDICT_FAIL
        failed = (
            "condition (i)" if eig_check.verdict == VERDICT_FAIL else "condition (ii)"
        )
    elif all(v == VERDICT_PASS for v in verdicts):
        overall, failed = VERDICT_PASS, None
    else:
        overall, failed = VERDICT_UNDECIDED, None

    report = TypicalityReport(
        spec=spec,
        eigenvalue_check=eig_check,
        independence_checks=tuple(checks),
        per_exterior_power={1: overall},
        overall=overall,
        failed_condition=failed,
    )
    object.__setattr__(report, "sections", {1: report})
    return report


def check_typical(
    C: OneStepCocycle, spec: HomoclinicSpec, tol: float = 1e-8
) -> TypicalityReport:
    """Typicality: 1-typicality of every exterior power t = 1..d-1 with
    the same homoclinic data."""
    d = C.d
    if d == 1:
        # no exterior levels to check; scalar cocycles are always typical
        lam = abs(word_product(C, spec.periodic_word).base[0, 0])
        eig = EigenvalueCheck(moduli=np.array([lam]), min_gap=1.0, verdict=VERDICT_PASS)
        return TypicalityReport(
            spec=spec,
            eigenvalue_check=eig,
            independence_checks=(),
            per_exterior_power={},
            overall=VERDICT_PASS,
        )
    sections: dict[int, TypicalityReport] = {}
    for t in range(1, d):
        level = (
            C if t == 1 else OneStepCocycle(C.compound_generators(t))
        )
        sections[t] = check_one_typical(level, spec, tol)
    verdicts = {t: r.overall for t, r in sections.items()}
    if any(v == VERDICT_FAIL for v in verdicts.values()):
        overall = VERDICT_FAIL
        failed = next(
            r.failed_condition for t, r in sorted(sections.items())
            if r.overall == VERDICT_FAIL
        )
    elif all(v == VERDICT_PASS for v in verdicts.values()):
        overall, failed = VERDICT_PASS, None
    else:
        overall, failed = VERDICT_UNDECIDED, None
    base = sections[1]
    return TypicalityReport(
        spec=spec,
        eigenvalue_check=base.eigenvalue_check,
        independence_checks=base.independence_checks,
        per_exterior_power=verdicts,
        overall=overall,
        failed_condition=failed,
        sections=sections,
    )


def _aligned_with_period(spec: HomoclinicSpec) -> bool:
    per = spec.period
    return all(
        s == spec.periodic_word[j % per] for j, s in enumerate(spec.bridge_word)
    )


def search_homoclinic(
    C: OneStepCocycle,
    max_period: int,
    max_bridge: int,
    tol: float = 1e-8,
) -> SearchResult:
    """Search periodic/bridge word pairs in lexicographic order for a
    typical certificate; first success wins."""
    if max_period < 1 or max_bridge < 1:
        raise ValueError("max_period and max_bridge must be at least 1")
    best_margin = -np.inf
    checked = 0
    for per in range(1, max_period + 1):
        for p in iter_product(range(1, C.k + 1), repeat=per):
            for blen in range(1, max_bridge + 1):
                for b in iter_product(range(1, C.k + 1), repeat=blen):
                    spec = HomoclinicSpec(p, b)
                    if _aligned_with_period(spec):
                        continue  # z equals the periodic orbit itself
                    try:
                        report = check_typical(C, spec, tol)
                    except NumericError:
                        continue
                    checked += 1
                    if report.overall == VERDICT_PASS:
                        return SearchResult(
                            found=True,
                            spec=spec,
                            report=report,
                            best_margin=report.margin(),
                            candidates_checked=checked,
                        )
                    best_margin = max(best_margin, report.margin())
    return SearchResult(
        found=False,
        spec=None,
        report=None,
        best_margin=float(best_margin),
        candidates_checked=checked,
    )


def _worst_ratio_exhaustive(C, index, n, workers, budget) -> float:
    def block_fn(b: LeafBlock):
        return float((b.log_sigma[:, index] - b.log_sigma[:, index - 1]).max())

    return map_reduce(C, n, block_fn, max, workers=workers, budget=budget)


def _worst_ratio_sampled(C, index, n, count, rng) -> float:
    d = C.d
    words0 = rng.integers(0, C.k, size=(count, n))
    tops = np.empty((count, d))
    for m in range(1, d):
        G = C.compound_generators(m)
        B = np.broadcast_to(np.eye(G.shape[1]), (count, G.shape[1], G.shape[2])).copy()
        scale = np.zeros(count)
        for step in range(n):
            B = np.matmul(G[words0[:, step]], B)
            r = np.abs(B).sum(axis=2).max(axis=1)
            B /= r[:, None, None]
            scale += np.log(r)
        sv = np.linalg.svd(B, compute_uv=False)
        tops[:, m - 1] = np.log(sv[:, 0]) + scale
    log_dets = np.log(np.abs(np.linalg.det(C.generators)))
    tops[:, d - 1] = log_dets[words0].sum(axis=1)
    logsig = np.empty_like(tops)
    logsig[:, 0] = tops[:, 0]
    logsig[:, 1:] = np.diff(tops, axis=1)
    return float((logsig[:, index] - logsig[:, index - 1]).max())


def check_dominated(
    C: OneStepCocycle,
    index: int,
    lengths: Sequence[int] | None = None,
    mode: str = "exhaustive",
    *,
    tol_slope: float = 1e-3,
    workers: int = 1,
    budget: int | None = None,
    seed: int = 2024,
) -> DominationReport:
    """Domination of index i: sigma_{i+1}/sigma_i of every product decays
    like C tau^N, certified by a least-squares fit of the worst log ratio
    against the word length beyond a burn-in of 4.

    Verdicts: "dominated" needs fitted slope <= -tol_slope and worst
    ratios monotone nonincreasing beyond the burn-in; "not-dominated"
    is declared when the slope is above -tol_slope/10; anything else is
    inconclusive.
    """
    if not 1 <= index <= C.d - 1:
        raise ValueError(f"index must be in 1..{C.d - 1}")
    if mode not in ("exhaustive", "sampled"):
        raise ValueError(f"unknown mode {mode!r}")
    if lengths is None:
        lengths = range(1, 13)
    ns = tuple(sorted(set(int(n) for n in lengths)))
    if not ns or ns[0] < 1:
        raise ValueError("lengths must be positive")
    fit_ns = [n for n in ns if n > DOMINATION_BURN_IN]
    if len(fit_ns) < 2:
        raise ValueError(
            f"need at least two lengths beyond the burn-in {DOMINATION_BURN_IN}"
        )

    rng = np.random.default_rng(seed)
    worst = []
    for n in ns:
        if mode == "exhaustive":
            worst.append(_worst_ratio_exhaustive(C, index, n, workers, budget))
        else:
            worst.append(_worst_ratio_sampled(C, index, n, _SAMPLE_COUNT, rng))
    worst = np.asarray(worst)

    y = np.array([worst[ns.index(n)] for n in fit_ns])
    X = np.column_stack([np.asarray(fit_ns, dtype=float), np.ones(len(fit_ns))])
    (slope, intercept), *_ = np.linalg.lstsq(X, y, rcond=None)
    monotone = bool(np.all(np.diff(y) <= 1e-12))

    if slope <= -tol_slope and monotone:
        verdict = "dominated"
    elif slope >= -tol_slope / 10.0:
        verdict = "not-dominated"
    else:
        verdict = "inconclusive"
    return DominationReport(
        index=index,
        lengths=ns,
        worst_log_ratios=worst,
        decay_rate=float(slope),
        offset=float(intercept),
        verdict=verdict,
        mode=mode,
    )
