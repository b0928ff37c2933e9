"""Pydantic request and response models for the HTTP service.

Requests embed the cocycle document inline using the same schema as the
on-disk JSON files. Responses mirror the handler dictionaries field for
field, so CLI output and service output stay interchangeable.
"""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field, model_validator


class CocycleModel(BaseModel):
    d: int = Field(ge=1)
    k: int = Field(ge=1)
    matrices: list[list[list[float]]]


class _EngineRequest(BaseModel):
    cocycle: CocycleModel
    workers: int = Field(default=1, ge=1, le=64)
    deterministic: bool = False


class PressureRequest(_EngineRequest):
    q: list[float]
    depth: int | None = Field(default=None, ge=1)
    depths: list[int] | None = None

    @model_validator(mode="after")
    def _one_depth_spec(self):
        if self.depth is not None and self.depths is not None:
            raise ValueError("give depth or depths, not both")
        if self.depths is not None and any(n < 1 for n in self.depths):
            raise ValueError("depths must be positive")
        return self


class PressureRecord(BaseModel):
    q: list[float]
    n: int
    value: float
    gradient: list[float]
    upper: float | None
    lower: float | None
    gap: float | None


class PressureResponse(BaseModel):
    records: list[PressureRecord]


class SpectrumRequest(_EngineRequest):
    alphas: list[list[float]] = Field(min_length=1)
    depth: int = Field(default=8, ge=1)


class SpectrumRecord(BaseModel):
    alpha: list[float]
    value: float
    status: str
    q: list[float]
    iterations: int


class SpectrumResponse(BaseModel):
    records: list[SpectrumRecord]


class MeasureModel(BaseModel):
    family: Literal["bernoulli", "markov"]
    probs: list[float] | None = None
    transition: list[list[float]] | None = None
    initial: list[float] | None = None


class LyapunovRequest(_EngineRequest):
    depth: int = Field(default=8, ge=1)
    measure: list[float] | None = None


class LyapunovResponse(BaseModel):
    n: int
    exponents: list[float]
    entropy: float
    measure: MeasureModel


class OmegaRequest(_EngineRequest):
    depth: int = Field(default=8, ge=1)
    probe_radius: float = Field(default=8.0, gt=0)
    probe_count: int = Field(default=16, ge=1)


class OmegaResponse(BaseModel):
    n: int
    vertices: list[list[float]]
    points: list[list[float]]
    q_samples: list[list[float]]


class TypicalRequest(BaseModel):
    cocycle: CocycleModel
    periodic_word: list[int] | None = None
    bridge_word: list[int] | None = None
    max_period: int = Field(default=2, ge=1)
    max_bridge: int = Field(default=3, ge=1)
    tol: float = Field(default=1e-8, gt=0)

    @model_validator(mode="after")
    def _words_together(self):
        if (self.periodic_word is None) != (self.bridge_word is None):
            raise ValueError("periodic_word and bridge_word must be given together")
        return self


class HomoclinicSpecModel(BaseModel):
    periodic_word: list[int]
    bridge_word: list[int]


class EigenvalueCheckModel(BaseModel):
    moduli: list[float]
    min_gap: float
    verdict: str


class IndependenceCheckModel(BaseModel):
    left: list[int]
    right: list[int]
    smin_ratio: float
    verdict: str


class ReportSectionModel(BaseModel):
    spec: HomoclinicSpecModel
    overall: str
    failed_condition: str | None
    per_exterior_power: dict[str, str]
    eigenvalue_check: EigenvalueCheckModel
    independence_checks: list[IndependenceCheckModel]
    margin: float


class TypicalityReportModel(ReportSectionModel):
    sections: dict[str, ReportSectionModel] = {}


class TypicalResponse(BaseModel):
    mode: Literal["direct", "search"]
    verdict: str
    report: TypicalityReportModel | None
    found: bool | None = None
    candidates_checked: int | None = None
    best_margin: float | None = None


class DominatedRequest(BaseModel):
    cocycle: CocycleModel
    index: int = Field(ge=1)
    lengths: list[int] | None = None
    mode: Literal["exhaustive", "sampled"] = "exhaustive"
    workers: int = Field(default=1, ge=1, le=64)


class DominatedResponse(BaseModel):
    index: int
    lengths: list[int]
    worst_log_ratios: list[float]
    decay_rate: float
    offset: float
    verdict: str
    mode: str
    burn_in: int


class CrosscheckRequest(_EngineRequest):
    q: list[float]
    depth: int = Field(default=8, ge=1)
    family: Literal["bernoulli", "markov"] = "bernoulli"


class CrosscheckResponse(BaseModel):
    family: str
    best: float
    witness: MeasureModel
    pressure: float
    gap: float
    converged: bool
    iterations: int


class HealthResponse(BaseModel):
    status: str
    version: str
