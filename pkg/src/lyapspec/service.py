"""HTTP service wrapping the cocycle engines.

Run with: uvicorn lyapspec.service:app

Error mapping: malformed request bodies are rejected by pydantic with
422; semantically invalid inputs (dimension mismatches, singular
generators, ill-conditioned holonomies) give 400; enumeration budget
overruns give 413. Inconclusive certificates are not errors: they come
back 200 with the verdict in the body.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from . import __version__, handlers
from .cocycle_io import cocycle_from_dict
from .matrices import NumericError
from .schemas import (
    CocycleModel,
    CrosscheckRequest,
    CrosscheckResponse,
    DominatedRequest,
    DominatedResponse,
    HealthResponse,
    LyapunovRequest,
    LyapunovResponse,
    OmegaRequest,
    OmegaResponse,
    PressureRequest,
    PressureResponse,
    SpectrumRequest,
    SpectrumResponse,
    TypicalRequest,
    TypicalResponse,
)
from .words import BudgetError, OneStepCocycle

app = FastAPI(
    title="lyapspec",
    version=__version__,
    description="Thermodynamic formalism engines for one-step matrix cocycles",
)


def _build_cocycle(model: CocycleModel) -> OneStepCocycle:
    try:
        return cocycle_from_dict(model.model_dump())
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e)) from e


def _call(fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except BudgetError as e:
        raise HTTPException(status_code=413, detail=str(e)) from e
    except (ValueError, NumericError) as e:
        raise HTTPException(status_code=400, detail=str(e)) from e


@app.get("/healthz", response_model=HealthResponse)
def healthz() -> HealthResponse:
    return HealthResponse(status="ok", version=__version__)


@app.post("/pressure", response_model=PressureResponse)
def pressure_endpoint(req: PressureRequest) -> PressureResponse:
    C = _build_cocycle(req.cocycle)
    depths = req.depths if req.depths is not None else [req.depth or 8]
    records = _call(
        handlers.pressure_records,
        C,
        req.q,
        depths,
        workers=req.workers,
        deterministic=req.deterministic,
    )
    return PressureResponse(records=records)


@app.post("/spectrum", response_model=SpectrumResponse)
def spectrum_endpoint(req: SpectrumRequest) -> SpectrumResponse:
    C = _build_cocycle(req.cocycle)
    records = _call(
        handlers.spectrum_records,
        C,
        req.alphas,
        req.depth,
        workers=req.workers,
        deterministic=req.deterministic,
    )
    return SpectrumResponse(records=records)


@app.post("/lyapunov", response_model=LyapunovResponse)
def lyapunov_endpoint(req: LyapunovRequest) -> LyapunovResponse:
    C = _build_cocycle(req.cocycle)
    record = _call(
        handlers.lyapunov_record,
        C,
        req.depth,
        req.measure,
        workers=req.workers,
        deterministic=req.deterministic,
    )
    return LyapunovResponse(**record)


@app.post("/omega", response_model=OmegaResponse)
def omega_endpoint(req: OmegaRequest) -> OmegaResponse:
    C = _build_cocycle(req.cocycle)
    record = _call(
        handlers.omega_record,
        C,
        req.depth,
        probe_radius=req.probe_radius,
        probe_count=req.probe_count,
        workers=req.workers,
        deterministic=req.deterministic,
    )
    return OmegaResponse(**record)


@app.post("/check-typical", response_model=TypicalResponse)
def check_typical_endpoint(req: TypicalRequest) -> TypicalResponse:
    C = _build_cocycle(req.cocycle)
    record = _call(
        handlers.typical_record,
        C,
        periodic_word=req.periodic_word,
        bridge_word=req.bridge_word,
        max_period=req.max_period,
        max_bridge=req.max_bridge,
        tol=req.tol,
    )
    return TypicalResponse(**record)


@app.post("/check-dominated", response_model=DominatedResponse)
def check_dominated_endpoint(req: DominatedRequest) -> DominatedResponse:
    C = _build_cocycle(req.cocycle)
    record = _call(
        handlers.dominated_record,
        C,
        req.index,
        lengths=req.lengths,
        mode=req.mode,
        workers=req.workers,
    )
    return DominatedResponse(**record)


@app.post("/crosscheck", response_model=CrosscheckResponse)
def crosscheck_endpoint(req: CrosscheckRequest) -> CrosscheckResponse:
    C = _build_cocycle(req.cocycle)
    record = _call(
        handlers.crosscheck_record,
        C,
        req.q,
        req.depth,
        req.family,
        workers=req.workers,
    )
    return CrosscheckResponse(**record)
