"""HTTP surface over the runners.

Error mapping follows the CLI exit-code convention: user-facing validation
problems become 400 with exit_code 1, broken mathematical invariants become
500 with exit_code 2; both carry the message under detail.error.
"""
from __future__ import annotations

from fastapi import FastAPI
from fastapi.responses import JSONResponse

from . import __version__
from .config import (
    DiscreteConfig,
    SimulateBundle,
    apply_region_overrides,
    apply_simulate_overrides,
    parse_config_data,
)
from .errors import TwdpError, ValidationError
from .gaussian import GaussianTwcSpec
from .runners import run_gaussian, run_region, run_simulate, run_verify
from .schemas import (
    GaussianRequest,
    GaussianResponse,
    HealthResponse,
    RegionRequest,
    RegionResponse,
    SimulateRequest,
    SimulateResponse,
    VerifyRequest,
    VerifyResponse,
)

app = FastAPI(title="twdp", version=__version__)


@app.exception_handler(TwdpError)
async def twdp_error_handler(request, exc: TwdpError):
    exit_code = 1 if isinstance(exc, ValidationError) else 2
    status = 400 if exit_code == 1 else 500
    return JSONResponse(status_code=status,
                        content={"detail": {"error": str(exc), "exit_code": exit_code}})


@app.get("/healthz", response_model=HealthResponse)
async def healthz():
    return {"status": "ok", "version": __version__}


@app.post("/region", response_model=RegionResponse, response_model_exclude_none=True)
async def region(req: RegionRequest):
    parsed = parse_config_data(req.config)
    if not isinstance(parsed, DiscreteConfig):
        raise ValidationError("region requires a config with kind 'discrete'")
    parsed = apply_region_overrides(parsed, grid_step=req.grid_step,
                                    aux_size=req.aux_size, max_pairs=req.max_pairs)
    return run_region(parsed, convexify_flag=req.convexify)


@app.post("/gaussian", response_model=GaussianResponse)
async def gaussian(req: GaussianRequest):
    parsed = parse_config_data(req.config)
    if not isinstance(parsed, GaussianTwcSpec):
        raise ValidationError("gaussian requires a config with kind 'gaussian'")
    return run_gaussian(parsed)


@app.post("/simulate", response_model=SimulateResponse)
async def simulate(req: SimulateRequest):
    parsed = parse_config_data(req.config)
    if not isinstance(parsed, SimulateBundle):
        raise ValidationError("simulate requires a config with kind 'simulate'")
    parsed = apply_simulate_overrides(parsed, seed=req.seed, trials=req.trials,
                                      epsilon=req.epsilon, bin_rate1=req.bin_rate1,
                                      bin_rate2=req.bin_rate2)
    return run_simulate(parsed)


@app.post("/verify", response_model=VerifyResponse)
async def verify(req: VerifyRequest):
    return run_verify(parse_config_data(req.config))
