"""Pydantic request/response models for the HTTP service.

Requests carry the raw config document plus optional overrides, so the
server is the single place where validation happens; responses mirror the
runner dicts shallowly.
"""
from __future__ import annotations

from pydantic import BaseModel, Field


class RegionRequest(BaseModel):
    config: dict
    grid_step: float | None = None
    aux_size: list[int] | None = Field(default=None, description="one value for both users or [aux1, aux2]")
    max_pairs: int | None = None
    convexify: bool = False


class GaussianRequest(BaseModel):
    config: dict


class SimulateRequest(BaseModel):
    config: dict
    seed: int | None = None
    trials: int | None = None
    epsilon: float | None = None
    bin_rate1: float | None = None
    bin_rate2: float | None = None


class VerifyRequest(BaseModel):
    config: dict


class RatePoint(BaseModel):
    r1: float
    r2: float
    is_frontier: bool


class FrontierEntry(BaseModel):
    r1: float
    r2: float
    policy1: dict
    policy2: dict


class RegionResponse(BaseModel):
    command: str
    grid_step: float
    aux_sizes: list[int]
    num_points: int
    points: list[RatePoint]
    frontier: list[FrontierEntry]
    convex_hull: list[dict] | None = None
    config_echo: dict


class GaussianResponse(BaseModel):
    command: str
    spec_echo: dict
    coefficients: dict
    capacity: dict
    gp_rate: dict
    capacity_gap: float
    orthogonality: dict
    entropy_identity: dict


class SimulateRun(BaseModel):
    n: int
    num_messages1: int
    num_messages2: int
    num_bins1: int
    num_bins2: int
    p_err1: float
    p_err2: float
    encode_fail1: float
    encode_fail2: float
    p_err1_half_width: float
    p_err2_half_width: float
    encode_fail1_half_width: float
    encode_fail2_half_width: float


class SimulateResponse(BaseModel):
    command: str
    trials: int
    seed: int
    epsilon: float
    rate1: float
    rate2: float
    bin_rate1: float
    bin_rate2: float
    runs: list[SimulateRun]
    config_echo: dict


class VerifyProperty(BaseModel):
    name: str
    passed: bool
    detail: str


class VerifyResponse(BaseModel):
    command: str
    kind: str
    properties: list[VerifyProperty]
    all_passed: bool


class HealthResponse(BaseModel):
    status: str
    version: str
