"""Request/response models for the HTTP service.

Every request section (pump, dispersion, waveguide, grid) is optional;
omitted sections fall back to the server's loaded configuration.  Units
are encoded in the field names, matching the configuration file keys.
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field


class PumpParams(BaseModel):
    lambda_p_nm: float = 773.15
    pulse_fwhm_ps: float = 4.5
    waist_wz_mm: float = 1.0
    theta_deg: float = 0.0


class DispersionParams(BaseModel):
    n0_h: float = 3.162
    n0_v: float = 3.150
    n_group: float = 3.15
    lambda_ref_nm: float = 1546.3


class WaveguideParams(BaseModel):
    length_l_mm: float = 2.6
    reflectivity_r: float = 0.10
    modal_index_n: float = 3.15


class GridParams(BaseModel):
    points: int = Field(default=512, ge=64)
    span_sigmas: float = Field(default=5.0, ge=5.0)


class HealthResponse(BaseModel):
    status: Literal["ok"]
    version: str


class TunabilityRequest(BaseModel):
    pump: Optional[PumpParams] = None
    dispersion: Optional[DispersionParams] = None
    theta_min_deg: float = -1.0
    theta_max_deg: float = 1.0
    points: int = Field(default=41, ge=2)


class TunabilityRow(BaseModel):
    theta_deg: float
    lambda_s_hv_nm: float
    lambda_i_hv_nm: float
    lambda_s_vh_nm: float
    lambda_i_vh_nm: float


class TunabilityResponse(BaseModel):
    rows: list[TunabilityRow]


class JsiRequest(BaseModel):
    pump: Optional[PumpParams] = None
    dispersion: Optional[DispersionParams] = None
    grid: Optional[GridParams] = None
    include_marginals: bool = False


class JsiResponse(BaseModel):
    lambda_s_nm: list[float]
    lambda_i_nm: list[float]
    jsi: list[list[float]]
    population_p: float
    signal_marginal: Optional[list[float]] = None
    idler_marginal: Optional[list[float]] = None


class HomRequest(BaseModel):
    pump: Optional[PumpParams] = None
    dispersion: Optional[DispersionParams] = None
    grid: Optional[GridParams] = None
    tau_min_ps: float = -30.0
    tau_max_ps: float = 30.0
    points: int = Field(default=121, ge=2)
    closed_form: bool = False


class InterferogramResponse(BaseModel):
    tau_ps: list[float]
    p_coincidence: list[float]


class HomFpRequest(BaseModel):
    pump: Optional[PumpParams] = None
    dispersion: Optional[DispersionParams] = None
    grid: Optional[GridParams] = None
    waveguide: Optional[WaveguideParams] = None
    averaged: bool = False
    tau_min_ps: Optional[float] = None
    tau_max_ps: Optional[float] = None
    tau_step_ps: float = Field(default=0.25, gt=0.0)
    points: Optional[int] = Field(default=None, ge=2)
    points_per_fsr: float = Field(default=9.0, ge=8.0)


class FitRequest(BaseModel):
    tau_ps: list[float]
    values: list[float]
    kind: Literal["counts", "probability"] = "counts"
    sigma: Optional[list[float]] = None
    max_iter: int = Field(default=500, ge=1)


class FitParamsOut(BaseModel):
    V: Optional[float]
    delta_tau: Optional[float]
    mu: Optional[float]
    a: Optional[float]
    b: Optional[float]


class FitResponse(BaseModel):
    params: FitParamsOut
    stderr: FitParamsOut
    covariance: list[list[Optional[float]]]
    reduced_chi2: Optional[float]
    iterations: int
    converged: bool
    degenerate: list[str]


class TomoRequest(BaseModel):
    p: float
    visibility: float
    phi: float = 0.0


class TomoResponse(BaseModel):
    p: float
    V: float
    phi: float
    purity: float
    fidelity: float
    concurrence: float
    matrix_real: list[list[float]]
    matrix_imag: list[list[float]]
