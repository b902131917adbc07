"""FastAPI application exposing the library operations.

Validation problems (bad parameter values) map to 422; numeric failures
(resolution, root bracketing, fit non-convergence) map to 400 with a
JSON body naming the error type.
"""

from __future__ import annotations

import math

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import cavity, fitting, hom, jsa, phasematch, tomography
from ..cli import _cavity_spectrum, _fit_payload, _raw_delays
from ..config import (
    RunConfig,
    default_config,
    dispersion_from_units,
    pump_from_units,
    waveguide_from_units,
)
from ..errors import (
    BiphotonError,
    ConfigError,
    PhysicalityError,
)
from . import schemas

from .. import __version__ as _VERSION

_VALIDATION_ERRORS = (ConfigError, PhysicalityError)


def _status_for(exc: Exception) -> int:
    if isinstance(exc, (ValueError, *_VALIDATION_ERRORS)):
        return 422
    return 400


def _pump(cfg: RunConfig, params: schemas.PumpParams | None):
    if params is None:
        return cfg.pump
    return pump_from_units(**params.model_dump())


def _dispersion(cfg: RunConfig, params: schemas.DispersionParams | None):
    if params is None:
        return cfg.dispersion
    return dispersion_from_units(**params.model_dump())


def _waveguide(cfg: RunConfig, params: schemas.WaveguideParams | None):
    if params is None:
        return cfg.waveguide
    return waveguide_from_units(**params.model_dump())


def _grid(cfg: RunConfig, params: schemas.GridParams | None):
    if params is None:
        return cfg.grid
    return jsa.GridSpec(**params.model_dump())


def create_app(cfg: RunConfig | None = None) -> FastAPI:
    cfg = default_config() if cfg is None else cfg
    app = FastAPI(title="biphoton", version=_VERSION)

    @app.exception_handler(BiphotonError)
    async def _biphoton_error(request: Request, exc: BiphotonError):
        return JSONResponse(
            status_code=_status_for(exc),
            content={"error": type(exc).__name__, "message": str(exc)},
        )

    @app.exception_handler(ValueError)
    async def _value_error(request: Request, exc: ValueError):
        return JSONResponse(
            status_code=422,
            content={"error": type(exc).__name__, "message": str(exc)},
        )

    @app.get("/health", response_model=schemas.HealthResponse)
    def health():
        return schemas.HealthResponse(status="ok", version=_VERSION)

    @app.post("/tunability", response_model=schemas.TunabilityResponse)
    def tunability(req: schemas.TunabilityRequest):
        if not req.theta_max_deg > req.theta_min_deg:
            raise ValueError("theta_max_deg must exceed theta_min_deg")
        pump = _pump(cfg, req.pump)
        model = _dispersion(cfg, req.dispersion)
        thetas = np.radians(np.linspace(req.theta_min_deg, req.theta_max_deg, req.points))
        rows = [
            schemas.TunabilityRow(
                theta_deg=math.degrees(pt.theta),
                lambda_s_hv_nm=phasematch.vacuum_wavelength(pt.omega_s_HV) * 1e9,
                lambda_i_hv_nm=phasematch.vacuum_wavelength(pt.omega_i_HV) * 1e9,
                lambda_s_vh_nm=phasematch.vacuum_wavelength(pt.omega_s_VH) * 1e9,
                lambda_i_vh_nm=phasematch.vacuum_wavelength(pt.omega_i_VH) * 1e9,
            )
            for pt in phasematch.tunability_curve(thetas, pump, model)
        ]
        return schemas.TunabilityResponse(rows=rows)

    @app.post("/jsi", response_model=schemas.JsiResponse)
    def jsi_endpoint(req: schemas.JsiRequest):
        pump = _pump(cfg, req.pump)
        model = _dispersion(cfg, req.dispersion)
        js = jsa.build_joint_spectrum(pump, model, _grid(cfg, req.grid))
        lam_s = phasematch.vacuum_wavelength(js.omega_s_axis)[::-1] * 1e9
        lam_i = phasematch.vacuum_wavelength(js.omega_i_axis)[::-1] * 1e9
        grid = js.jsi()[::-1, ::-1]
        pop = jsa.extract_population_p(js.jsi(), js.omega_s_axis)
        payload = schemas.JsiResponse(
            lambda_s_nm=lam_s.tolist(),
            lambda_i_nm=lam_i.tolist(),
            jsi=grid.tolist(),
            population_p=pop,
        )
        if req.include_marginals:
            sig, idl = jsa.marginal_spectra(js)
            payload.signal_marginal = sig[::-1].tolist()
            payload.idler_marginal = idl[::-1].tolist()
        return payload

    @app.post("/hom", response_model=schemas.InterferogramResponse)
    def hom_endpoint(req: schemas.HomRequest):
        if not req.tau_max_ps > req.tau_min_ps:
            raise ValueError("tau_max_ps must exceed tau_min_ps")
        pump = _pump(cfg, req.pump)
        model = _dispersion(cfg, req.dispersion)
        delays = np.linspace(req.tau_min_ps, req.tau_max_ps, req.points) * 1e-12
        if req.closed_form:
            mu = phasematch.spectral_separation_mu(pump, model)
            width = phasematch.coincidence_envelope_width(pump, model)
            values = np.asarray(hom.coincidence_closed_form(delays, mu, width))
        else:
            js = jsa.build_joint_spectrum(pump, model, _grid(cfg, req.grid))
            values = hom.scan_interferogram(js, delays).values
        return schemas.InterferogramResponse(
            tau_ps=(delays * 1e12).tolist(), p_coincidence=values.tolist()
        )

    @app.post("/hom-fp", response_model=schemas.InterferogramResponse)
    def hom_fp_endpoint(req: schemas.HomFpRequest):
        pump = _pump(cfg, req.pump)
        model = _dispersion(cfg, req.dispersion)
        wg = _waveguide(cfg, req.waveguide)
        grid_spec = _grid(cfg, req.grid)
        run_cfg = RunConfig(pump=pump, dispersion=model, waveguide=wg,
                            grid=grid_spec, output=cfg.output)
        default_half = 30.0 if req.averaged else 0.05
        lo = -default_half if req.tau_min_ps is None else req.tau_min_ps
        hi = default_half if req.tau_max_ps is None else req.tau_max_ps
        if not hi > lo:
            raise ValueError("tau_max_ps must exceed tau_min_ps")
        if req.points is not None and req.averaged:
            raise ValueError("points applies to raw scans only")
        if req.averaged:
            n = int(math.floor((hi - lo) / req.tau_step_ps + 1e-9)) + 1
            out_delays = (lo + req.tau_step_ps * np.arange(n)) * 1e-12
            js = _cavity_spectrum(run_cfg, wg, req.points_per_fsr)
            result = cavity.averaged_cavity_interferogram(js, wg, pump, out_delays)
        else:
            if req.points is not None:
                delays = np.linspace(lo, hi, req.points) * 1e-12
            else:
                delays = _raw_delays(lo * 1e-12, hi * 1e-12, pump)
            if wg.reflectivity_R == 0.0:
                js = jsa.build_joint_spectrum(pump, model, grid_spec)
                result = hom.scan_interferogram(js, delays)
            else:
                js = _cavity_spectrum(run_cfg, wg, req.points_per_fsr)
                result = cavity.scan_cavity_interferogram(js, wg, delays)
        return schemas.InterferogramResponse(
            tau_ps=(result.delays * 1e12).tolist(),
            p_coincidence=result.values.tolist(),
        )

    @app.post("/fit", response_model=schemas.FitResponse)
    def fit_endpoint(req: schemas.FitRequest):
        delays = np.asarray(req.tau_ps, dtype=float) * 1e-12
        values = np.asarray(req.values, dtype=float)
        sigma = None if req.sigma is None else np.asarray(req.sigma, dtype=float)
        data = hom.Interferogram(delays, values, errors=sigma, kind=req.kind)
        result = fitting.fit_hom_interferogram(data, max_iter=req.max_iter)
        return schemas.FitResponse(**_fit_payload(result))

    @app.post("/tomo", response_model=schemas.TomoResponse)
    def tomo_endpoint(req: schemas.TomoRequest):
        rho = tomography.build_density_matrix(req.p, req.visibility, req.phi)
        return schemas.TomoResponse(
            p=req.p,
            V=req.visibility,
            phi=req.phi,
            purity=tomography.purity(rho),
            fidelity=tomography.fidelity_to_ideal(rho),
            concurrence=tomography.concurrence(rho),
            matrix_real=[[float(v) for v in row] for row in rho.matrix.real],
            matrix_imag=[[float(v) for v in row] for row in rho.matrix.imag],
        )

    return app
