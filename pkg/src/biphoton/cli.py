"""Command-line interface.

Thin client over the library: every subcommand loads a RunConfig (the
bundled measured-device preset unless --config is given), calls the
corresponding library entry point, and serializes the result as CSV or
JSON.  All floats are formatted with %.12g so outputs are byte-stable.

Exit codes: 0 success; 2 configuration/validation problems; 3 numeric
or resolution failures; 4 fit failures.  Errors are emitted as a single
JSON object on stderr.
"""

from __future__ import annotations

import json
import math
import os
import sys
from dataclasses import replace

import click
import numpy as np

from . import cavity, fitting, hom, jsa, phasematch, tomography
from ._parallel import thread_count
from .config import RunConfig, default_config, load_config
from .errors import (
    BiphotonError,
    DegenerateFitError,
    FitNonConvergenceError,
    PhaseMatchError,
    ResolutionError,
)

_EXIT_CONFIG = 2
_EXIT_NUMERIC = 3
_EXIT_FIT = 4


def _fmt(x) -> str:
    return format(float(x), ".12g")


def _csv(header: list[str], rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(cell if isinstance(cell, str) else _fmt(cell) for cell in row))
    return "\n".join(lines) + "\n"


def _emit(text: str, path: str) -> None:
    if path == "-":
        click.echo(text, nl=False)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _json_text(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _finite_or_none(x: float):
    x = float(x)
    return x if math.isfinite(x) else None


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, (FitNonConvergenceError, DegenerateFitError)):
        return _EXIT_FIT
    if isinstance(exc, (ResolutionError, PhaseMatchError)):
        return _EXIT_NUMERIC
    return _EXIT_CONFIG


def _fail(subcommand: str, exc: BaseException) -> None:
    payload = {
        "error": type(exc).__name__,
        "message": str(exc),
        "subcommand": subcommand,
    }
    click.echo(json.dumps(payload, sort_keys=True), err=True)
    raise SystemExit(_exit_code(exc))


def _guard(subcommand: str, fn) -> None:
    try:
        fn()
    except (BiphotonError, ValueError, OSError) as exc:
        _fail(subcommand, exc)


@click.group()
@click.option(
    "--config",
    "-c",
    "config_path",
    type=str,
    default=None,
    help="INI configuration file (defaults to the bundled device preset).",
)
@click.pass_context
def cli(ctx, config_path):
    """Simulation toolkit for a counterpropagating photon-pair source."""
    try:
        thread_count()
        ctx.obj = default_config() if config_path is None else load_config(config_path)
    except (BiphotonError, ValueError, OSError) as exc:
        _fail("config", exc)


def _out_path(cfg: RunConfig, output: str | None) -> str:
    return cfg.output.path if output is None else output


@cli.command()
@click.option("--theta-min-deg", type=float, default=-1.0, show_default=True)
@click.option("--theta-max-deg", type=float, default=1.0, show_default=True)
@click.option("--points", type=int, default=41, show_default=True)
@click.option("--output", "-o", type=str, default=None, help="File path or '-' for stdout.")
@click.pass_obj
def tunability(cfg: RunConfig, theta_min_deg, theta_max_deg, points, output):
    """Emission wavelengths of both interactions versus pump tilt (CSV)."""

    def run():
        if points < 2:
            raise ValueError("points must be >= 2")
        if not theta_max_deg > theta_min_deg:
            raise ValueError("theta-max-deg must exceed theta-min-deg")
        thetas = np.radians(np.linspace(theta_min_deg, theta_max_deg, points))
        curve = phasematch.tunability_curve(thetas, cfg.pump, cfg.dispersion)
        header = [
            "theta_deg",
            "lambda_s_HV_nm",
            "lambda_i_HV_nm",
            "lambda_s_VH_nm",
            "lambda_i_VH_nm",
        ]
        rows = [
            (
                math.degrees(pt.theta),
                phasematch.vacuum_wavelength(pt.omega_s_HV) * 1e9,
                phasematch.vacuum_wavelength(pt.omega_i_HV) * 1e9,
                phasematch.vacuum_wavelength(pt.omega_s_VH) * 1e9,
                phasematch.vacuum_wavelength(pt.omega_i_VH) * 1e9,
            )
            for pt in curve
        ]
        _emit(_csv(header, rows), _out_path(cfg, output))

    _guard("tunability", run)


def _jsi_wavelength_view(js: jsa.JointSpectrum):
    """JSI resampled onto ascending-wavelength axes (nm)."""
    lam_s = phasematch.vacuum_wavelength(js.omega_s_axis)[::-1] * 1e9
    lam_i = phasematch.vacuum_wavelength(js.omega_i_axis)[::-1] * 1e9
    grid = js.jsi()[::-1, ::-1]
    return lam_s, lam_i, grid


def _jsi_csv(lam_s, lam_i, grid) -> str:
    header = ["lambda_s_nm\\lambda_i_nm"] + [_fmt(v) for v in lam_i]
    rows = [[_fmt(lam_s[i])] + [_fmt(v) for v in grid[i]] for i in range(len(lam_s))]
    return "\n".join([",".join(header)] + [",".join(r) for r in rows]) + "\n"


def _sibling_path(path: str, label: str) -> str:
    root, ext = os.path.splitext(path)
    return f"{root}.{label}{ext or '.csv'}"


@cli.command()
@click.option("--marginals", is_flag=True, help="Also write the two marginal spectra.")
@click.option("--output", "-o", type=str, default=None)
@click.pass_obj
def jsi(cfg: RunConfig, marginals, output):
    """Joint spectral intensity on the configured grid (CSV matrix)."""

    def run():
        js = jsa.build_joint_spectrum(cfg.pump, cfg.dispersion, cfg.grid)
        lam_s, lam_i, grid = _jsi_wavelength_view(js)
        path = _out_path(cfg, output)
        main_text = _jsi_csv(lam_s, lam_i, grid)
        if not marginals:
            _emit(main_text, path)
            return
        sig, idl = jsa.marginal_spectra(js)
        sig_text = _csv(["lambda_s_nm", "intensity"], zip(lam_s, sig[::-1]))
        idl_text = _csv(["lambda_i_nm", "intensity"], zip(lam_i, idl[::-1]))
        if path == "-":
            _emit(main_text, path)
            click.echo("# signal_marginal")
            _emit(sig_text, path)
            click.echo("# idler_marginal")
            _emit(idl_text, path)
        else:
            _emit(main_text, path)
            _emit(sig_text, _sibling_path(path, "signal"))
            _emit(idl_text, _sibling_path(path, "idler"))

    _guard("jsi", run)


def _interferogram_csv(delays: np.ndarray, values: np.ndarray) -> str:
    return _csv(["tau_ps", "p_coincidence"], zip(delays * 1e12, values))


# Registered under the user-facing name "hom"; the function name avoids
# shadowing the hom module import.
@cli.command("hom")
@click.option("--tau-min-ps", type=float, default=-30.0, show_default=True)
@click.option("--tau-max-ps", type=float, default=30.0, show_default=True)
@click.option("--points", type=int, default=121, show_default=True)
@click.option(
    "--closed-form",
    is_flag=True,
    help="Evaluate the analytic interferogram instead of the grid quadrature.",
)
@click.option("--output", "-o", type=str, default=None)
@click.pass_obj
def hom_cmd(cfg: RunConfig, tau_min_ps, tau_max_ps, points, closed_form, output):
    """Ideal two-photon interferogram (CSV: tau_ps, p_coincidence)."""

    def run():
        if points < 2:
            raise ValueError("points must be >= 2")
        if not tau_max_ps > tau_min_ps:
            raise ValueError("tau-max-ps must exceed tau-min-ps")
        delays = np.linspace(tau_min_ps, tau_max_ps, points) * 1e-12
        if closed_form:
            mu = phasematch.spectral_separation_mu(cfg.pump, cfg.dispersion)
            width = phasematch.coincidence_envelope_width(cfg.pump, cfg.dispersion)
            values = hom.coincidence_closed_form(delays, mu, width)
        else:
            js = jsa.build_joint_spectrum(cfg.pump, cfg.dispersion, cfg.grid)
            values = hom.scan_interferogram(js, delays).values
        _emit(_interferogram_csv(delays, np.asarray(values)), _out_path(cfg, output))

    _guard("hom", run)


_MAX_RAW_SAMPLES = 200_000


def _raw_delays(tau_min: float, tau_max: float, pump) -> np.ndarray:
    step = (2.0 * math.pi / pump.omega_p) / cavity.FAST_SAMPLES_PER_PERIOD
    count = int(math.floor((tau_max - tau_min) / step)) + 1
    if count > _MAX_RAW_SAMPLES:
        raise ValueError(
            f"raw scan would need {count} samples at the fixed fs step; "
            "narrow the delay window or use --averaged"
        )
    return tau_min + step * np.arange(count)


def _cavity_spectrum(cfg: RunConfig, wg, points_per_fsr: float) -> jsa.JointSpectrum:
    gs = cavity.cavity_grid(
        cfg.pump, cfg.dispersion, wg,
        span_sigmas=cfg.grid.span_sigmas, points_per_fsr=points_per_fsr,
    )
    if gs.points < cfg.grid.points:
        gs = jsa.GridSpec(points=cfg.grid.points, span_sigmas=cfg.grid.span_sigmas)
    return jsa.build_joint_spectrum(cfg.pump, cfg.dispersion, gs)


@cli.command("hom-fp")
@click.option(
    "--reflectivity",
    type=float,
    default=None,
    help="Facet power reflectivity; overrides the configured value.",
)
@click.option(
    "--averaged/--raw",
    "averaged",
    default=False,
    help="Average out the pump-frequency modulation (default: raw).",
)
@click.option("--tau-min-ps", type=float, default=None,
              help="Default: -0.05 raw, -30 averaged.")
@click.option("--tau-max-ps", type=float, default=None,
              help="Default: +0.05 raw, +30 averaged.")
@click.option("--tau-step-ps", type=float, default=0.25, show_default=True,
              help="Output spacing in averaged mode.")
@click.option("--points", type=int, default=None,
              help="Evenly spaced raw delays (default: fs-resolved steps).")
@click.option("--points-per-fsr", type=float, default=9.0, show_default=True)
@click.option("--output", "-o", type=str, default=None)
@click.pass_obj
def hom_fp(cfg: RunConfig, reflectivity, averaged, tau_min_ps, tau_max_ps,
           tau_step_ps, points, points_per_fsr, output):
    """Interferogram with facet reflections (CSV: tau_ps, p_coincidence)."""

    def run():
        wg = cfg.waveguide
        if reflectivity is not None:
            wg = replace(wg, reflectivity_R=reflectivity)
        default_half = 30.0 if averaged else 0.05
        lo = -default_half if tau_min_ps is None else tau_min_ps
        hi = default_half if tau_max_ps is None else tau_max_ps
        if not hi > lo:
            raise ValueError("tau-max-ps must exceed tau-min-ps")
        if points is not None and (averaged or points < 2):
            raise ValueError("--points applies to raw scans and must be >= 2")
        if averaged:
            if tau_step_ps <= 0.0:
                raise ValueError("tau-step-ps must be positive")
            n = int(math.floor((hi - lo) / tau_step_ps + 1e-9)) + 1
            out_delays = (lo + tau_step_ps * np.arange(n)) * 1e-12
            js = _cavity_spectrum(cfg, wg, points_per_fsr)
            result = cavity.averaged_cavity_interferogram(js, wg, cfg.pump, out_delays)
        else:
            if points is not None:
                delays = np.linspace(lo, hi, points) * 1e-12
            else:
                delays = _raw_delays(lo * 1e-12, hi * 1e-12, cfg.pump)
            if wg.reflectivity_R == 0.0:
                # Zero reflectivity reduces exactly to the ideal
                # interferometer; reuse that kernel (and the configured
                # grid) so the two subcommands agree byte for byte.
                js = jsa.build_joint_spectrum(cfg.pump, cfg.dispersion, cfg.grid)
                result = hom.scan_interferogram(js, delays)
            else:
                js = _cavity_spectrum(cfg, wg, points_per_fsr)
                result = cavity.scan_cavity_interferogram(js, wg, delays)
        _emit(_interferogram_csv(result.delays, result.values), _out_path(cfg, output))

    _guard("hom-fp", run)


def _parse_fit_csv(text: str):
    """Rows of tau_ps,<counts|p_coincidence>[,sigma]; header optional.

    Returns (delays_s, values, sigmas_or_None, kind)."""
    rows = [line.strip() for line in text.splitlines()]
    rows = [r for r in rows if r and not r.startswith("#")]
    if not rows:
        raise ValueError("empty interferogram input")
    cells = [r.split(",") for r in rows]
    kind = "counts"
    start = 0
    try:
        float(cells[0][0])
    except ValueError:
        names = [c.strip().lower() for c in cells[0]]
        start = 1
        if len(names) < 2 or names[0] != "tau_ps":
            raise ValueError(
                f"unrecognized header {cells[0]!r}; expected tau_ps,counts[,sigma] "
                "or tau_ps,p_coincidence[,sigma]"
            ) from None
        if names[1] == "p_coincidence":
            kind = "probability"
        elif names[1] != "counts":
            raise ValueError(f"unrecognized value column {names[1]!r}") from None
        if len(names) > 3 or (len(names) == 3 and names[2] != "sigma"):
            raise ValueError(f"unrecognized header {cells[0]!r}") from None
    body = cells[start:]
    if not body:
        raise ValueError("no data rows in interferogram input")
    widths = {len(r) for r in body}
    if not widths <= {2, 3} or len(widths) != 1:
        raise ValueError("each data row must have 2 or 3 comma-separated columns")
    try:
        data = np.array([[float(c) for c in r] for r in body], dtype=float)
    except ValueError as exc:
        raise ValueError(f"non-numeric value in interferogram input: {exc}") from None
    delays = data[:, 0] * 1e-12
    values = data[:, 1]
    sigmas = data[:, 2] if data.shape[1] == 3 else None
    return delays, values, sigmas, kind


def _fit_payload(result: fitting.FitResult) -> dict:
    params = result.params
    values = {
        "V": params.V,
        "delta_tau": params.delta_tau,
        "mu": params.mu,
        "a": params.a,
        "b": params.b,
    }
    stderr = result.stderr()
    return {
        "params": {k: _finite_or_none(v) for k, v in values.items()},
        "stderr": {k: _finite_or_none(v) for k, v in stderr.items()},
        "covariance": [
            [_finite_or_none(v) for v in row] for row in np.asarray(result.covariance)
        ],
        "reduced_chi2": _finite_or_none(result.reduced_chi2),
        "iterations": int(result.iterations),
        "converged": bool(result.converged),
        "degenerate": sorted(result.degenerate),
    }


@cli.command()
@click.argument("input_path", metavar="INPUT", type=str)
@click.option(
    "--kind",
    type=click.Choice(["auto", "counts", "probability"]),
    default="auto",
    show_default=True,
    help="How to interpret the value column ('auto' trusts the header).",
)
@click.option("--max-iter", type=int, default=500, show_default=True)
@click.option("--output", "-o", type=str, default=None)
@click.pass_obj
def fit(cfg: RunConfig, input_path, kind, max_iter, output):
    """Fit the interferogram model to measured data (JSON result).

    INPUT is a CSV file of tau_ps,counts[,sigma] or
    tau_ps,p_coincidence[,sigma]; pass '-' to read stdin.
    """

    def run():
        text = sys.stdin.read() if input_path == "-" else _read_file(input_path)
        delays, values, sigmas, detected = _parse_fit_csv(text)
        resolved = detected if kind == "auto" else kind
        data = hom.Interferogram(delays, values, errors=sigmas, kind=resolved)
        result = fitting.fit_hom_interferogram(data, max_iter=max_iter)
        _emit(_json_text(_fit_payload(result)), _out_path(cfg, output))

    _guard("fit", run)


def _read_file(path: str) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


@cli.command()
@click.option("--p", "population", type=float, required=True,
              help="Population of the upper-frequency branch.")
@click.option("--visibility", type=float, required=True,
              help="Effective interference visibility in [0, 1].")
@click.option("--phi", type=float, default=0.0, show_default=True,
              help="Relative phase (radians).")
@click.option("--output", "-o", type=str, default=None)
@click.pass_obj
def tomo(cfg: RunConfig, population, visibility, phi, output):
    """Restricted density matrix and its derived metrics (JSON)."""

    def run():
        rho = tomography.build_density_matrix(population, visibility, phi)
        payload = {
            "p": population,
            "V": visibility,
            "phi": phi,
            "purity": tomography.purity(rho),
            "fidelity": tomography.fidelity_to_ideal(rho),
            "concurrence": tomography.concurrence(rho),
            "matrix_real": [[float(v) for v in row] for row in rho.matrix.real],
            "matrix_imag": [[float(v) for v in row] for row in rho.matrix.imag],
        }
        _emit(_json_text(payload), _out_path(cfg, output))

    _guard("tomo", run)


@cli.command()
@click.option("--host", type=str, default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@click.pass_obj
def serve(cfg: RunConfig, host, port):
    """Run the HTTP service wrapping the same operations."""
    import uvicorn

    from .service.app import create_app

    uvicorn.run(create_app(cfg), host=host, port=port)


main = cli

if __name__ == "__main__":
    main()
