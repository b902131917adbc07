"""Transverse-pump phase matching for counterpropagating pair generation.

A pump pulse incident on top of the guide at angle ``theta`` feeds two
simultaneous type-II interactions: HV (H-polarized signal along +z,
V-polarized idler along -z) and VH (polarizations swapped).  Energy
conservation fixes omega_s + omega_i = omega_p; momentum conservation
along the guide axis reads, per interaction,

    omega_p * sin(theta) = omega_s * n_H(omega_s) - omega_i * n_V(omega_i)   [HV]
    omega_p * sin(theta) = omega_s * n_V(omega_s) - omega_i * n_H(omega_i)   [VH]

Solving these gives the tunability curve (central wavelengths vs. theta)
and, at normal incidence, the spectral separation mu between the two
interactions set by the modal birefringence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .dispersion import C, DispersionModel, group_velocity, modal_index
from .errors import PhaseMatchError

# fraction of omega_p/2 bracketing the root search on either side
_BRACKET_LO = 0.6
_BRACKET_HI = 1.4


@dataclass(frozen=True)
class PumpConfig:
    """Pump beam parameters.

    lambda_p is the vacuum wavelength (m), pulse_fwhm the intensity FWHM
    duration (s), waist_wz the Gaussian spot waist along the guide (m)
    and theta the incidence angle (rad).
    """

    lambda_p: float
    pulse_fwhm: float
    waist_wz: float
    theta: float = 0.0

    def __post_init__(self):
        if not 0.5e-6 < self.lambda_p < 1.5e-6:
            raise ValueError(
                f"lambda_p = {self.lambda_p!r} m outside (0.5 um, 1.5 um)"
            )
        if self.pulse_fwhm <= 0.0:
            raise ValueError("pulse_fwhm must be positive")
        if self.waist_wz <= 0.0:
            raise ValueError("waist_wz must be positive")
        if not abs(self.theta) < math.pi / 2:
            raise ValueError("theta must satisfy |theta| < pi/2")

    @property
    def omega_p(self) -> float:
        """Pump angular frequency 2*pi*c/lambda_p (rad/s)."""
        return 2.0 * math.pi * C / self.lambda_p


@dataclass(frozen=True)
class TunabilityPoint:
    """Central signal/idler frequencies of both interactions at one angle."""

    theta: float
    omega_s_HV: float
    omega_i_HV: float
    omega_s_VH: float
    omega_i_VH: float


def paper_pump(theta: float = 0.0) -> PumpConfig:
    """Pump preset of the measured device: 773.15 nm, 4.5 ps, w_z = 1 mm."""
    return PumpConfig(
        lambda_p=773.15e-9, pulse_fwhm=4.5e-12, waist_wz=1.0e-3, theta=theta
    )


def momentum_mismatch(
    interaction: str, omega_s: float, pump: PumpConfig, model: DispersionModel
) -> float:
    """Axial momentum imbalance (in omega*n units, rad/s) at signal
    frequency ``omega_s``; a phase-matched root has mismatch zero."""
    omega_i = pump.omega_p - omega_s
    if interaction == "HV":
        guided = omega_s * modal_index("H", omega_s, model) - omega_i * modal_index(
            "V", omega_i, model
        )
    elif interaction == "VH":
        guided = omega_s * modal_index("V", omega_s, model) - omega_i * modal_index(
            "H", omega_i, model
        )
    else:
        raise ValueError(f"interaction must be 'HV' or 'VH', got {interaction!r}")
    return guided - pump.omega_p * math.sin(pump.theta)


def _solve_bracketed(f, lo: float, hi: float, rtol: float = 1e-13) -> float:
    """Root of f in [lo, hi] by bisection with Illinois-damped secant steps.

    Guaranteed to keep a sign-changing bracket; the secant candidate is
    used whenever it falls strictly inside, which gives superlinear
    convergence on the smooth monotone mismatch functions.
    """
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0.0) == (fhi > 0.0):
        raise PhaseMatchError(
            "no sign change in the search bracket: "
            f"mismatch({lo:.6e}) = {flo:.6e}, mismatch({hi:.6e}) = {fhi:.6e}"
        )
    side = 0  # which endpoint was retained last (-1 lo, +1 hi)
    for _ in range(200):
        if fhi != flo:
            x = hi - fhi * (hi - lo) / (fhi - flo)
        else:
            x = 0.5 * (lo + hi)
        if not lo < x < hi:
            x = 0.5 * (lo + hi)
        fx = f(x)
        if fx == 0.0:
            return x
        if (fx > 0.0) == (flo > 0.0):
            lo, flo = x, fx
            if side == -1:
                fhi *= 0.5  # Illinois damping: stop the stale endpoint pinning
            side = -1
        else:
            hi, fhi = x, fx
            if side == +1:
                flo *= 0.5
            side = +1
        if hi - lo <= rtol * max(abs(lo), abs(hi)):
            break
    return 0.5 * (lo + hi)


def solve_central_frequencies(
    pump: PumpConfig, model: DispersionModel
) -> TunabilityPoint:
    """Solve both interactions' momentum conservation for the central
    signal frequency (relative tolerance 1e-12); idler by energy
    conservation.  Raises PhaseMatchError when the bracket
    (0.6, 1.4) * omega_p/2 contains no root."""
    half = pump.omega_p / 2.0
    roots = {}
    for interaction in ("HV", "VH"):
        roots[interaction] = _solve_bracketed(
            lambda w, i=interaction: momentum_mismatch(i, w, pump, model),
            _BRACKET_LO * half,
            _BRACKET_HI * half,
        )
    return TunabilityPoint(
        theta=pump.theta,
        omega_s_HV=roots["HV"],
        omega_i_HV=pump.omega_p - roots["HV"],
        omega_s_VH=roots["VH"],
        omega_i_VH=pump.omega_p - roots["VH"],
    )


def tunability_curve(
    thetas, pump: PumpConfig, model: DispersionModel
) -> list[TunabilityPoint]:
    """Central frequencies of both interactions for each angle in ``thetas``."""
    return [
        solve_central_frequencies(replace(pump, theta=float(th)), model)
        for th in np.atleast_1d(np.asarray(thetas, dtype=float))
    ]


def spectral_separation_mu(pump: PumpConfig, model: DispersionModel) -> float:
    """Spectral separation mu = v_g * omega_p * (n0_H - n0_V) / (2c) between
    the two interactions' central frequencies (rad/s); positive when
    n_H > n_V, zero at degeneracy."""
    return (
        group_velocity(model) * pump.omega_p * model.birefringence / (2.0 * C)
    )


def intra_mode_width(pump: PumpConfig, model: DispersionModel) -> float:
    """Spectral width sqrt(2) * v_g / w_z of each interaction (rad/s); set by
    the pump spot size through the finite interaction length."""
    return math.sqrt(2.0) * group_velocity(model) / pump.waist_wz


def coincidence_envelope_width(pump: PumpConfig, model: DispersionModel) -> float:
    """Gaussian envelope width sqrt(2)/delta_omega_minus = w_z/v_g of the
    two-photon interference dip (s)."""
    return math.sqrt(2.0) / intra_mode_width(pump, model)


def vacuum_wavelength(omega) -> float:
    """Vacuum wavelength 2*pi*c/omega (m) for angular frequency omega."""
    omega = np.asarray(omega, dtype=float)
    lam = 2.0 * math.pi * C / omega
    return float(lam) if lam.ndim == 0 else lam
