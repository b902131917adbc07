"""Joint spectral amplitudes of the two interactions and derived spectra.

With a narrow-band pump and negligible group-velocity dispersion each
interaction's amplitude separates in the rotated frequency coordinates
omega_plus = omega + omega', omega_minus = omega - omega':

    phi_alpha(omega, omega') = phi_spec(omega_plus) * phi_pm_alpha(omega_minus)

phi_spec is the (transform-limited Gaussian) pump spectrum enforcing
energy conservation; phi_pm_alpha is the phase-matching function set by
the pump spot, a Gaussian of width delta_omega_minus centered at +mu for
HV and -mu for VH.  The combined two-interaction state is normalized to
unit total probability on the grid; the sqrt(pi)*w_z prefactor of the
phase-matching functions is absorbed by that normalization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dispersion import DispersionModel
from .errors import ResolutionError
from .phasematch import PumpConfig, intra_mode_width, spectral_separation_mu

# relative norm error above which a grid is rejected as under-resolved
_NORM_TOL = 1e-6


@dataclass(frozen=True)
class GridSpec:
    """Square frequency grid: ``points`` samples per axis, extending
    ``span_sigmas`` standard deviations beyond each spectral peak in both
    the omega_plus and omega_minus directions."""

    points: int = 512
    span_sigmas: float = 5.0

    def __post_init__(self):
        if self.points < 64:
            raise ValueError("grid needs at least 64 points per axis")
        if self.span_sigmas < 5.0:
            raise ValueError("span_sigmas must be >= 5 to keep truncation error negligible")


@dataclass(frozen=True)
class JointSpectrum:
    """Normalized joint spectral amplitudes of both interactions on a
    uniform square grid.

    ``amp_HV[i, j]`` is the amplitude for a signal photon at
    ``omega_s_axis[i]`` and an idler photon at ``omega_i_axis[j]``.
    ``normalization`` is the scalar the raw separable product was divided
    by, so that sum(|amp_HV|^2 + |amp_VH|^2) * dw * dw' = 1.
    """

    omega_s_axis: np.ndarray
    omega_i_axis: np.ndarray
    amp_HV: np.ndarray
    amp_VH: np.ndarray
    normalization: float

    def __post_init__(self):
        for name in ("omega_s_axis", "omega_i_axis"):
            axis = getattr(self, name)
            steps = np.diff(axis)
            if axis.ndim != 1 or axis.size < 2 or np.any(steps <= 0):
                raise ValueError(f"{name} must be 1D and strictly increasing")
            if not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
                raise ValueError(f"{name} must be uniformly spaced")

    @property
    def spacing(self) -> float:
        """Grid step of the signal axis (rad/s)."""
        return float(self.omega_s_axis[1] - self.omega_s_axis[0])

    def jsi(self) -> np.ndarray:
        """Joint spectral intensity |amp_HV|^2 + |amp_VH|^2."""
        return np.abs(self.amp_HV) ** 2 + np.abs(self.amp_VH) ** 2


def sigma_plus(pump: PumpConfig) -> float:
    """Pump spectral width sigma_+ = 2*sqrt(ln 2)/pulse_fwhm (rad/s) of a
    transform-limited Gaussian pulse whose intensity FWHM is pulse_fwhm."""
    return 2.0 * math.sqrt(math.log(2.0)) / pump.pulse_fwhm


def pump_spectral_amplitude(omega_plus, pump: PumpConfig):
    """Pump spectrum exp(-(omega_+ - omega_p)^2 / (4 sigma_+^2)), peak 1."""
    omega_plus = np.asarray(omega_plus, dtype=float)
    s = sigma_plus(pump)
    amp = np.exp(-((omega_plus - pump.omega_p) ** 2) / (4.0 * s * s))
    return float(amp) if amp.ndim == 0 else amp


def phase_matching_amplitude(
    interaction: str, omega_minus, pump: PumpConfig, model: DispersionModel
):
    """Phase-matching amplitude sqrt(pi)*w_z*exp(-(omega_- +- mu)^2 /
    (2 delta_omega_-^2)); centered at -mu for HV and +mu for VH, matching
    the central-frequency solver: when n_H > n_V the interaction with the
    H-polarized signal phase-matches below degeneracy."""
    if interaction not in ("HV", "VH"):
        raise ValueError(f"interaction must be 'HV' or 'VH', got {interaction!r}")
    omega_minus = np.asarray(omega_minus, dtype=float)
    mu = spectral_separation_mu(pump, model)
    if interaction == "HV":
        mu = -mu
    dwm = intra_mode_width(pump, model)
    amp = (
        math.sqrt(math.pi)
        * pump.waist_wz
        * np.exp(-((omega_minus - mu) ** 2) / (2.0 * dwm * dwm))
    )
    return float(amp) if amp.ndim == 0 else amp


def joint_amplitude(
    interaction: str, omega_s, omega_i, pump: PumpConfig, model: DispersionModel
):
    """Unnormalized separable amplitude phi_spec(omega_s + omega_i) *
    phi_pm(omega_s - omega_i); broadcasts over array inputs."""
    omega_s = np.asarray(omega_s, dtype=float)
    omega_i = np.asarray(omega_i, dtype=float)
    return pump_spectral_amplitude(omega_s + omega_i, pump) * phase_matching_amplitude(
        interaction, omega_s - omega_i, pump, model
    )


def grid_axis(pump: PumpConfig, model: DispersionModel, grid: GridSpec) -> np.ndarray:
    """Frequency axis (shared by signal and idler) covering both spectral
    peaks out to ``span_sigmas`` amplitude standard deviations.

    The amplitude std of phi_spec in omega_+ is sqrt(2)*sigma_+ and that
    of phi_pm in omega_- is delta_omega_-; mapping the rotated extents
    back to (omega, omega') halves their sum.
    """
    s = grid.span_sigmas
    half_width = 0.5 * (
        s * math.sqrt(2.0) * sigma_plus(pump)
        + abs(spectral_separation_mu(pump, model))
        + s * intra_mode_width(pump, model)
    )
    center = pump.omega_p / 2.0
    return np.linspace(center - half_width, center + half_width, grid.points)


def build_joint_spectrum(
    pump: PumpConfig, model: DispersionModel, grid: GridSpec = GridSpec()
) -> JointSpectrum:
    """Evaluate both interactions' amplitudes on the square grid and
    normalize the combined state to unit probability.

    Raises ResolutionError when a stride-2 comparison estimates the
    norm's discretization error above 1e-6.
    """
    axis = grid_axis(pump, model, grid)
    w_s = axis[:, None]
    w_i = axis[None, :]
    amp_hv = joint_amplitude("HV", w_s, w_i, pump, model)
    amp_vh = joint_amplitude("VH", w_s, w_i, pump, model)
    h = float(axis[1] - axis[0])

    density = amp_hv**2 + amp_vh**2
    norm_fine = density.sum() * h * h
    if norm_fine <= 0.0:
        raise ResolutionError("joint spectrum has zero weight on the grid")
    norm_coarse = density[::2, ::2].sum() * (2.0 * h) ** 2
    if abs(norm_coarse - norm_fine) > _NORM_TOL * norm_fine:
        raise ResolutionError(
            "grid too coarse: estimated norm discretization error "
            f"{abs(norm_coarse - norm_fine) / norm_fine:.2e} exceeds {_NORM_TOL:g}; "
            "increase grid points"
        )

    scale = math.sqrt(norm_fine)
    return JointSpectrum(
        omega_s_axis=axis,
        omega_i_axis=axis.copy(),
        amp_HV=(amp_hv / scale).astype(np.complex128),
        amp_VH=(amp_vh / scale).astype(np.complex128),
        normalization=scale,
    )


def marginal_spectra(js: JointSpectrum) -> tuple[np.ndarray, np.ndarray]:
    """Signal and idler marginal intensity densities (each sums to 1 when
    multiplied by its axis spacing)."""
    jsi = js.jsi()
    h_s = float(js.omega_s_axis[1] - js.omega_s_axis[0])
    h_i = float(js.omega_i_axis[1] - js.omega_i_axis[0])
    signal = jsi.sum(axis=1) * h_i
    idler = jsi.sum(axis=0) * h_s
    return signal, idler


def extract_population_p(
    jsi_grid: np.ndarray, omega_s_axis: np.ndarray, omega_split: float | None = None
) -> float:
    """Population parameter p: fraction of the total JSI weight whose
    signal frequency lies above ``omega_split``.

    The split defaults to the center of the signal axis (the degeneracy
    frequency on a grid built by this module).  A row exactly at the
    split contributes half its weight to each side.
    """
    jsi_grid = np.asarray(jsi_grid, dtype=float)
    omega_s_axis = np.asarray(omega_s_axis, dtype=float)
    if jsi_grid.size == 0:
        raise ValueError("degenerate input: empty JSI grid")
    if jsi_grid.shape[0] != omega_s_axis.size:
        raise ValueError("signal axis length does not match the JSI grid")
    if np.any(jsi_grid < 0.0):
        raise ValueError("JSI grid must be non-negative")
    if omega_split is None:
        omega_split = 0.5 * (omega_s_axis[0] + omega_s_axis[-1])
    if not omega_s_axis[0] < omega_split < omega_s_axis[-1]:
        raise ValueError("omega_split must lie strictly inside the signal axis")
    row_weight = jsi_grid.sum(axis=1)
    total = row_weight.sum()
    if total <= 0.0:
        raise ValueError("degenerate input: JSI grid has zero total weight")
    above = row_weight[omega_s_axis > omega_split].sum()
    shared = row_weight[omega_s_axis == omega_split].sum()
    return float((above + 0.5 * shared) / total)


def amplitude_on_sum_difference_axes(
    interaction: str,
    omega_plus_axis: np.ndarray,
    omega_minus_axis: np.ndarray,
    pump: PumpConfig,
    model: DispersionModel,
) -> np.ndarray:
    """Amplitude evaluated on a product grid of rotated coordinates
    (omega_+, omega_-), i.e. at omega = (omega_+ + omega_-)/2 and
    omega' = (omega_+ - omega_-)/2.

    In these axes a separable amplitude is an exact outer product
    (rank 1), which is what the spectral-decomposition tests probe.
    """
    wp = np.asarray(omega_plus_axis, dtype=float)[:, None]
    wm = np.asarray(omega_minus_axis, dtype=float)[None, :]
    return joint_amplitude(
        interaction, (wp + wm) / 2.0, (wp - wm) / 2.0, pump, model
    )
