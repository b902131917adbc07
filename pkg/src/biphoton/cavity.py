"""Facet Fabry-Pérot effects on the two-photon interferogram.

The waveguide facets form a weak cavity that mixes the counterpropagating
output directions.  Each facet acts as a frequency-dependent beamsplitter
with amplitude coefficients

    f_r(w) = sqrt(R(1-R)) e^{i 3 w n L / 2c} / (1 - R e^{i 2 w n L / c})
    f_t(w) = sqrt(1-R)    e^{i w n L / 2c}   / (1 - R e^{i 2 w n L / c})

(photon born at the waveguide center).  Propagating the two-interaction
state through the facets, the delay line and the beamsplitter leaves four
coincidence amplitudes A, B, C, D per frequency pair; the coincidence
probability is the quadrature of their squared moduli and exchange cross
terms.  Besides the ideal beat, the result carries a modulation at the
pump frequency (period 2 pi / omega_p, a few fs) that real delay lines
cannot resolve; averaging it over one period yields the effective
interferogram and its reduced visibility.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from ._parallel import parallel_map
from .dispersion import C, DispersionModel
from .errors import ResolutionError
from .hom import (
    _MAX_PHASE_PER_CELL,
    Interferogram,
    _clamp_probability,
    _trapezoid_weights,
)
from .jsa import GridSpec, JointSpectrum
from .phasematch import PumpConfig

# minimum grid samples per cavity free spectral range
_MIN_POINTS_PER_FSR = 8.0
# minimum raw samples inside one pump period for the sliding average
_MIN_SAMPLES_PER_WINDOW = 8
# unaveraged scans sample the pump-frequency modulation at period/16
FAST_SAMPLES_PER_PERIOD = 16


@dataclass(frozen=True)
class WaveguideConfig:
    """Cavity parameters: length L (m), intensity reflectivity R in
    [0, 1), and the modal index n shared by both polarizations."""

    length_L: float
    reflectivity_R: float
    modal_index_n: float

    def __post_init__(self):
        if self.length_L <= 0.0:
            raise ValueError("length_L must be positive")
        if not 0.0 <= self.reflectivity_R < 1.0:
            raise ValueError(
                f"reflectivity_R = {self.reflectivity_R!r} outside [0, 1)"
            )
        if self.modal_index_n <= 1.0:
            raise ValueError("modal_index_n must exceed 1")


def paper_waveguide(reflectivity: float = 0.10) -> WaveguideConfig:
    """Waveguide preset of the measured device: L = 2.6 mm, n = 3.15."""
    return WaveguideConfig(
        length_L=2.6e-3, reflectivity_R=reflectivity, modal_index_n=3.15
    )


def free_spectral_range(wg: WaveguideConfig) -> float:
    """Cavity FSR pi c / (n L) in angular frequency (rad/s)."""
    return math.pi * C / (wg.modal_index_n * wg.length_L)


def facet_amplitudes(omega, wg: WaveguideConfig):
    """Cavity reflection and transmission amplitudes (f_r, f_t) at
    angular frequency ``omega`` (scalar or array)."""
    if wg.reflectivity_R >= 1.0:
        raise ValueError("reflectivity_R = 1 makes the cavity singular")
    omega = np.asarray(omega, dtype=float)
    if np.any(omega <= 0.0):
        raise ValueError("omega must be positive")
    R = wg.reflectivity_R
    phase_half = omega * wg.modal_index_n * wg.length_L / (2.0 * C)
    denom = 1.0 - R * np.exp(1j * 4.0 * phase_half)
    f_r = math.sqrt(R * (1.0 - R)) * np.exp(1j * 3.0 * phase_half) / denom
    f_t = math.sqrt(1.0 - R) * np.exp(1j * phase_half) / denom
    if f_r.ndim == 0:
        return complex(f_r), complex(f_t)
    return f_r, f_t


def _interp2(vals: np.ndarray, axis: np.ndarray, w1, w2):
    """Bilinear interpolation of a square-grid field; zero outside."""
    h = float(axis[1] - axis[0])
    fx = (np.asarray(w1, dtype=float) - axis[0]) / h
    fy = (np.asarray(w2, dtype=float) - axis[0]) / h
    fx, fy = np.broadcast_arrays(fx, fy)
    inside = (fx >= 0) & (fx <= axis.size - 1) & (fy >= 0) & (fy <= axis.size - 1)
    i0 = np.clip(np.floor(fx).astype(int), 0, axis.size - 2)
    j0 = np.clip(np.floor(fy).astype(int), 0, axis.size - 2)
    tx = np.clip(fx - i0, 0.0, 1.0)
    ty = np.clip(fy - j0, 0.0, 1.0)
    out = (
        vals[i0, j0] * (1 - tx) * (1 - ty)
        + vals[i0 + 1, j0] * tx * (1 - ty)
        + vals[i0, j0 + 1] * (1 - tx) * ty
        + vals[i0 + 1, j0 + 1] * tx * ty
    )
    return np.where(inside, out, 0.0)


def _brackets(omega1, omega2, tau, wg: WaveguideConfig):
    """The two bracketed path sums multiplying the amplitudes: the '+'
    bracket (shared by A and C) and the '-' bracket (shared by B and D)."""
    fr1, ft1 = facet_amplitudes(omega1, wg)
    fr2, ft2 = facet_amplitudes(omega2, wg)
    u1 = np.exp(-1j * np.asarray(omega1, dtype=float) * tau)
    u2 = np.exp(-1j * np.asarray(omega2, dtype=float) * tau)
    common = 1j * ft1 * fr2 * u1 * u2 + 1j * fr1 * ft2
    rr = fr1 * fr2 * u2
    tt = 1j * ft1 * ft2 * u1
    return common + tt - rr, common - tt + rr


def mixed_coefficients(omega1, omega2, tau: float, js: JointSpectrum, wg: WaveguideConfig):
    """Coincidence-path coefficients (A, B, C, D) at frequency pair
    (omega1, omega2) and delay tau.

    A and D carry the HV amplitude, B and C the VH amplitude; A/C share
    the '+' bracket and B/D the '-' bracket.  Amplitudes are interpolated
    bilinearly from the stored grids (exact at grid nodes).
    """
    phi_hv = _interp2(js.amp_HV, js.omega_s_axis, omega1, omega2)
    phi_vh = _interp2(js.amp_VH, js.omega_s_axis, omega1, omega2)
    plus, minus = _brackets(omega1, omega2, tau, wg)
    return phi_hv * plus, phi_vh * minus, phi_vh * plus, phi_hv * minus


def _abs2(z: np.ndarray) -> np.ndarray:
    return z.real**2 + z.imag**2


class CavityKernel:
    """Precomputed state for scanning the cavity coincidence probability
    over many delays on a fixed joint spectrum and waveguide.

    Checks that the grid samples the cavity FSR with at least 8 points;
    rejecting coarser grids keeps the oscillatory Airy factors resolved.
    """

    def __init__(self, js: JointSpectrum, wg: WaveguideConfig):
        if not np.array_equal(js.omega_s_axis, js.omega_i_axis):
            raise ValueError("cavity quadrature requires identical signal/idler axes")
        self.axis = js.omega_s_axis
        self.wg = wg
        h = js.spacing
        per_fsr = free_spectral_range(wg) / h
        if per_fsr < _MIN_POINTS_PER_FSR:
            raise ResolutionError(
                f"grid has {per_fsr:.2f} points per cavity free spectral range "
                f"(minimum {_MIN_POINTS_PER_FSR:g}); increase grid points"
            )
        w2 = np.outer(_trapezoid_weights(self.axis.size), _trapezoid_weights(self.axis.size))
        w2 *= h * h
        self._g_hv = _abs2(js.amp_HV) * w2
        self._g_vh = _abs2(js.amp_VH) * w2
        self._x_hv = np.conj(js.amp_HV) * js.amp_VH.T * w2
        self._x_vh = np.conj(js.amp_VH) * js.amp_HV.T * w2
        f_r, f_t = facet_amplitudes(self.axis, wg)
        self._o_rr = np.outer(f_r, f_r)
        self._o_tr = np.outer(f_t, f_r)
        self._o_rt = np.outer(f_r, f_t)
        self._o_tt = np.outer(f_t, f_t)

    def _path_sums(self, tau: float):
        u = np.exp(-1j * self.axis * tau)
        qs = self._o_tr * np.outer(u, u)
        qs += self._o_rt
        qs *= 1j
        t = self._o_tt * u[:, None]
        t *= 1j
        p = self._o_rr * u[None, :]
        plus = qs + t
        plus -= p
        minus = qs - t
        minus += p
        return plus, minus

    def components(self, tau: float) -> tuple[float, float]:
        """(P_HV, P_VH) at one delay: each is a quarter of the sum of the
        two squared path amplitudes plus twice the real exchange term."""
        plus, minus = self._path_sums(tau)
        a2 = _abs2(plus)
        b2 = _abs2(minus)
        exch = np.conj(plus) * minus.T
        p_hv = 0.25 * (
            float(np.sum(self._g_hv * a2))
            + float(np.sum(self._g_vh * b2))
            + 2.0 * float(np.sum(self._x_hv * exch).real)
        )
        p_vh = 0.25 * (
            float(np.sum(self._g_vh * a2))
            + float(np.sum(self._g_hv * b2))
            + 2.0 * float(np.sum(self._x_vh * exch).real)
        )
        return p_hv, p_vh

    def coincidence(self, tau: float) -> float:
        h = float(self.axis[1] - self.axis[0])
        if h * abs(tau) > _MAX_PHASE_PER_CELL:
            raise ResolutionError(
                f"delay {tau:.3e} s advances the integrand phase by "
                f"{h * abs(tau):.3f} rad per grid cell (limit "
                f"{_MAX_PHASE_PER_CELL:.3f}); use a finer grid"
            )
        p_hv, p_vh = self.components(tau)
        return _clamp_probability(p_hv + p_vh)


def cavity_coincidence(tau: float, js: JointSpectrum, wg: WaveguideConfig) -> float:
    """Total coincidence probability P_HV + P_VH at one delay, including
    the facet cavity effect, by 2D trapezoid quadrature on the stored grid."""
    return CavityKernel(js, wg).coincidence(tau)


def scan_cavity_interferogram(
    js: JointSpectrum, wg: WaveguideConfig, delays, threads: int | None = None
) -> Interferogram:
    """Unaveraged (raw) cavity interferogram over an array of delays.

    To resolve the pump-frequency modulation the delay step must be a
    small fraction of 2 pi / omega_p; fast_delay_grid provides one.
    """
    kernel = CavityKernel(js, wg)
    delays = np.asarray(delays, dtype=float)
    values = parallel_map(kernel.coincidence, delays, threads)
    return Interferogram(delays=delays, values=np.array(values), kind="probability")


def fast_delay_grid(center: float, periods: float, pump: PumpConfig) -> np.ndarray:
    """Delay grid sampling the pump-frequency modulation at 16 points per
    period, spanning ``periods`` periods around ``center``."""
    period = 2.0 * math.pi / pump.omega_p
    step = period / FAST_SAMPLES_PER_PERIOD
    n = int(round(periods * FAST_SAMPLES_PER_PERIOD))
    return center + step * np.arange(-n // 2, n - n // 2 + 1)


def average_fast_oscillation(
    raw: Interferogram, pump: PumpConfig, out_delays=None
) -> Interferogram:
    """Sliding mean over one pump period (window 2 pi / omega_p) centered
    on each output delay.

    The mean is a trapezoid average of the raw samples falling inside
    each window; every window must contain at least 8 samples.  With the
    default ``out_delays=None`` the output keeps the raw delays whose
    window lies fully inside the sampled range.
    """
    period = 2.0 * math.pi / pump.omega_p
    delays = raw.delays
    if out_delays is None:
        inside = (delays >= delays[0] + period / 2.0) & (
            delays <= delays[-1] - period / 2.0
        )
        out_delays = delays[inside]
    out_delays = np.asarray(out_delays, dtype=float)
    values = np.empty(out_delays.size)
    for k, t in enumerate(out_delays):
        sel = (delays >= t - period / 2.0) & (delays <= t + period / 2.0)
        if np.count_nonzero(sel) < _MIN_SAMPLES_PER_WINDOW:
            raise ResolutionError(
                f"window at delay {t:.3e} s holds {np.count_nonzero(sel)} samples; "
                f"the pump period must contain at least {_MIN_SAMPLES_PER_WINDOW}"
            )
        x = delays[sel]
        y = raw.values[sel]
        span = x[-1] - x[0]
        if span <= 0.0:
            raise ResolutionError("degenerate averaging window")
        values[k] = np.trapezoid(y, x) / span
    return Interferogram(delays=out_delays, values=values, kind="probability")


def averaged_cavity_interferogram(
    js: JointSpectrum,
    wg: WaveguideConfig,
    pump: PumpConfig,
    out_delays,
    samples_per_window: int = FAST_SAMPLES_PER_PERIOD + 1,
    threads: int | None = None,
) -> Interferogram:
    """Time-averaged cavity interferogram on ``out_delays``.

    Scans the raw probability on a one-period window around each output
    delay (``samples_per_window`` samples, trapezoid endpoints included)
    and averages each window; this is the raw-scan + sliding-mean
    composition evaluated only where the windows sit.  Output delays must
    be spaced by more than one pump period.
    """
    out_delays = np.asarray(out_delays, dtype=float)
    period = 2.0 * math.pi / pump.omega_p
    if out_delays.size >= 2 and np.min(np.diff(out_delays)) <= period:
        raise ValueError(
            "output delays must be spaced by more than one pump period; "
            "use scan_cavity_interferogram for fs-resolved scans"
        )
    if samples_per_window < _MIN_SAMPLES_PER_WINDOW + 1:
        raise ValueError(
            f"samples_per_window must be at least {_MIN_SAMPLES_PER_WINDOW + 1}"
        )
    offsets = np.linspace(-period / 2.0, period / 2.0, samples_per_window)
    fine = (out_delays[:, None] + offsets[None, :]).ravel()
    raw = scan_cavity_interferogram(js, wg, fine, threads)
    return average_fast_oscillation(raw, pump, out_delays)


def effective_visibility(avg: Interferogram):
    """Visibility of an averaged interferogram: fit of the measurement
    model with the drift terms a and b fixed to zero; returns the fitted V."""
    from .fitting import fit_hom_interferogram, initial_guess

    init = initial_guess(avg)
    init = replace(init, a=0.0, b=0.0)
    result = fit_hom_interferogram(avg, init=init, fixed=("a", "b"))
    return result.params.V


def cavity_grid(
    pump: PumpConfig,
    model: DispersionModel,
    wg: WaveguideConfig,
    span_sigmas: float = 5.0,
    points_per_fsr: float = 9.0,
) -> GridSpec:
    """Grid spec whose frequency axis samples the cavity FSR at
    ``points_per_fsr`` across the full joint-spectrum support."""
    from .jsa import grid_axis

    probe = grid_axis(pump, model, GridSpec(points=64, span_sigmas=span_sigmas))
    width = float(probe[-1] - probe[0])
    points = max(64, int(math.ceil(points_per_fsr * width / free_spectral_range(wg))) + 1)
    return GridSpec(points=points, span_sigmas=span_sigmas)
