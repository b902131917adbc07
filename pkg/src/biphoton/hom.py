"""Hong-Ou-Mandel coincidence probability versus relative delay.

Three routes to the interferogram:

* direct 2D quadrature of the two-interaction amplitude overlap,
    P_c(tau) = 1/2 - Re[ iint phi_HV(w, w') phi_VH*(w', w) e^{-i(w-w')tau} dw dw' ]
* the closed form for Gaussian amplitudes,
    P_c(tau) = 1/2 - 1/2 exp(-tau^2/(2 dtau^2)) cos(mu tau)
* the measurement model with visibility and a linear drift,
    P(tau) = 1/2 (1 - V exp(-tau^2/(2 dtau^2)) cos(mu tau)) + a tau + b

The quadrature and the closed form must agree to better than 1e-6; that
equivalence is the module's core correctness oracle.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ._parallel import parallel_map
from .errors import ResolutionError
from .jsa import JointSpectrum

# phase advance of the oscillatory factor per grid cell above which the
# trapezoid quadrature is no longer trusted
_MAX_PHASE_PER_CELL = np.pi / 4.0
# probability excursions beyond [0,1] larger than this are reported
_CLAMP_TOL = 1e-6


@dataclass(frozen=True)
class Interferogram:
    """Sampled interferogram: coincidence probability (or raw counts)
    versus signal-idler delay."""

    delays: np.ndarray
    values: np.ndarray
    errors: np.ndarray | None = None
    kind: str = "probability"

    def __post_init__(self):
        delays = np.asarray(self.delays, dtype=float)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "delays", delays)
        object.__setattr__(self, "values", values)
        if delays.ndim != 1 or delays.shape != values.shape:
            raise ValueError("delays and values must be 1D arrays of equal length")
        if delays.size >= 2 and np.any(np.diff(delays) <= 0.0):
            raise ValueError("delays must be strictly increasing")
        if self.kind not in ("probability", "counts"):
            raise ValueError(f"kind must be 'probability' or 'counts', got {self.kind!r}")
        if np.any(values < 0.0):
            raise ValueError("values must be non-negative")
        if self.kind == "probability" and np.any(values > 1.0 + 1e-9):
            raise ValueError("probability values must not exceed 1")
        if self.errors is not None:
            errors = np.asarray(self.errors, dtype=float)
            object.__setattr__(self, "errors", errors)
            if errors.shape != values.shape:
                raise ValueError("errors must match values in length")
            if np.any(errors < 0.0):
                raise ValueError("errors must be non-negative")


@dataclass(frozen=True)
class HomFitParams:
    """Parameters of the measurement model: visibility V, Gaussian
    envelope width delta_tau (s), beat frequency mu (rad/s), linear drift
    slope a (1/s) and offset b."""

    V: float
    delta_tau: float
    mu: float
    a: float = 0.0
    b: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.V <= 1.0:
            raise ValueError(f"V = {self.V!r} outside [0, 1]")
        if self.delta_tau <= 0.0:
            raise ValueError("delta_tau must be positive")

    def as_array(self) -> np.ndarray:
        return np.array([self.V, self.delta_tau, self.mu, self.a, self.b])


def coincidence_closed_form(tau, mu: float, delta_tau: float):
    """Ideal-state coincidence probability
    1/2 - 1/2 exp(-tau^2/(2 delta_tau^2)) cos(mu tau)."""
    if delta_tau <= 0.0:
        raise ValueError("delta_tau must be positive")
    tau = np.asarray(tau, dtype=float)
    p = 0.5 - 0.5 * np.exp(-(tau**2) / (2.0 * delta_tau**2)) * np.cos(mu * tau)
    return float(p) if p.ndim == 0 else p


def fit_model(tau, params: HomFitParams):
    """Measurement model 1/2 (1 - V e^{-tau^2/2 dtau^2} cos(mu tau)) + a tau + b."""
    tau = np.asarray(tau, dtype=float)
    beat = np.exp(-(tau**2) / (2.0 * params.delta_tau**2)) * np.cos(params.mu * tau)
    val = 0.5 * (1.0 - params.V * beat) + params.a * tau + params.b
    return float(val) if val.ndim == 0 else val


def _trapezoid_weights(n: int) -> np.ndarray:
    w = np.ones(n)
    w[0] = w[-1] = 0.5
    return w


class OverlapKernel:
    """Precomputed quadrature kernel for scanning the exchange overlap
    over many delays.

    The integrand phi_HV(w,w') phi_VH*(w',w) e^{-i(w-w')tau} factorizes
    in the oscillation: e^{-i(w-w')tau} = u(w) conj(u(w')) with
    u = e^{-iw tau}, so each delay costs one matrix-vector product.
    """

    def __init__(self, js: JointSpectrum):
        if not np.array_equal(js.omega_s_axis, js.omega_i_axis):
            raise ValueError("overlap quadrature requires identical signal/idler axes")
        self.axis = js.omega_s_axis
        self.spacing = js.spacing
        w = _trapezoid_weights(self.axis.size)
        self.kernel = (
            js.amp_HV
            * np.conj(js.amp_VH).T
            * np.outer(w, w)
            * self.spacing**2
        )

    def overlap(self, tau: float) -> complex:
        u = np.exp(-1j * self.axis * tau)
        return complex(u @ (self.kernel @ np.conj(u)))

    def coincidence(self, tau: float) -> float:
        if self.spacing * abs(tau) > _MAX_PHASE_PER_CELL:
            raise ResolutionError(
                f"delay {tau:.3e} s advances the oscillatory phase by "
                f"{self.spacing * abs(tau):.2f} rad per grid cell (limit "
                f"{_MAX_PHASE_PER_CELL:.2f}); rebuild the joint spectrum with a finer grid"
            )
        return _clamp_probability(0.5 - self.overlap(tau).real)


def _clamp_probability(p: float) -> float:
    if p < -_CLAMP_TOL or p > 1.0 + _CLAMP_TOL:
        warnings.warn(
            f"coincidence probability {p:.3e} outside [0, 1] beyond tolerance; "
            "clamped — the grid is likely under-resolved",
            stacklevel=3,
        )
    return float(min(max(p, 0.0), 1.0))


def coincidence_quadrature(js: JointSpectrum, tau: float) -> float:
    """Coincidence probability at one delay by 2D trapezoid quadrature of
    the exchange overlap on the stored grid."""
    return OverlapKernel(js).coincidence(tau)


def scan_interferogram(
    js: JointSpectrum, delays, threads: int | None = None
) -> Interferogram:
    """Quadrature interferogram over an array of delays (seconds)."""
    kernel = OverlapKernel(js)
    delays = np.asarray(delays, dtype=float)
    values = parallel_map(kernel.coincidence, delays, threads)
    return Interferogram(delays=delays, values=np.array(values), kind="probability")
