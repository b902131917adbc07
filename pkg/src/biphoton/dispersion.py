"""Linear modal dispersion for the two guided polarizations.

The guide is modeled by a first-order expansion of the effective index
around a reference frequency:

    n_pol(omega) = n0_pol + (n_g - n0_pol) * (omega - omega_ref) / omega_ref

Both polarizations share the group index n_g, so they walk off in phase
but not in group delay.  That single shared slope is what makes the
down-converted pair spectra Gaussian with a common width while the
birefringence n0_H - n0_V splits their central frequencies.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

C = 299792458.0  # vacuum speed of light, m/s

_POLS = ("H", "V")


@dataclass(frozen=True)
class DispersionModel:
    """Linear index model shared by the two polarizations.

    Parameters
    ----------
    n0_H, n0_V : float
        Effective phase indices at the reference frequency.
    n_g : float
        Group index, identical for both polarizations.
    omega_ref : float
        Reference angular frequency (rad/s) at which n0 is quoted.
    """

    n0_H: float
    n0_V: float
    n_g: float
    omega_ref: float

    def __post_init__(self):
        for name in ("n0_H", "n0_V", "n_g"):
            val = getattr(self, name)
            if not 1.0 < val < 10.0:
                raise ValueError(f"{name} = {val!r} outside the physical range (1, 10)")
        if abs(self.n0_H - self.n0_V) >= 0.1:
            raise ValueError(
                f"birefringence |n0_H - n0_V| = {abs(self.n0_H - self.n0_V)!r} "
                "too large for the linear model (must be < 0.1)"
            )
        if self.omega_ref <= 0.0:
            raise ValueError(f"omega_ref = {self.omega_ref!r} must be positive")

    @property
    def birefringence(self) -> float:
        """Index splitting n0_H - n0_V at the reference frequency."""
        return self.n0_H - self.n0_V


def modal_index(pol: str, omega, model: DispersionModel):
    """Effective index of polarization ``pol`` at angular frequency ``omega``.

    ``omega`` may be a scalar or an array (rad/s, strictly positive).
    """
    if pol not in _POLS:
        raise ValueError(f"pol must be 'H' or 'V', got {pol!r}")
    omega = np.asarray(omega, dtype=float)
    if np.any(omega <= 0.0):
        raise ValueError("omega must be positive")
    n0 = model.n0_H if pol == "H" else model.n0_V
    n = n0 + (model.n_g - n0) * (omega - model.omega_ref) / model.omega_ref
    return float(n) if n.ndim == 0 else n


def group_velocity(model: DispersionModel) -> float:
    """Common group velocity c / n_g (m/s).

    With the linear index the group index n + omega * dn/domega evaluates
    to n_g at omega_ref for either polarization, so a single number
    describes both wavepackets.
    """
    return C / model.n_g


def paper_device() -> DispersionModel:
    """Dispersion preset for the measured AlGaAs ridge guide.

    n0_H = 3.162, n0_V = 3.150, n_g = 3.15, referenced at 1546.3 nm.
    """
    return DispersionModel(
        n0_H=3.162,
        n0_V=3.150,
        n_g=3.15,
        omega_ref=2.0 * np.pi * C / 1546.3e-9,
    )
