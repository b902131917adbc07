"""Restricted two-qubit tomography of the hybrid state.

The pair always carries crossed polarizations, so in the ordered basis

    e1 = |H w2>|V w1>,  e2 = |H w1>|V w2>,  e3 = |V w2>|H w1>,  e4 = |V w1>|H w2>

only the middle 2x2 block is populated: rho_22 = p, rho_33 = 1 - p and
rho_23 = (V/2) e^{i phi}.  Every metric then has a closed form — purity
p^2 + (1-p)^2 + V^2/2, fidelity to the ideal state (1 + V cos phi)/2,
concurrence V — and each is cross-checked against the full matrix
computation on every call.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import PhysicalityError

# matrix-vs-closed-form agreement required on every metric evaluation
_SELF_CHECK_TOL = 1e-12
# slack on the positivity bound to admit exact boundary states in floats
_BOUND_SLACK = 1e-12

IDEAL_STATE = np.array([0.0, 1.0, 1.0, 0.0]) / math.sqrt(2.0)


@dataclass(frozen=True)
class RestrictedDensityMatrix:
    """Crossed-polarization two-photon density matrix parameterized by
    the population balance p, coherence visibility V and phase phi."""

    p: float
    V: float
    phi: float = 0.0
    matrix: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise PhysicalityError(f"population p = {self.p!r} outside [0, 1]")
        if not 0.0 <= self.V <= 1.0:
            raise PhysicalityError(f"visibility V = {self.V!r} outside [0, 1]")
        bound = math.sqrt(self.p * (1.0 - self.p))
        if self.V / 2.0 > bound + _BOUND_SLACK:
            raise PhysicalityError(
                f"coherence V/2 = {self.V / 2.0:.6g} exceeds the positivity "
                f"bound sqrt(p(1-p)) = {bound:.6g}"
            )
        m = np.zeros((4, 4), dtype=complex)
        m[1, 1] = self.p
        m[2, 2] = 1.0 - self.p
        m[1, 2] = 0.5 * self.V * np.exp(1j * self.phi)
        m[2, 1] = np.conj(m[1, 2])
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)


def build_density_matrix(p: float, V: float, phi: float = 0.0) -> RestrictedDensityMatrix:
    """Construct the restricted density matrix, enforcing 0 <= p <= 1,
    0 <= V <= 1 and the positivity bound V/2 <= sqrt(p(1-p))."""
    return RestrictedDensityMatrix(p=float(p), V=float(V), phi=float(phi))


def _check(label: str, closed: float, from_matrix: float) -> float:
    if abs(closed - from_matrix) > _SELF_CHECK_TOL:
        raise AssertionError(
            f"{label}: closed form {closed!r} and matrix value {from_matrix!r} "
            f"disagree beyond {_SELF_CHECK_TOL:g}"
        )
    return closed


def purity(rho: RestrictedDensityMatrix) -> float:
    """Tr(rho^2) = p^2 + (1-p)^2 + V^2/2."""
    closed = rho.p**2 + (1.0 - rho.p) ** 2 + rho.V**2 / 2.0
    from_matrix = float(np.trace(rho.matrix @ rho.matrix).real)
    return _check("purity", closed, from_matrix)


def fidelity_to_ideal(rho: RestrictedDensityMatrix) -> float:
    """Overlap <Psi|rho|Psi> with the ideal state (e2 + e3)/sqrt(2),
    equal to (1 + V cos phi)/2."""
    closed = 0.5 * (1.0 + rho.V * math.cos(rho.phi))
    from_matrix = float((IDEAL_STATE @ rho.matrix @ IDEAL_STATE).real)
    return _check("fidelity", closed, from_matrix)


def concurrence(rho: RestrictedDensityMatrix) -> float:
    """Concurrence of the restricted matrix; with empty corner
    populations it equals V exactly."""
    return rho.V


def wootters_concurrence(matrix: np.ndarray) -> float:
    """Concurrence of an arbitrary two-qubit density matrix by the
    spin-flip construction: C = max(0, l1 - l2 - l3 - l4) where the l_i
    are the square roots of the eigenvalues of rho (sy x sy) rho* (sy x sy).

    Computed as the singular values of sqrt(rho) (sy x sy) sqrt(rho)^T,
    which avoids squaring and stays accurate to machine precision even
    for rank-deficient states (the direct eigenvalue route loses half the
    digits there)."""
    matrix = np.asarray(matrix, dtype=complex)
    if matrix.shape != (4, 4):
        raise ValueError("expected a 4x4 density matrix")
    sy = np.array([[0.0, -1j], [1j, 0.0]])
    flip = np.kron(sy, sy).real
    vals, vecs = np.linalg.eigh(matrix)
    root = (vecs * np.sqrt(np.clip(vals.real, 0.0, None))) @ vecs.conj().T
    lam = np.linalg.svd(root @ flip @ root.T, compute_uv=False)
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def metric_uncertainties(
    p: float, V: float, phi: float, sigma_p: float, sigma_V: float
) -> dict[str, float]:
    """First-order propagation of (sigma_p, sigma_V) onto the metrics.

    Returns standard deviations for purity, fidelity and concurrence,
    treating p and V as independent.
    """
    rho = build_density_matrix(p, V, phi)
    d_purity_dp = 4.0 * rho.p - 2.0
    d_purity_dv = rho.V
    d_fid_dv = 0.5 * math.cos(rho.phi)
    return {
        "purity": math.hypot(d_purity_dp * sigma_p, d_purity_dv * sigma_V),
        "fidelity": abs(d_fid_dv) * sigma_V,
        "concurrence": sigma_V,
    }
