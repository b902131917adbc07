import math
from dataclasses import replace

import numpy as np
import pytest

import biphoton as bp
from biphoton.dispersion import C
from biphoton.errors import PhaseMatchError
from biphoton.phasematch import _solve_bracketed, momentum_mismatch


def brute_force_root(interaction, pump, model):
    """Independent oracle: dense sign-change scan + NumPy bisection."""
    half = pump.omega_p / 2.0
    grid = np.linspace(0.6 * half, 1.4 * half, 20001)
    vals = np.array([momentum_mismatch(interaction, w, pump, model) for w in grid])
    signs = np.sign(vals)
    idx = np.flatnonzero(np.diff(signs) != 0)
    assert idx.size == 1, "oracle expects exactly one sign change"
    lo, hi = grid[idx[0]], grid[idx[0] + 1]
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if momentum_mismatch(interaction, mid, pump, model) * momentum_mismatch(
            interaction, lo, pump, model
        ) <= 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def test_solver_matches_brute_force_oracle(pump, model):
    point = bp.solve_central_frequencies(pump, model)
    for interaction, found in (("HV", point.omega_s_HV), ("VH", point.omega_s_VH)):
        oracle = brute_force_root(interaction, pump, model)
        assert found == pytest.approx(oracle, rel=1e-10)


def test_solver_residual_is_tiny(pump, model):
    point = bp.solve_central_frequencies(pump, model)
    scale = pump.omega_p * 3.2  # typical magnitude of the balance terms
    for interaction, root in (("HV", point.omega_s_HV), ("VH", point.omega_s_VH)):
        assert abs(momentum_mismatch(interaction, root, pump, model)) < 1e-11 * scale


def test_energy_conservation_exact(pump, model):
    point = bp.solve_central_frequencies(pump, model)
    assert point.omega_s_HV + point.omega_i_HV == pump.omega_p
    assert point.omega_s_VH + point.omega_i_VH == pump.omega_p


def test_degenerate_wavelengths_frozen(pump, model):
    # frozen from an independent evaluation of the preset
    point = bp.solve_central_frequencies(pump, model)
    lam_s = bp.vacuum_wavelength(point.omega_s_HV) * 1e9
    lam_i = bp.vacuum_wavelength(point.omega_i_HV) * 1e9
    assert lam_s == pytest.approx(1549.2509434717515, rel=1e-12)
    assert lam_i == pytest.approx(1543.3602768050007, rel=1e-12)


def test_branches_mirror_under_angle_reversal(pump, model):
    thetas = np.radians([-0.7, -0.2, 0.2, 0.7])
    points = bp.tunability_curve(thetas, pump, model)
    flipped = bp.tunability_curve(-thetas, pump, model)
    for fwd, rev in zip(points, flipped):
        assert fwd.omega_s_VH == pytest.approx(rev.omega_i_HV, rel=1e-12)
        assert fwd.omega_i_VH == pytest.approx(rev.omega_s_HV, rel=1e-12)


def test_signal_frequency_monotone_in_angle(pump, model):
    thetas = np.radians(np.linspace(-1.0, 1.0, 11))
    points = bp.tunability_curve(thetas, pump, model)
    omegas = np.array([p.omega_s_HV for p in points])
    assert np.all(np.diff(omegas) > 0)


def test_branch_separation_equals_first_order_splitting(pump, model):
    point = bp.solve_central_frequencies(pump, model)
    mu = bp.spectral_separation_mu(pump, model)
    separation = abs(point.omega_s_VH - point.omega_s_HV)
    # the solved separation agrees with the first-order expression to
    # the size of the neglected quadratic dispersion terms
    assert separation == pytest.approx(mu, rel=1e-4)


def test_spectral_separation_frozen_value(pump, model):
    mu = bp.spectral_separation_mu(pump, model)
    expected = (C / 3.15) * pump.omega_p * 0.012 / (2.0 * C)
    assert mu == pytest.approx(expected, rel=1e-14)
    assert mu == pytest.approx(4.640636030854e12, rel=1e-10)
    assert mu > 0  # sign convention: positive when n_H exceeds n_V


def test_zero_birefringence_gives_zero_mu(pump):
    flat = bp.DispersionModel(n0_H=3.15, n0_V=3.15, n_g=3.15,
                              omega_ref=2 * math.pi * C / 1546.3e-9)
    assert bp.spectral_separation_mu(pump, flat) == 0.0


def test_widths_frozen_values(pump, model):
    assert bp.intra_mode_width(pump, model) == pytest.approx(
        math.sqrt(2.0) * (C / 3.15) / 1e-3, rel=1e-14
    )
    assert bp.coincidence_envelope_width(pump, model) == pytest.approx(
        1e-3 * 3.15 / C, rel=1e-14
    )
    assert bp.coincidence_envelope_width(pump, model) == pytest.approx(
        10.507268998742e-12, rel=1e-10
    )


def test_pump_preset(pump):
    assert pump.lambda_p == pytest.approx(773.15e-9, rel=1e-15)
    assert pump.pulse_fwhm == 4.5e-12
    assert pump.waist_wz == 1e-3
    assert pump.theta == 0.0
    assert pump.omega_p == pytest.approx(2.4363339161984780e15, rel=1e-12)


def test_pump_validation():
    with pytest.raises(ValueError):
        bp.PumpConfig(lambda_p=2.0e-6, pulse_fwhm=1e-12, waist_wz=1e-3)
    with pytest.raises(ValueError):
        bp.PumpConfig(lambda_p=773e-9, pulse_fwhm=-1e-12, waist_wz=1e-3)
    with pytest.raises(ValueError):
        bp.PumpConfig(lambda_p=773e-9, pulse_fwhm=1e-12, waist_wz=0.0)
    with pytest.raises(ValueError):
        bp.PumpConfig(lambda_p=773e-9, pulse_fwhm=1e-12, waist_wz=1e-3,
                      theta=math.pi / 2)


def test_bad_interaction_label(pump, model):
    with pytest.raises(ValueError):
        momentum_mismatch("XY", pump.omega_p / 2, pump, model)


def test_bracket_without_sign_change_raises():
    with pytest.raises(PhaseMatchError):
        _solve_bracketed(lambda x: x * x + 1.0, 1.0, 2.0)


def test_solver_finds_exact_linear_root():
    root = _solve_bracketed(lambda x: x - 1.25e15, 1e15, 2e15)
    assert root == pytest.approx(1.25e15, rel=1e-13)


def test_tunability_point_at_tilted_pump(pump, model):
    tilted = replace(pump, theta=math.radians(0.5))
    point = bp.solve_central_frequencies(tilted, model)
    # tilting moves the two interactions apart asymmetrically
    assert point.omega_s_HV != point.omega_s_VH
    assert point.theta == tilted.theta
