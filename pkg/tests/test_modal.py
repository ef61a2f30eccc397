import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from micromotor.config import MotorConfig, validate_config
from micromotor.errors import AxisMismatch, DomainError, EdgePeakWarning, FlatCurve, RangeError
from micromotor.modal import (
    bending_modes,
    cantilever_eigenvalue,
    find_resonance,
    forced_response,
    modal_forcing,
    modal_mass,
    mode_shape,
    mode_slope,
    natural_frequency,
    parabolic_vertex,
    sweep_response,
)

from oracles import cantilever_root, patch_work_integral, phi2_integral, phi_mp

L = 6e-3


@pytest.fixture(scope="module")
def default_vc():
    return validate_config(MotorConfig.from_dict())


@pytest.fixture(scope="module")
def round_vc():
    return validate_config(MotorConfig.from_dict({"stator": {"flat_cut_thickness": 1e-3}}))


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_eigenvalues_match_arbitrary_precision(n):
    assert cantilever_eigenvalue(n) == pytest.approx(float(cantilever_root(n)), rel=1e-14)


def test_solid_beam_first_frequency(round_vc):
    lam = float(cantilever_root(1))
    D = 1e-3
    f1 = lam**2 / (2 * math.pi * L**2) * math.sqrt(193e9 * (math.pi * D**4 / 64) / (7980 * math.pi * D**2 / 4))
    assert natural_frequency(round_vc, 1, "x") == pytest.approx(f1, rel=1e-12)
    assert natural_frequency(round_vc, 1, "x") == pytest.approx(19.1e3, rel=5e-3)


def test_mode_ratio(round_vc):
    ratio = natural_frequency(round_vc, 2, "x") / natural_frequency(round_vc, 1, "x")
    assert ratio == pytest.approx(6.267, abs=1e-3)


def test_doubling_length_quarters_frequency(round_vc):
    long = round_vc.replace({"stator.length": 12e-3, "stator.contact_height": 12e-3})
    assert natural_frequency(long, 1, "y") == pytest.approx(natural_frequency(round_vc, 1, "y") / 4, rel=1e-12)


def test_flat_cut_lowers_y_frequency(default_vc):
    assert natural_frequency(default_vc, 1, "y") < natural_frequency(default_vc, 1, "x")


@pytest.mark.parametrize("n", [1, 2, 3])
def test_clamped_end_and_tip_normalization(n):
    assert mode_shape(n, 0.0, L) == pytest.approx(0.0, abs=1e-12)
    assert mode_slope(n, 0.0, L) == pytest.approx(0.0, abs=1e-9)
    assert mode_shape(n, L, L) == pytest.approx(2.0, rel=1e-9)


def test_midspan_value_matches_arbitrary_precision():
    assert mode_shape(1, L / 2, L) == pytest.approx(float(phi_mp(1, L / 2, L)), rel=1e-12)


@pytest.mark.parametrize("n", [1, 2])
def test_phi_squared_integrates_to_length(n):
    assert phi2_integral(n, 0, L, L) == pytest.approx(L, rel=1e-12)


def test_mode_shape_domain():
    with pytest.raises(DomainError):
        mode_shape(1, -1e-6, L)
    with pytest.raises(DomainError):
        mode_shape(1, 2 * L, L)


def test_modal_mass_against_quadrature(default_vc):
    c = default_vc.config
    expect = c.material.density * default_vc.sections["x"].area * L
    expect += 2 * c.piezo.density * 0.8e-3 * 0.8e-3 * phi2_integral(1, 0.0, 5e-3, L)
    assert modal_mass(default_vc, 1, "x") == pytest.approx(expect, rel=1e-10)


def test_forcing_against_work_integral(default_vc):
    c = default_vc.config
    mode = bending_modes(default_vc, "x")[0]
    zbar = 0.5e-3 + 0.4e-3
    moment = -c.piezo.d31 * c.piezo.youngs_modulus * 0.8e-3 * zbar
    theta = patch_work_integral(1, 0.0, 5e-3, L, moment)
    assert mode.forcing == pytest.approx(theta / mode.modal_mass, rel=1e-9)
    assert mode.forcing > 0


def test_forcing_vanishes_without_coupling(default_vc):
    c = default_vc.config
    mode = bending_modes(default_vc, "x")[0]
    piezo = type(c.piezo)(**{**c.piezo.__dict__, "d31": 0.0})
    assert modal_forcing(c.patch("x"), mode, piezo, c.stator) == 0.0


def test_forcing_axis_mismatch(default_vc):
    c = default_vc.config
    with pytest.raises(AxisMismatch):
        modal_forcing(c.patch("y"), bending_modes(default_vc, "x")[0], c.piezo, c.stator)


def test_zero_voltage_zero_response(default_vc):
    assert forced_response(default_vc, 20e3, 0.0, "x").magnitude == 0.0


def test_single_mode_resonance_amplitude_and_phase():
    vc = validate_config(MotorConfig.from_dict({"stator": {"n_modes": 1}}))
    m = bending_modes(vc, "x")[0]
    zeta = vc.config.piezo.damping_ratio
    r = forced_response(vc, m.frequency_hz, 100.0, "x")
    tip = mode_shape(1, vc.config.stator.contact_height, L)
    assert r.magnitude == pytest.approx(m.forcing * 100 / (2 * zeta * m.natural_frequency**2) * tip, rel=1e-12)
    assert r.phase == pytest.approx(-math.pi / 2, abs=1e-12)


def test_half_power_bandwidth():
    vc = validate_config(MotorConfig.from_dict({"stator": {"n_modes": 1}}))
    fn = natural_frequency(vc, 1, "x")
    curve = sweep_response(vc, fn * 0.99, fn * 1.01, 40001, 1.0, "x")
    half = curve.amplitude.max() / math.sqrt(2)
    above = curve.frequency[curve.amplitude >= half]
    bandwidth = above[-1] - above[0]
    assert bandwidth == pytest.approx(fn / vc.config.piezo.qm, rel=2e-3)


@given(st.floats(1.0, 500.0), st.floats(1e3, 150e3))
def test_response_linear_in_voltage(V, f):
    vc = validate_config(MotorConfig.from_dict())
    a = forced_response(vc, f, V, "y").amplitude
    b = forced_response(vc, f, 2 * V, "y").amplitude
    assert b == pytest.approx(2 * a, rel=1e-12)


def test_axes_identical_for_round_section(round_vc):
    for f in (5e3, 19e3, 60e3):
        assert forced_response(round_vc, f, 50, "x").amplitude == pytest.approx(
            forced_response(round_vc, f, 50, "y").amplitude, rel=1e-12)


def test_resonant_amplitude_scales_with_qm():
    a = validate_config(MotorConfig.from_dict({"stator": {"n_modes": 1}}))
    b = a.replace({"piezo.qm": 2000.0})
    f = natural_frequency(a, 1, "x")
    ratio = forced_response(b, f, 1, "x").magnitude / forced_response(a, f, 1, "x").magnitude
    assert ratio == pytest.approx(2.0, rel=1e-12)


def test_sweep_peak_at_first_mode(default_vc):
    curve = sweep_response(default_vc, 0.0, 100e3, 2001, 250.0, "x")
    f1 = natural_frequency(default_vc, 1, "x")
    assert find_resonance(curve) == pytest.approx(f1, rel=1e-3)


def test_sweep_range_errors(default_vc):
    with pytest.raises(RangeError):
        sweep_response(default_vc, 10e3, 5e3, 10, 1.0)


def test_parabolic_vertex_exact():
    assert parabolic_vertex(1.0, 2.0, 3.0, 1.0, 3.0, 1.0) == 2.0
    assert parabolic_vertex(0.0, 1.0, 2.0, -(0 - 1.3) ** 2, -(1 - 1.3) ** 2, -(2 - 1.3) ** 2) == pytest.approx(1.3)
    f = np.array([0.0, 1.0, 2.0])
    assert find_resonance((f, -(f - 0.8) ** 2 + 5)) == pytest.approx(0.8, rel=1e-12)


def test_synthetic_peak_recovered():
    fn, zeta = 40e3, 0.01
    f = np.linspace(30e3, 50e3, 201)
    r = f / fn
    amp = 1 / np.sqrt((1 - r * r) ** 2 + (2 * zeta * r) ** 2)
    assert find_resonance((f, amp)) == pytest.approx(fn, rel=1e-3)


@pytest.mark.parametrize("n", [101, 1001, 10001])
def test_resonance_converges_with_resolution(n):
    vc = validate_config(MotorConfig.from_dict({"stator": {"n_modes": 1}}))
    fn = natural_frequency(vc, 1, "x")
    curve = sweep_response(vc, 0.8 * fn, 1.2 * fn, n, 1.0, "x")
    tol = {101: 1e-3, 1001: 1e-5, 10001: 1e-7}[n]
    assert find_resonance(curve) == pytest.approx(fn * math.sqrt(1 - 2 * 0.0005**2), rel=tol)


def test_edge_peak_warns():
    f = np.linspace(0, 1, 5)
    with pytest.warns(EdgePeakWarning):
        assert find_resonance((f, f)) == 1.0


def test_flat_curve_raises():
    with pytest.raises(FlatCurve):
        find_resonance((np.arange(4.0), np.ones(4)))
