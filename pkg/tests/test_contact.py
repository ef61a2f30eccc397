import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from micromotor.averaged import kinematic_bound
from micromotor.config import GRAVITY, load_config, validate_config
from micromotor.contact import (
    RotorState,
    contact_force,
    energy_audit,
    initial_state,
    resolve_model,
    rise_time,
    simulate,
    steady_speed,
    step,
)
from micromotor.errors import BlowUp
from micromotor.orbit import Direction, TipOrbit, ellipse_params, reverse, synthesize_orbit


@pytest.fixture(scope="module")
def desk():
    return validate_config(load_config(preset="desk"))


@pytest.fixture(scope="module")
def desk_run(desk):
    return simulate(desk)


@pytest.fixture(scope="module")
def model(desk):
    return resolve_model(desk)


def test_concentric_no_contact(model):
    snap = contact_force(RotorState(), (0.0, 0.0), (1.0, 0.0), model)
    assert not snap.in_contact
    assert (snap.normal_force, snap.friction_force, snap.slip_velocity, snap.torque) == (0.0, 0.0, 0.0, 0.0)


@pytest.mark.parametrize("tilt", [0.0, 30.0, 60.0])
def test_static_equilibrium(desk, tilt):
    vc = desk.replace({"tilt_deg": tilt, "drive.amplitude": 0.0})
    m = resolve_model(vc)
    s = initial_state(m)
    g = GRAVITY * math.cos(math.radians(tilt))
    assert -s.cy - m.clearance == pytest.approx(m.mass * g / m.stiffness, rel=1e-12)
    snap = contact_force(s, (0.0, 0.0), (0.0, 0.0), m)
    assert snap.normal_force == pytest.approx(m.mass * g, rel=1e-12)
    after = step(s, vc, 0.0, vc.dt)
    assert after.vy == pytest.approx(0.0, abs=1e-15)


def test_zero_slip_zero_friction(model):
    s = RotorState(cy=-(model.clearance + 1e-7))
    snap = contact_force(s, (0.0, 0.0), (0.0, 0.0), model)
    assert snap.in_contact and snap.slip_velocity == 0.0 and snap.friction_force == 0.0


@given(st.floats(0, 2 * math.pi), st.floats(1e-9, 2e-5), st.floats(-1, 1), st.floats(-1, 1), st.floats(-500, 500))
def test_normal_nonnegative_and_friction_cone(ang, pen, vx, vy, om):
    m = resolve_model(validate_config(load_config(preset="desk")))
    r = m.clearance + pen
    s = RotorState(cx=r * math.cos(ang), cy=r * math.sin(ang), vx=vx, vy=vy, omega=om)
    snap = contact_force(s, (0.0, 0.0), (0.0, 0.0), m)
    assert snap.normal_force >= 0.0
    assert abs(snap.friction_force) <= m.friction * snap.normal_force * (1 + 1e-12)


def test_zero_forces_state_unchanged(desk):
    vc = desk.replace({"tilt_deg": 90.0, "drive.amplitude": 0.0, "contact.thrust_friction": 0.0})
    s = RotorState(cx=1e-6, cy=-2e-6)
    new = step(s, vc, 0.25, vc.dt)
    assert new.as_tuple() == s.as_tuple()
    assert new.t == pytest.approx(0.25 + vc.dt)


def test_free_flight_gravity(desk):
    vc = desk.replace({"drive.amplitude": 0.0})
    new = step(RotorState(vy=0.01), vc, 0.0, vc.dt)
    assert new.vy == pytest.approx(0.01 - GRAVITY * vc.dt, rel=1e-14)
    assert new.cy == pytest.approx(new.vy * vc.dt, rel=1e-14)


def test_single_step_matches_hand_update(desk):
    vc = desk
    orbit = synthesize_orbit(vc)
    m = resolve_model(vc, orbit)
    dt, t = vc.dt, 1.234e-3
    w = orbit.omega
    sx, sy = orbit.amp_x * math.sin(w * t + orbit.phase_x), orbit.amp_y * math.sin(w * t + orbit.phase_y)
    s = RotorState(cx=sx + 3e-6, cy=sy - (m.clearance + 2e-7), vx=1e-4, vy=-2e-4, omega=5.0)
    svx, svy = w * orbit.amp_x * math.cos(w * t + orbit.phase_x), w * orbit.amp_y * math.cos(w * t + orbit.phase_y)
    dx, dy = s.cx - sx, s.cy - sy
    r = math.hypot(dx, dy)
    nx, ny = dx / r, dy / r
    tx, ty = -ny, nx
    rel = (s.vx - svx, s.vy - svy)
    assert r > m.clearance
    N = max(0.0, m.stiffness * (r - m.clearance) + m.damping * (nx * rel[0] + ny * rel[1]))
    lever = m.shaft_radius + r
    vslip = tx * rel[0] + ty * rel[1] - lever * s.omega
    ft = -m.friction * N * math.tanh(vslip / m.slip_reg)
    fx, fy = -N * nx + ft * tx, -N * ny + ft * ty
    vx1 = s.vx + fx / m.mass * dt
    vy1 = s.vy + (fy / m.mass - m.gravity_t) * dt
    om1 = s.omega + (-lever * ft - m.resist_torque) * dt / m.inertia
    new = step(s, m, t, dt, orbit)
    assert new.vx == pytest.approx(vx1, rel=1e-12)
    assert new.vy == pytest.approx(vy1, rel=1e-12)
    assert new.omega == pytest.approx(om1, rel=1e-12)
    assert new.cx == pytest.approx(s.cx + vx1 * dt, rel=1e-12)
    assert new.cy == pytest.approx(s.cy + vy1 * dt, rel=1e-12)


def test_no_drive_no_spin(desk):
    r = simulate(desk.replace({"drive.amplitude": 0.0, "sim.duration": 0.05}))
    assert np.all(r.omega == 0.0)


def test_desk_ccw_orbit_spins_positive(desk, desk_run):
    assert ellipse_params(desk_run.orbit).direction is Direction.CCW
    s = steady_speed(desk_run)
    assert s["omega_ss"] > 0 and s["achieved"]
    assert s["omega_ss"] <= 1.05 * kinematic_bound(desk)


def test_reverse_mirrors_sample_by_sample(desk, desk_run):
    back = simulate(desk, reverse(desk_run.orbit))
    scale = np.max(np.abs(desk_run.omega))
    assert np.max(np.abs(back.omega + desk_run.omega)) <= 1e-9 * scale
    assert np.allclose(back.cx, -desk_run.cx, rtol=0, atol=1e-9 * desk.clearance)


def test_vertical_motor_never_spins(desk):
    r = simulate(desk.replace({"tilt_deg": 90.0, "sim.duration": 0.1}))
    assert np.max(np.abs(r.omega)) == 0.0


def test_recorded_forces_physical(desk_run):
    assert np.all(desk_run.normal_force >= 0)
    mu = desk_run.model.friction
    assert np.all(np.abs(desk_run.friction_force) <= mu * desk_run.normal_force * (1 + 1e-12))
    assert np.all(np.diff(desk_run.dissipated) >= 0)
    assert desk_run.dissipated[-1] == pytest.approx(desk_run.ledger["dissipated"], rel=1e-12)


def test_deterministic(desk, desk_run):
    again = simulate(desk)
    for name in ("t", "cx", "cy", "vx", "vy", "psi", "omega", "normal_force", "friction_force"):
        assert np.array_equal(getattr(again, name), getattr(desk_run, name))
    assert again.ledger == desk_run.ledger


def test_energy_audit_small_and_first_order(desk, desk_run):
    e1 = energy_audit(desk_run) / desk_run.ledger["work_in"]
    fine = simulate(desk.replace({"sim.dt": desk.dt / 2}))
    e2 = energy_audit(fine) / fine.ledger["work_in"]
    assert e1 <= 0.01
    assert 1.6 < e1 / e2 < 2.5


def test_energy_audit_exact_without_drive_or_gravity(desk):
    r = simulate(desk.replace({"tilt_deg": 90.0, "drive.amplitude": 0.0, "sim.duration": 0.02}))
    assert energy_audit(r) == 0.0


def test_steady_speed_synthetic():
    s = steady_speed(np.full(100, 4.2))
    assert s["omega_ss"] == pytest.approx(4.2) and s["achieved"]
    assert not steady_speed(np.linspace(0, 10, 100))["achieved"]


def test_rise_time(desk_run):
    t95 = rise_time(desk_run)
    w = steady_speed(desk_run)["omega_ss"]
    i = np.searchsorted(desk_run.t, t95)
    assert desk_run.omega[i] >= 0.95 * w and np.all(desk_run.omega[:i] < 0.95 * w)


def test_blowup_guard(desk):
    m = resolve_model(desk)
    s = RotorState(cy=-m.clearance, vy=-50.0)
    with pytest.raises(BlowUp):
        simulate(desk, state0=s, duration=20 * desk.dt)
