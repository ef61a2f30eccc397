"""Planar rotor dynamics driven by the orbiting shaft through a clearance fit.

The rotor bore (radius R_b) surrounds the shaft (radius R_s). With
d = rotor centre - shaft centre and n = d/|d|, the bore touches the shaft once
|d| exceeds the clearance c = R_b - R_s. The touching bore point sits on the
far side of the shaft, p = shaft - R_s n, and the shaft pushes the rotor back
towards itself: the normal force on the rotor is -N n. Friction acts along
t = z x n with a tanh-regularized Coulomb law.

Integration is fixed-step semi-implicit Euler. Axial gravity (tilted motor)
is represented only by a Coulomb thrust-drag torque on the spin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import MotorConfig, ValidatedConfig, config_hash, validate_config
from .errors import BlowUp
from .orbit import TipOrbit, ellipse_params, synthesize_orbit

PENETRATION_CAP = 0.5  # fraction of clearance
STEADY_TAIL = 0.2
STEADY_RSD = 0.05


@dataclass(frozen=True)
class ContactModel:
    """Resolved constants for one run."""

    mass: float
    inertia: float
    shaft_radius: float
    bore_radius: float
    clearance: float
    stiffness: float  # N/m
    damping: float  # N*s/m
    friction: float
    slip_reg: float  # m/s
    gravity_t: float  # m/s^2, transverse component
    resist_torque: float  # N*m, Coulomb: thrust drag + load
    thrust_drag: float  # N*m
    load_torque: float  # N*m
    viscous_drag: float  # N*m*s/rad


@dataclass
class RotorState:
    cx: float = 0.0  # m
    cy: float = 0.0
    vx: float = 0.0  # m/s
    vy: float = 0.0
    psi: float = 0.0  # rad
    omega: float = 0.0  # rad/s
    t: float = 0.0  # s

    def as_tuple(self):
        return (self.cx, self.cy, self.vx, self.vy, self.psi, self.omega)


@dataclass(frozen=True)
class ContactSnapshot:
    in_contact: bool
    normal_force: float  # N
    friction_force: float  # N, along t = z x n
    slip_velocity: float  # m/s
    penetration: float  # m
    torque: float = 0.0  # N*m on the rotor about its centre


@dataclass
class TransientResult:
    t: np.ndarray
    cx: np.ndarray
    cy: np.ndarray
    vx: np.ndarray
    vy: np.ndarray
    psi: np.ndarray
    omega: np.ndarray
    normal_force: np.ndarray
    friction_force: np.ndarray
    slip_velocity: np.ndarray
    contact: np.ndarray
    dissipated: np.ndarray  # J, cumulative
    ledger: dict
    orbit: TipOrbit
    model: ContactModel
    dt: float
    config_hash: str = ""
    steady: bool = False
    final_state: RotorState = field(default_factory=RotorState)

    def __len__(self):
        return len(self.t)


def resolve_model(cfg: MotorConfig | ValidatedConfig, orbit: TipOrbit | None = None) -> ContactModel:
    vc = validate_config(cfg)
    c = vc.config
    if orbit is None:
        orbit = synthesize_orbit(vc)
    k = vc.penalty_stiffness
    m = vc.rotor_mass
    cp = c.contact
    damping = cp.damping if cp.damping is not None else 2.0 * cp.damping_ratio * math.sqrt(k * m)
    if cp.slip_regularization is not None:
        v_reg = cp.slip_regularization
    else:
        a = ellipse_params(orbit).semi_major
        v_reg = 0.01 * orbit.omega * max(a, 1e-3 * vc.clearance)
    thrust = cp.thrust_friction * m * vc.axial_gravity * cp.thrust_radius
    return ContactModel(
        mass=m,
        inertia=vc.rotor_inertia,
        shaft_radius=c.stator.shaft_radius,
        bore_radius=c.rotor.bore_radius,
        clearance=vc.clearance,
        stiffness=k,
        damping=damping,
        friction=cp.friction,
        slip_reg=v_reg,
        gravity_t=vc.transverse_gravity,
        resist_torque=thrust + c.sim.load_torque,
        thrust_drag=thrust,
        load_torque=c.sim.load_torque,
        viscous_drag=cp.viscous_drag,
    )


def contact_force(state: RotorState, shaft_pos, shaft_vel, params: ContactModel) -> ContactSnapshot:
    """Penalty normal force and regularized Coulomb friction at the bore."""
    dx = state.cx - shaft_pos[0]
    dy = state.cy - shaft_pos[1]
    r = math.hypot(dx, dy)
    delta = r - params.clearance
    if delta <= 0.0 or r == 0.0:
        return ContactSnapshot(False, 0.0, 0.0, 0.0, 0.0, 0.0)
    nx, ny = dx / r, dy / r
    rvx = state.vx - shaft_vel[0]
    rvy = state.vy - shaft_vel[1]
    ddot = nx * rvx + ny * rvy
    N = params.stiffness * delta + params.damping * ddot
    if N < 0.0:
        N = 0.0
    lever = params.shaft_radius + r
    v_slip = -ny * rvx + nx * rvy - lever * state.omega
    ft = -params.friction * N * math.tanh(v_slip / params.slip_reg)
    return ContactSnapshot(True, N, ft, v_slip, delta, -lever * ft)


def initial_state(model: ContactModel) -> RotorState:
    """Rest at gravity equilibrium, or near-concentric when the motor is vertical."""
    if model.gravity_t > 0.0:
        sag = model.clearance + model.mass * model.gravity_t / model.stiffness
        return RotorState(cy=-sag)
    return RotorState(cy=-1e-3 * model.clearance)


class _Ledger:
    __slots__ = ("work_in", "friction", "normal_damping", "resistive")

    def __init__(self):
        self.work_in = 0.0
        self.friction = 0.0
        self.normal_damping = 0.0
        self.resistive = 0.0


def _run(model: ContactModel, orbit: TipOrbit, state: RotorState, n_steps: int, dt: float,
         stride: int = 0, lock_spin: bool = False, ledger: _Ledger | None = None):
    """Advance ``state`` in place by ``n_steps``.

    Returns (records, torque_sum) where records holds every ``stride``-th
    pre-step sample (empty when stride == 0) and torque_sum is the summed
    contact torque, used by the frozen-spin averager.
    """
    m, inertia = model.mass, model.inertia
    k, cd, mu, vreg = model.stiffness, model.damping, model.friction, model.slip_reg
    rs, clr = model.shaft_radius, model.clearance
    gt = model.gravity_t
    resist, cvis = model.resist_torque, model.viscous_drag
    cap = PENETRATION_CAP * clr
    w, ax, ay, phx, phy = orbit.omega, orbit.amp_x, orbit.amp_y, orbit.phase_x, orbit.phase_y
    wax, way = w * ax, w * ay
    sin, cos, tanh, sqrt = math.sin, math.cos, math.tanh, math.sqrt
    isfinite = math.isfinite

    cx, cy, vx, vy, psi, om = state.as_tuple()
    t0 = state.t
    records = []
    torque_sum = 0.0
    win = fric = ndamp = resd = 0.0
    d0 = ledger.friction + ledger.normal_damping + ledger.resistive if ledger is not None else 0.0
    for i in range(n_steps):
        t = t0 + i * dt
        px = w * t + phx
        py = w * t + phy
        sx = ax * sin(px)
        sy = ay * sin(py)
        svx = wax * cos(px)
        svy = way * cos(py)
        dx = cx - sx
        dy = cy - sy
        r = sqrt(dx * dx + dy * dy)
        delta = r - clr
        if delta > 0.0 and r > 0.0:
            if delta > cap or not isfinite(delta):
                raise BlowUp(f"penetration {delta:.3e} m exceeds cap {cap:.3e} m at t = {t:.6g} s")
            nx = dx / r
            ny = dy / r
            rvx = vx - svx
            rvy = vy - svy
            ddot = nx * rvx + ny * rvy
            N = k * delta + cd * ddot
            if N < 0.0:
                N = 0.0
            lever = rs + r
            vs = nx * rvy - ny * rvx - lever * om
            ft = -mu * N * tanh(vs / vreg)
            fx = -N * nx - ft * ny
            fy = -N * ny + ft * nx
            tau = -lever * ft
            inc = True
        else:
            N = ft = vs = fx = fy = tau = ddot = 0.0
            inc = False
        if stride and i % stride == 0:
            records.append((t, cx, cy, vx, vy, psi, om, N, ft, vs, inc, d0 + fric + ndamp + resd))
        torque_sum += tau

        vx_new = vx + fx / m * dt
        vy_new = vy + (fy / m - gt) * dt
        if lock_spin:
            om_new = om
            tres = -tau
        else:
            drive = tau - cvis * om
            if om == 0.0:
                if abs(drive) <= resist:
                    om_new = 0.0
                else:
                    om_new = (drive - math.copysign(resist, drive)) * dt / inertia
            else:
                om_new = om + (drive - math.copysign(resist, om)) * dt / inertia
                if (om_new > 0.0) != (om > 0.0):
                    om_new = 0.0
            tres = inertia * (om_new - om) / dt - tau
        if ledger is not None:
            # shaft power at the force sample time; dissipation with step-midpoint
            # velocities, matching how the update changes the kinetic energy
            om_mid = 0.5 * (om + om_new)
            if inc:
                win += (fx * svx + fy * svy) * dt
                ph = w * (t + 0.5 * dt)
                rmx = 0.5 * (vx + vx_new) - wax * cos(ph + phx)
                rmy = 0.5 * (vy + vy_new) - way * cos(ph + phy)
                fric -= ft * (nx * rmy - ny * rmx - lever * om_mid) * dt
                ndamp += (N - k * delta) * (nx * rmx + ny * rmy) * dt
            resd -= tres * om_mid * dt
        cx += vx_new * dt
        cy += vy_new * dt
        vx, vy = vx_new, vy_new
        psi += om_new * dt
        om = om_new
        if not (isfinite(cx) and isfinite(cy) and isfinite(om)):
            raise BlowUp(f"non-finite state at t = {t:.6g} s")

    state.cx, state.cy, state.vx, state.vy, state.psi, state.omega = cx, cy, vx, vy, psi, om
    state.t = t0 + n_steps * dt
    if ledger is not None:
        ledger.work_in += win
        ledger.friction += fric
        ledger.normal_damping += ndamp
        ledger.resistive += resd
    return records, torque_sum


def step(state: RotorState, cfg: MotorConfig | ValidatedConfig | ContactModel, t: float, dt: float,
         orbit: TipOrbit | None = None) -> RotorState:
    """One semi-implicit Euler update from time ``t``; returns a new state."""
    if isinstance(cfg, ContactModel):
        model = cfg
        if orbit is None:
            raise ValueError("an orbit is required when passing a resolved ContactModel")
    else:
        orbit = orbit or synthesize_orbit(cfg)
        model = resolve_model(cfg, orbit)
    new = RotorState(*state.as_tuple(), t=t)
    _run(model, orbit, new, 1, dt)
    return new


def mechanical_energy(model: ContactModel, orbit: TipOrbit, state: RotorState) -> dict:
    sx, sy = (orbit.amp_x * math.sin(orbit.omega * state.t + orbit.phase_x),
              orbit.amp_y * math.sin(orbit.omega * state.t + orbit.phase_y))
    delta = math.hypot(state.cx - sx, state.cy - sy) - model.clearance
    return {
        "kinetic": 0.5 * model.mass * (state.vx**2 + state.vy**2) + 0.5 * model.inertia * state.omega**2,
        "potential": model.mass * model.gravity_t * state.cy,
        "spring": 0.5 * model.stiffness * delta**2 if delta > 0 else 0.0,
    }


def simulate(cfg: MotorConfig | ValidatedConfig, orbit: TipOrbit | None = None,
             state0: RotorState | None = None, duration: float | None = None) -> TransientResult:
    """Integrate from rest for ``sim.duration`` (or ``duration``) seconds."""
    vc = validate_config(cfg)
    if orbit is None:
        orbit = synthesize_orbit(vc)
    model = resolve_model(vc, orbit)
    state = state0 if state0 is not None else initial_state(model)
    state = RotorState(*state.as_tuple(), t=state.t)
    dt = vc.dt
    n_steps = vc.n_steps if duration is None else int(math.ceil(duration / dt - 1e-9))
    stride = vc.config.sim.record_stride
    e0 = mechanical_energy(model, orbit, state)
    ledger = _Ledger()
    records, _ = _run(model, orbit, state, n_steps, dt, stride=stride, ledger=ledger)
    # closing sample so the series ends at the final time
    snap = contact_force(state, *_shaft(orbit, state.t), model)
    records.append((state.t, state.cx, state.cy, state.vx, state.vy, state.psi, state.omega,
                    snap.normal_force, snap.friction_force, snap.slip_velocity, snap.in_contact,
                    ledger.friction + ledger.normal_damping + ledger.resistive))
    e1 = mechanical_energy(model, orbit, state)
    arr = np.array(records, dtype=float)
    result = TransientResult(
        t=arr[:, 0], cx=arr[:, 1], cy=arr[:, 2], vx=arr[:, 3], vy=arr[:, 4], psi=arr[:, 5],
        omega=arr[:, 6], normal_force=arr[:, 7], friction_force=arr[:, 8], slip_velocity=arr[:, 9],
        contact=arr[:, 10].astype(bool),
        dissipated=arr[:, 11],
        ledger={
            "work_in": ledger.work_in,
            "dissipated": ledger.friction + ledger.normal_damping + ledger.resistive,
            "dissipated_friction": ledger.friction,
            "dissipated_normal": ledger.normal_damping,
            "dissipated_resistive": ledger.resistive,
            "kinetic": e1["kinetic"],
            "potential": e1["potential"],
            "spring": e1["spring"],
            "delta_kinetic": e1["kinetic"] - e0["kinetic"],
            "delta_potential": e1["potential"] - e0["potential"],
            "delta_spring": e1["spring"] - e0["spring"],
        },
        orbit=orbit,
        model=model,
        dt=dt,
        config_hash=config_hash(vc.config),
        final_state=state,
    )
    result.steady = steady_speed(result)["achieved"]
    return result


def _shaft(orbit: TipOrbit, t: float):
    px, py = orbit.omega * t + orbit.phase_x, orbit.omega * t + orbit.phase_y
    return ((orbit.amp_x * math.sin(px), orbit.amp_y * math.sin(py)),
            (orbit.omega * orbit.amp_x * math.cos(px), orbit.omega * orbit.amp_y * math.cos(py)))


def steady_speed(result: TransientResult | np.ndarray) -> dict:
    """Mean spin rate over the trailing 20% of samples and a settledness flag."""
    omega = result.omega if isinstance(result, TransientResult) else np.asarray(result, dtype=float)
    if omega.size == 0:
        raise ValueError("empty result")
    n_tail = max(1, int(math.ceil(STEADY_TAIL * omega.size)))
    tail = omega[-n_tail:]
    mean = float(np.mean(tail))
    std = float(np.std(tail))
    if mean == 0.0:
        achieved = std == 0.0
    else:
        achieved = std / abs(mean) < STEADY_RSD
    return {"omega_ss": mean, "achieved": bool(achieved), "tail_std": std}


def energy_audit(result: TransientResult) -> float:
    """|work_in - dissipated - dKE - dPE - d(spring energy)| in J."""
    L = result.ledger
    return abs(L["work_in"] - L["dissipated"] - L["delta_kinetic"] - L["delta_potential"] - L["delta_spring"])


def rise_time(result: TransientResult, fraction: float = 0.95, omega_ss: float | None = None) -> float:
    """First time the spin rate reaches ``fraction`` of the steady value."""
    if omega_ss is None:
        omega_ss = steady_speed(result)["omega_ss"]
    if omega_ss == 0.0:
        return math.nan
    target = fraction * omega_ss
    hit = np.nonzero(result.omega * math.copysign(1.0, omega_ss) >= abs(target))[0]
    return float(result.t[hit[0]]) if hit.size else math.nan
