"""Quasi-static solver built on frozen-spin cycle averaging.

The rotor spin rate is held fixed while the translational motion is
integrated over whole drive cycles; the mean contact torque T(omega) then
drives the slow spin equation I domega/dt = T(omega) - load - drag(omega).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .config import MotorConfig, ValidatedConfig, config_hash, validate_config
from .contact import RotorState, _run, initial_state, resolve_model
from .errors import StallError
from .orbit import TipOrbit, ellipse_params, synthesize_orbit

BISECT_RTOL = 1e-3


def worker_count() -> int:
    try:
        n = int(os.environ.get("MICROMOTOR_THREADS", "1"))
    except ValueError:
        n = 1
    return max(1, n)


def parallel_map(fn, items, workers: int | None = None) -> list:
    """Order-preserving map; uses a process pool when more than one worker is allowed."""
    items = list(items)
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))


def kinematic_bound(cfg: MotorConfig | ValidatedConfig, orbit: TipOrbit | None = None) -> float:
    """No-slip ceiling omega * a / R_b on the rotor spin rate, rad/s."""
    vc = validate_config(cfg)
    orbit = orbit or synthesize_orbit(vc)
    return orbit.omega * ellipse_params(orbit).semi_major / vc.config.rotor.bore_radius


def frozen_cycle_torque(cfg: MotorConfig | ValidatedConfig, omega: float,
                        orbit: TipOrbit | None = None, net: bool = False) -> float:
    """Mean contact spin torque with the spin rate held at ``omega``.

    Starts from the rest configuration, discards ``sim.warmup_cycles`` drive
    cycles and averages over the next ``sim.average_cycles``. With
    ``net=True`` the load and drag torques are subtracted.
    """
    vc = validate_config(cfg)
    orbit = orbit or synthesize_orbit(vc)
    model = resolve_model(vc, orbit)
    sim = vc.config.sim
    steps_per_cycle = orbit.period / vc.dt
    n_warm = int(round(sim.warmup_cycles * steps_per_cycle))
    n_avg = max(1, int(round(sim.average_cycles * steps_per_cycle)))
    state = initial_state(model)
    state.omega = float(omega)
    _run(model, orbit, state, n_warm, vc.dt, lock_spin=True)
    _, tsum = _run(model, orbit, state, n_avg, vc.dt, lock_spin=True)
    torque = tsum / n_avg
    if net:
        torque -= resistive_torque(model, omega, 1.0 if torque >= 0 else -1.0)
    return torque


def drag_torque(model, omega: float, direction: float = 1.0) -> float:
    """Thrust drag + viscous drag, signed to oppose the spin.

    At omega == 0 the Coulomb thrust drag takes its full value against
    ``direction`` (the sense the rotor is trying to turn).
    """
    sense = math.copysign(1.0, omega) if omega != 0.0 else math.copysign(1.0, direction)
    return sense * model.thrust_drag + model.viscous_drag * omega


def resistive_torque(model, omega: float, direction: float = 1.0) -> float:
    """Drag plus the external load, signed to oppose the spin."""
    sense = math.copysign(1.0, omega) if omega != 0.0 else math.copysign(1.0, direction)
    return drag_torque(model, omega, direction) + sense * model.load_torque


def bisect_root(g, lo: float, hi: float, rtol: float = BISECT_RTOL, g_lo: float | None = None,
                max_iter: int = 200) -> tuple[float, bool]:
    """Sign-change bisection; only the sign of ``g`` is trusted."""
    glo = g(lo) if g_lo is None else g_lo
    ghi = g(hi)
    if glo == 0.0:
        return lo, True
    if ghi == 0.0:
        return hi, True
    if (glo > 0) == (ghi > 0):
        return hi, False
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if abs(hi - lo) <= rtol * abs(mid):
            return mid, True
        gm = g(mid)
        if gm == 0.0:
            return mid, True
        if (gm > 0) == (glo > 0):
            lo, glo = mid, gm
        else:
            hi = mid
    return 0.5 * (lo + hi), True


@dataclass(frozen=True)
class SteadyState:
    omega_ss: float  # rad/s
    converged: bool
    stalled: bool
    torque_at_rest: float  # N*m, net of load and drag
    bound: float  # rad/s


def steady_state_speed(cfg: MotorConfig | ValidatedConfig, orbit: TipOrbit | None = None) -> SteadyState:
    """Root of T(omega) - load - drag(omega) between rest and the kinematic bound."""
    vc = validate_config(cfg)
    orbit = orbit or synthesize_orbit(vc)
    model = resolve_model(vc, orbit)
    bound = kinematic_bound(vc, orbit)
    t0 = frozen_cycle_torque(vc, 0.0, orbit)
    sense = 1.0 if t0 >= 0 else -1.0
    net0 = t0 - resistive_torque(model, 0.0, sense)
    if t0 == 0.0 or sense * net0 <= 0.0 or bound == 0.0:
        return SteadyState(0.0, True, True, net0, bound)

    def g(w):
        return sense * (frozen_cycle_torque(vc, sense * w, orbit) - resistive_torque(model, sense * w))

    w, ok = bisect_root(g, 0.0, bound, g_lo=sense * net0)
    return SteadyState(sense * w, ok, False, net0, bound)


@dataclass(frozen=True)
class TorqueCurve:
    omega: np.ndarray  # rad/s
    torque: np.ndarray  # N*m, T(omega) - drag(omega), load excluded
    cycles: int
    config_hash: str
    load_torque: float = 0.0

    @property
    def stall_torque(self) -> float:
        return float(self.torque[0])

    def crossing(self) -> float:
        """Speed where the available torque equals the load (linear interpolation)."""
        g = self.torque - np.sign(self.omega[-1] or 1.0) * self.load_torque
        s = np.sign(g)
        idx = np.nonzero(s[:-1] * s[1:] <= 0)[0]
        if idx.size == 0:
            return math.nan
        i = int(idx[0])
        if g[i] == g[i + 1]:
            return float(self.omega[i])
        return float(self.omega[i] - g[i] * (self.omega[i + 1] - self.omega[i]) / (g[i + 1] - g[i]))


def _curve_point(args) -> float:
    vc, orbit, w, sense = args
    model = resolve_model(vc, orbit)
    return frozen_cycle_torque(vc, w, orbit) - drag_torque(model, w, sense)


def torque_speed_curve(cfg: MotorConfig | ValidatedConfig, n_points: int = 21,
                       orbit: TipOrbit | None = None, omega_max: float | None = None,
                       workers: int | None = None) -> TorqueCurve:
    """Available torque T(omega) - drag(omega) on a uniform grid from rest to the bound."""
    if n_points < 2:
        raise ValueError("n_points must be >= 2")
    vc = validate_config(cfg)
    orbit = orbit or synthesize_orbit(vc)
    if omega_max is None:
        sense = 1.0 if frozen_cycle_torque(vc, 0.0, orbit) >= 0 else -1.0
        omega_max = sense * kinematic_bound(vc, orbit)
    grid = np.linspace(0.0, omega_max, n_points)
    sense = 1.0 if omega_max >= 0 else -1.0
    torque = parallel_map(_curve_point, [(vc, orbit, float(w), sense) for w in grid], workers)
    return TorqueCurve(
        omega=grid,
        torque=np.asarray(torque),
        cycles=vc.config.sim.average_cycles,
        config_hash=config_hash(vc.config),
        load_torque=vc.config.sim.load_torque,
    )


@dataclass(frozen=True)
class SpinupCurve:
    t: np.ndarray  # s
    omega: np.ndarray  # rad/s
    t_95: float  # s
    omega_ss: float  # rad/s
    torque_at_rest: float  # N*m, net


def spinup_from_torque(net_torque, inertia: float, omega_ss: float, t_end: float | None = None,
                       n_samples: int = 400) -> SpinupCurve:
    """Solve I domega/dt = net_torque(omega) from rest; report t_95."""
    sense = math.copysign(1.0, omega_ss) if omega_ss != 0 else 1.0
    tau0 = net_torque(0.0)
    if sense * tau0 <= 0.0:
        raise StallError(f"net torque at rest {tau0:.3e} N*m cannot start the rotor")
    t_lin = abs(inertia * omega_ss / tau0)
    if t_end is None:
        t_end = 20.0 * t_lin

    target = 0.95 * omega_ss

    def rhs(_t, y):
        return [net_torque(y[0]) / inertia]

    def hit95(_t, y):
        return y[0] - target

    hit95.terminal = False
    sol = solve_ivp(rhs, (0.0, t_end), [0.0], method="RK45", dense_output=True, events=hit95,
                    rtol=1e-8, atol=1e-10 * max(abs(omega_ss), 1.0), max_step=t_lin / 20.0)
    ev = sol.t_events[0]
    t95 = float(ev[0]) if ev.size else math.nan
    ts = np.linspace(0.0, t_end, n_samples)
    return SpinupCurve(t=ts, omega=sol.sol(ts)[0], t_95=t95, omega_ss=omega_ss, torque_at_rest=tau0)


def spinup_curve(cfg: MotorConfig | ValidatedConfig, orbit: TipOrbit | None = None,
                 n_table: int = 17, steady: SteadyState | None = None) -> SpinupCurve:
    """Slow-timescale spin-up using a tabulated T(omega) between rest and omega_ss.

    ``steady`` may carry an already computed :func:`steady_state_speed` result.
    """
    vc = validate_config(cfg)
    orbit = orbit or synthesize_orbit(vc)
    ss = steady if steady is not None else steady_state_speed(vc, orbit)
    if ss.stalled or ss.omega_ss == 0.0:
        raise StallError("motor stalls: drive torque at rest does not exceed the resistive torque")
    model = resolve_model(vc, orbit)
    grid = np.linspace(0.0, ss.omega_ss, n_table)
    sense = math.copysign(1.0, ss.omega_ss)
    table = np.array(parallel_map(_spin_point, [(vc, orbit, float(w), sense) for w in grid]))
    table[-1] = 0.0  # the root itself, by construction
    table[0] = ss.torque_at_rest
    if grid[-1] < 0:
        grid, table = grid[::-1], table[::-1]

    def net(w):
        return float(np.interp(w, grid, table))

    return spinup_from_torque(net, model.inertia, ss.omega_ss)


def _spin_point(args) -> float:
    vc, orbit, w, sense = args
    model = resolve_model(vc, orbit)
    return frozen_cycle_torque(vc, w, orbit) - resistive_torque(model, w, sense)
