"""Planar shaft orbit at the contact plane.

Frame: x along the patch-1 bending plane, y along patch 2, z up the column.
Counter-clockwise (CCW) means positive rotation about +z, i.e. a positive
areal velocity x*vy - y*vx.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .config import MotorConfig, ValidatedConfig, validate_config
from .modal import forced_response

# |sin(phase difference)| below this counts as a straight-line orbit
_DEGENERATE_TOL = 1e-12


class Direction(str, enum.Enum):
    CCW = "CCW"
    CW = "CW"
    DEGENERATE = "DEGENERATE"


def wrap_angle(a: float) -> float:
    """Map an angle into (-pi, pi]."""
    w = math.remainder(a, 2.0 * math.pi)
    return math.pi if w == -math.pi else w


@dataclass(frozen=True)
class TipOrbit:
    """x(t) = amp_x sin(omega t + phase_x), y(t) = amp_y sin(omega t + phase_y)."""

    amp_x: float  # m
    amp_y: float  # m
    phase_x: float  # rad
    phase_y: float  # rad
    omega: float  # rad/s

    def __post_init__(self):
        if self.amp_x < 0 or self.amp_y < 0 or not self.omega > 0:
            raise ValueError("orbit needs amplitudes >= 0 and omega > 0")

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.omega

    def scaled(self, k: float) -> "TipOrbit":
        return replace(self, amp_x=self.amp_x * k, amp_y=self.amp_y * k)


@dataclass(frozen=True)
class EllipseParams:
    semi_major: float  # m
    semi_minor: float  # m
    orientation: float  # rad, major axis angle from +x in (-pi/2, pi/2]
    direction: Direction
    areal_velocity: float  # m^2/s, signed


def synthesize_orbit(cfg: MotorConfig | ValidatedConfig) -> TipOrbit:
    """Combine the per-axis forced responses at the drive frequency."""
    vc = validate_config(cfg)
    drive = vc.config.drive
    parts = {}
    for axis in ("x", "y"):
        r = forced_response(vc, drive.frequency, drive.axis_voltage(axis), axis)
        phase = drive.axis_phase(axis) + (r.phase if r.magnitude > 0 else 0.0)
        parts[axis] = (r.magnitude, wrap_angle(phase))
    return TipOrbit(
        amp_x=parts["x"][0], amp_y=parts["y"][0],
        phase_x=parts["x"][1], phase_y=parts["y"][1],
        omega=drive.omega,
    )


def ellipse_params(orbit: TipOrbit) -> EllipseParams:
    ax, ay = orbit.amp_x, orbit.amp_y
    dphi = orbit.phase_x - orbit.phase_y
    s = math.sin(dphi)
    areal = 0.5 * orbit.omega * ax * ay * s
    # second-moment matrix of the harmonic pair, averaged over a period
    mxx, myy, mxy = 0.5 * ax * ax, 0.5 * ay * ay, 0.5 * ax * ay * math.cos(dphi)
    half_tr = 0.5 * (mxx + myy)
    rad = math.hypot(0.5 * (mxx - myy), mxy)
    lam1 = half_tr + rad
    det = 0.25 * (ax * ay * s) ** 2
    lam2 = det / lam1 if lam1 > 0 else 0.0
    a = math.sqrt(2.0 * lam1)
    b = min(math.sqrt(2.0 * lam2), a)
    orientation = 0.5 * math.atan2(2.0 * mxy, mxx - myy) if rad > 0 else 0.0
    if orientation <= -math.pi / 2:
        orientation += math.pi
    if ax == 0 or ay == 0 or abs(s) <= _DEGENERATE_TOL:
        direction = Direction.DEGENERATE
    else:
        direction = Direction.CCW if areal > 0 else Direction.CW
    return EllipseParams(semi_major=a, semi_minor=b, orientation=orientation, direction=direction, areal_velocity=areal)


def orbit_state(orbit: TipOrbit, t):
    """Exact (x, y, vx, vy) at time(s) t."""
    w = orbit.omega
    if np.ndim(t) == 0:
        px, py = w * t + orbit.phase_x, w * t + orbit.phase_y
        return (
            orbit.amp_x * math.sin(px), orbit.amp_y * math.sin(py),
            w * orbit.amp_x * math.cos(px), w * orbit.amp_y * math.cos(py),
        )
    t = np.asarray(t, dtype=float)
    px, py = w * t + orbit.phase_x, w * t + orbit.phase_y
    return (
        orbit.amp_x * np.sin(px), orbit.amp_y * np.sin(py),
        w * orbit.amp_x * np.cos(px), w * orbit.amp_y * np.cos(py),
    )


def reverse(orbit: TipOrbit) -> TipOrbit:
    """Same ellipse traversed the other way: phase_y kept, phase_y - phase_x negated.

    For a quadrature pair this is the exact mirror x -> -x.
    """
    return replace(orbit, phase_x=wrap_angle(2.0 * orbit.phase_y - orbit.phase_x))


def sample_period(orbit: TipOrbit, n: int = 256):
    t = np.arange(n) * (orbit.period / n)
    return (t, *orbit_state(orbit, t))
