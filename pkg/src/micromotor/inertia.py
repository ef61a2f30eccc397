"""Rotor mass, axial moment of inertia and the spin-up torque estimate."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .config import AnnulusSegment, RotorGeometry
from .errors import DomainError, GeometryError


@dataclass(frozen=True)
class SegmentInertia:
    segment: AnnulusSegment
    mass: float  # kg
    inertia: float  # kg*m^2


@dataclass(frozen=True)
class InertiaReport:
    mass: float  # kg
    inertia_axial: float  # kg*m^2
    segments: tuple[SegmentInertia, ...]

    def format(self) -> str:
        lines = [f"{'seg':>3}  {'R_out [m]':>11}  {'R_in [m]':>11}  {'h [m]':>11}  {'mass [kg]':>12}  {'I [kg m^2]':>12}"]
        for i, s in enumerate(self.segments):
            g = s.segment
            lines.append(
                f"{i:>3}  {g.outer_radius:>11.4e}  {g.inner_radius:>11.4e}  {g.height:>11.4e}  {s.mass:>12.5e}  {s.inertia:>12.5e}"
            )
        lines.append(f"{'sum':>3}  {'':>11}  {'':>11}  {'':>11}  {self.mass:>12.5e}  {self.inertia_axial:>12.5e}")
        return "\n".join(lines)

    def csv_rows(self) -> list[list]:
        rows = [["segment", "outer_radius_m", "inner_radius_m", "height_m", "mass_kg", "inertia_kg_m2"]]
        for i, s in enumerate(self.segments):
            g = s.segment
            rows.append([i, repr(g.outer_radius), repr(g.inner_radius), repr(g.height), repr(s.mass), repr(s.inertia)])
        rows.append(["total", "", "", "", repr(self.mass), repr(self.inertia_axial)])
        return rows


def inertia_axial(rotor: RotorGeometry) -> InertiaReport:
    """Sum of thick-annulus contributions I_i = m_i (R_o^2 + R_i^2) / 2."""
    rho = rotor.material.density
    parts = []
    for seg in rotor.segments:
        if not (seg.height > 0 and seg.outer_radius > seg.inner_radius >= 0):
            raise GeometryError(f"invalid segment {seg}")
        m = rho * math.pi * (seg.outer_radius**2 - seg.inner_radius**2) * seg.height
        parts.append(SegmentInertia(seg, m, 0.5 * m * (seg.outer_radius**2 + seg.inner_radius**2)))
    return InertiaReport(
        mass=math.fsum(p.mass for p in parts),
        inertia_axial=math.fsum(p.inertia for p in parts),
        segments=tuple(parts),
    )


def torque_from_spinup(inertia: float, omega_max: float, t_rise: float) -> float:
    """Constant-acceleration torque estimate T = I * omega_max / t_rise."""
    if not t_rise > 0:
        raise DomainError("t_rise must be > 0")
    return inertia * (omega_max / t_rise)
