"""Clamped-free Euler-Bernoulli model of the stator column.

Each bending axis is treated independently with its own cut-section
properties. Mode shapes use the classic cantilever form, sign-normalized so
that the free-end value is +2 for every order; with that form the integral of
phi_n^2 over the column equals L.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from .config import AXES, MotorConfig, PiezoPatch, PiezoProps, StatorGeometry, ValidatedConfig, validate_config
from .errors import AxisMismatch, DomainError, EdgePeakWarning, FlatCurve, RangeError

_GAUSS_X, _GAUSS_W = np.polynomial.legendre.leggauss(64)


@lru_cache(maxsize=None)
def cantilever_eigenvalue(n: int) -> float:
    """n-th root of 1 + cos(l) cosh(l) = 0 (1.8751, 4.6941, 7.8548, ...)."""
    if n < 1:
        raise DomainError("mode order must be >= 1")
    # roots sit within (n - 1/2) pi +- 0.4 for every order
    centre = (n - 0.5) * math.pi
    return brentq(lambda lam: math.cos(lam) * math.cosh(lam) + 1.0, centre - 0.4 if n > 1 else 1.0,
                  centre + 0.4 if n > 1 else 2.5, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def _sigma(lam: float) -> float:
    return (math.cosh(lam) + math.cos(lam)) / (math.sinh(lam) + math.sin(lam))


def _sign(n: int) -> float:
    return 1.0 if n % 2 == 1 else -1.0


def mode_shape(n: int, x, L: float):
    """Dimensionless deflection phi_n(x) of a clamped-free beam, phi_n(L) = 2."""
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0) or np.any(xa > L * (1 + 1e-12)):
        raise DomainError(f"x must lie in [0, L={L}]")
    lam = cantilever_eigenvalue(n)
    s = _sigma(lam)
    u = lam * xa / L
    val = _sign(n) * (np.cosh(u) - np.cos(u) - s * (np.sinh(u) - np.sin(u)))
    return float(val) if np.ndim(val) == 0 else val


def mode_slope(n: int, x, L: float):
    """d(phi_n)/dx in 1/m."""
    lam = cantilever_eigenvalue(n)
    s = _sigma(lam)
    u = lam * np.asarray(x, dtype=float) / L
    val = _sign(n) * lam / L * (np.sinh(u) + np.sin(u) - s * (np.cosh(u) - np.cos(u)))
    return float(val) if np.ndim(val) == 0 else val


def mode_curvature(n: int, x, L: float):
    """d2(phi_n)/dx2 in 1/m^2."""
    lam = cantilever_eigenvalue(n)
    s = _sigma(lam)
    u = lam * np.asarray(x, dtype=float) / L
    val = _sign(n) * (lam / L) ** 2 * (np.cosh(u) + np.cos(u) - s * (np.sinh(u) + np.sin(u)))
    return float(val) if np.ndim(val) == 0 else val


def _integral_phi2(n: int, a: float, b: float, L: float) -> float:
    x = 0.5 * (b - a) * _GAUSS_X + 0.5 * (b + a)
    return float(0.5 * (b - a) * np.sum(_GAUSS_W * mode_shape(n, x, L) ** 2))


@dataclass(frozen=True)
class BendingMode:
    order: int
    eigenvalue: float
    natural_frequency: float  # rad/s
    modal_mass: float  # kg
    axis: str
    forcing: float = 0.0  # (m/s^2)/V, filled by bending_modes

    @property
    def frequency_hz(self) -> float:
        return self.natural_frequency / (2.0 * math.pi)


@dataclass(frozen=True)
class ForcedResponse:
    axis: str
    amplitude: complex  # m, at the contact plane
    frequency: float  # Hz

    @property
    def magnitude(self) -> float:
        return abs(self.amplitude)

    @property
    def phase(self) -> float:
        ph = cmath.phase(self.amplitude)
        return math.pi if ph == -math.pi else ph


@dataclass(frozen=True)
class ResponseCurve:
    frequency: np.ndarray  # Hz
    amplitude: np.ndarray  # m
    phase: np.ndarray  # rad
    axis: str = "x"
    voltage: float = 0.0


def natural_frequency(cfg: MotorConfig | ValidatedConfig, n: int, axis: str) -> float:
    """f_n in Hz for bending along ``axis`` (bare column section)."""
    vc = validate_config(cfg)
    if axis not in AXES:
        raise DomainError(f"axis must be one of {AXES}")
    sec = vc.sections[axis]
    mat = vc.config.material
    L = vc.config.stator.length
    lam = cantilever_eigenvalue(n)
    return lam**2 / (2.0 * math.pi) * math.sqrt(mat.youngs_modulus * sec.second_moment / (mat.density * sec.area)) / L**2


def modal_mass(cfg: ValidatedConfig, n: int, axis: str) -> float:
    """rho*A*int(phi^2) over the column plus patch mass weighted by phi^2 over each span."""
    L = cfg.config.stator.length
    m = cfg.config.material.density * cfg.sections[axis].area * _integral_phi2(n, 0.0, L, L)
    pz = cfg.config.piezo
    for p in cfg.config.patches:
        m += pz.density * p.width * p.thickness * _integral_phi2(n, p.span[0], p.span[1], L)
    return m


def _half_depth(stator: StatorGeometry, axis: str) -> float:
    return 0.5 * (stator.flat_cut_thickness if axis == "y" else stator.diameter)


def modal_forcing(patch: PiezoPatch, mode: BendingMode, piezo: PiezoProps, stator: StatorGeometry) -> float:
    """Modal acceleration per volt, Gamma = Theta / m_modal.

    The patch acts as a pair of end moments d31*E_p*w_p*zbar per volt, so
    Theta = -d31*E_p*w_p*zbar*(phi'(x2) - phi'(x1)). With d31 < 0 and a patch
    starting at the clamp, mode 1 gets Gamma > 0.
    """
    if patch.axis != mode.axis:
        raise AxisMismatch(f"patch on {patch.axis!r} cannot drive a mode on {mode.axis!r}")
    L = stator.length
    zbar = _half_depth(stator, mode.axis) + 0.5 * patch.thickness
    x1, x2 = patch.span
    dslope = mode_slope(mode.order, x2, L) - mode_slope(mode.order, x1, L)
    theta = -piezo.d31 * piezo.youngs_modulus * patch.width * zbar * dslope
    return theta / mode.modal_mass


def bending_modes(cfg: MotorConfig | ValidatedConfig, axis: str) -> list[BendingMode]:
    vc = validate_config(cfg)
    c = vc.config
    modes = []
    for n in range(1, c.stator.n_modes + 1):
        mode = BendingMode(
            order=n,
            eigenvalue=cantilever_eigenvalue(n),
            natural_frequency=2.0 * math.pi * natural_frequency(vc, n, axis),
            modal_mass=modal_mass(vc, n, axis),
            axis=axis,
        )
        gamma = modal_forcing(c.patch(axis), mode, c.piezo, c.stator)
        modes.append(BendingMode(**{**mode.__dict__, "forcing": gamma}))
    return modes


def _response(vc: ValidatedConfig, omega, V: float, axis: str):
    zeta = vc.config.piezo.damping_ratio
    zc = vc.config.stator.contact_height
    L = vc.config.stator.length
    total = 0.0
    for m in bending_modes(vc, axis):
        wn = m.natural_frequency
        q = m.forcing * V / (wn * wn - omega * omega + 2j * zeta * wn * omega)
        total = total + q * mode_shape(m.order, zc, L)
    return total


def forced_response(cfg: MotorConfig | ValidatedConfig, f: float, V: float, axis: str) -> ForcedResponse:
    """Steady harmonic displacement at the contact plane for drive V*sin(2 pi f t)."""
    if f < 0 or V < 0:
        raise DomainError("need f >= 0 and V >= 0")
    vc = validate_config(cfg)
    amp = complex(_response(vc, 2.0 * math.pi * f, V, axis))
    return ForcedResponse(axis=axis, amplitude=amp, frequency=f)


def sweep_response(cfg, f_lo: float, f_hi: float, n_points: int, V: float, axis: str = "x") -> ResponseCurve:
    if not (0 <= f_lo < f_hi) or n_points < 3:
        raise RangeError("need 0 <= f_lo < f_hi and n_points >= 3")
    vc = validate_config(cfg)
    f = np.linspace(f_lo, f_hi, n_points)
    z = np.asarray(_response(vc, 2.0 * np.pi * f, V, axis), dtype=complex) * np.ones_like(f)
    phase = np.angle(z)
    phase[phase == -np.pi] = np.pi
    return ResponseCurve(frequency=f, amplitude=np.abs(z), phase=phase, axis=axis, voltage=V)


def parabolic_vertex(x0, x1, x2, y0, y1, y2) -> float:
    """Abscissa of the parabola through three points."""
    denom = (x0 - x1) * (x0 - x2) * (x1 - x2)
    a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom
    b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / denom
    if a == 0:
        return x1
    return -b / (2 * a)


def find_resonance(curve: ResponseCurve | tuple) -> float:
    """Frequency of the response maximum, refined by a 3-point parabola.

    Emits :class:`EdgePeakWarning` and returns the endpoint when the
    maximum lies on the boundary of the grid.
    """
    f, a = (curve.frequency, curve.amplitude) if isinstance(curve, ResponseCurve) else curve
    f = np.asarray(f, dtype=float)
    a = np.asarray(a, dtype=float)
    if f.size < 3 or f.size != a.size:
        raise RangeError("curve needs >= 3 points of matching length")
    if np.all(a == a[0]):
        raise FlatCurve("all samples are equal")
    k = int(np.argmax(a))
    if k == 0 or k == f.size - 1:
        warnings.warn(f"response peak at grid edge ({f[k]:g} Hz)", EdgePeakWarning, stacklevel=2)
        return float(f[k])
    return float(parabolic_vertex(f[k - 1], f[k], f[k + 1], a[k - 1], a[k], a[k + 1]))
