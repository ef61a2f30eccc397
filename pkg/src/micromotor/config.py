"""Motor parameterization, defaults, validation and config-file I/O.

All quantities are SI. Degrees appear only as ``tilt_deg`` and r/min only at
the CLI/report boundary (see :func:`rad_s_to_rpm`).

Configuration files are YAML documents whose nesting mirrors the dotted key
paths accepted by ``--set`` (``stator.length``, ``patch.x.span``,
``rotor.segments[1].inner_radius``, ``tilt_deg`` ...).
"""

from __future__ import annotations

import copy
import hashlib
import json
import math
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

import yaml

from .errors import ClearanceError, ConfigError, GeometryError, IntegratorError

GRAVITY = 9.80665  # m/s^2
RAD_S_TO_RPM = 9.549296585513720  # 60 / (2 pi), correctly rounded; 60 / (2 * math.pi) is 1 ulp high
AXES = ("x", "y")


def rad_s_to_rpm(omega: float) -> float:
    return omega * RAD_S_TO_RPM


def rpm_to_rad_s(rpm: float) -> float:
    return rpm / RAD_S_TO_RPM


# Handbook values, not measured on the prototype motor. 316 stainless steel for
# stator and rotor, PZT8 for the patches. Rotor outer diameter, segment inner
# radii/heights and all contact constants are assumptions.
DEFAULTS: dict[str, Any] = {
    "material": {"name": "316 stainless (handbook)", "youngs_modulus": 193e9, "density": 7980.0},
    "piezo": {
        "name": "PZT8 (handbook)",
        "d31": -97e-12,
        "youngs_modulus": 87e9,
        "density": 7600.0,
        "qm": 1000.0,
    },
    "stator": {
        "length": 6e-3,
        "diameter": 1e-3,
        "flat_cut_thickness": 0.8e-3,
        "shaft_radius": 0.25e-3,
        "contact_height": 6e-3,
        "n_modes": 2,
    },
    "patch": {
        "x": {"length": 5e-3, "width": 0.8e-3, "thickness": 0.8e-3, "span": [0.0, 5e-3]},
        "y": {"length": 5e-3, "width": 0.8e-3, "thickness": 0.8e-3, "span": [0.0, 5e-3]},
    },
    "rotor": {
        "bore_radius": 0.3e-3,
        # assumed: OD 1.0 mm, three 1 mm tall segments, hollowed middle
        "segments": [
            {"outer_radius": 0.5e-3, "inner_radius": 0.30e-3, "height": 1e-3},
            {"outer_radius": 0.5e-3, "inner_radius": 0.40e-3, "height": 1e-3},
            {"outer_radius": 0.5e-3, "inner_radius": 0.35e-3, "height": 1e-3},
        ],
        "material": None,  # None -> same as stator material
    },
    "drive": {
        "amplitude": 250.0,
        "frequency": 64.9e3,
        "phase_offset": -math.pi / 2,
        "scale_x": 1.0,
        "scale_y": 1.0,
    },
    "tilt_deg": 0.0,
    "contact": {
        "penalty_stiffness": None,  # None -> auto rule, see validate_config
        "damping": None,  # None -> damping_ratio of critical
        "damping_ratio": 0.3,
        "friction": 0.3,
        "thrust_friction": 0.05,
        "slip_regularization": None,  # None -> 0.01 * omega * orbit semi-major axis
        "thrust_radius": 0.15e-3,
        "viscous_drag": 0.0,  # N*m*s/rad
    },
    "sim": {
        "dt": None,  # None -> 1 / (steps_per_cycle * f), within the stability bound
        "steps_per_cycle": 100,
        "duration": 0.1,
        "record_stride": 10,
        "load_torque": 0.0,
        "warmup_cycles": 2,
        "average_cycles": 8,
    },
}


@dataclass(frozen=True)
class MaterialProps:
    name: str
    youngs_modulus: float  # Pa
    density: float  # kg/m^3

    def __post_init__(self):
        if not self.youngs_modulus > 0 or not self.density > 0:
            raise GeometryError(f"material {self.name!r}: modulus and density must be > 0")


@dataclass(frozen=True)
class PiezoProps:
    name: str
    d31: float  # m/V, signed
    youngs_modulus: float  # Pa
    density: float  # kg/m^3
    qm: float  # mechanical quality factor

    def __post_init__(self):
        if not self.qm > 0:
            raise ConfigError("piezo.qm must be > 0")
        if not 0.0 < self.damping_ratio < 1.0:
            raise ConfigError(f"damping ratio 1/(2 Qm) = {self.damping_ratio} outside (0, 1)")
        if not self.youngs_modulus > 0 or not self.density > 0:
            raise GeometryError("piezo modulus and density must be > 0")

    @property
    def damping_ratio(self) -> float:
        return 1.0 / (2.0 * self.qm)


@dataclass(frozen=True)
class StatorGeometry:
    length: float = 6e-3  # m, clamp to free end
    diameter: float = 1e-3  # m
    flat_cut_thickness: float = 0.8e-3  # m, flat face to opposite side
    shaft_radius: float = 0.25e-3  # m
    contact_height: float = 6e-3  # m, rotor contact plane measured from the clamp
    n_modes: int = 2

    def __post_init__(self):
        if not (self.length > 0 and self.diameter > 0):
            raise GeometryError("stator length and diameter must be > 0")
        if not 0 < self.flat_cut_thickness <= self.diameter:
            raise GeometryError("need 0 < flat_cut_thickness <= diameter")
        if not 0 < self.shaft_radius < self.diameter / 2:
            raise GeometryError("need 0 < shaft_radius < diameter/2")
        if not 0 < self.contact_height <= self.length:
            raise GeometryError("need 0 < contact_height <= length")
        if not 1 <= self.n_modes <= 3:
            raise ConfigError("stator.n_modes must be 1, 2 or 3")


@dataclass(frozen=True)
class PiezoPatch:
    axis: str
    span: tuple[float, float]  # m, attachment interval along the column
    length: float = 5e-3
    width: float = 0.8e-3
    thickness: float = 0.8e-3

    def __post_init__(self):
        if self.axis not in AXES:
            raise ConfigError(f"patch axis must be one of {AXES}, got {self.axis!r}")
        if min(self.length, self.width, self.thickness) <= 0:
            raise GeometryError("patch dimensions must be > 0")
        x1, x2 = self.span
        if not 0 <= x1 < x2:
            raise GeometryError(f"patch span {self.span} must satisfy 0 <= x1 < x2")


@dataclass(frozen=True)
class AnnulusSegment:
    outer_radius: float
    inner_radius: float
    height: float

    def __post_init__(self):
        if not self.height > 0:
            raise GeometryError("segment height must be > 0")
        if not self.outer_radius > self.inner_radius >= 0:
            raise GeometryError("segment needs outer_radius > inner_radius >= 0")


@dataclass(frozen=True)
class RotorGeometry:
    segments: tuple[AnnulusSegment, ...]
    bore_radius: float
    material: MaterialProps

    def __post_init__(self):
        if not self.segments:
            raise GeometryError("rotor needs at least one segment")
        if not self.bore_radius > 0:
            raise GeometryError("bore radius must be > 0")


@dataclass(frozen=True)
class DriveSignal:
    amplitude: float  # V
    frequency: float  # Hz
    phase_offset: float = -math.pi / 2  # rad, phase of E2 relative to E1
    scale_x: float = 1.0
    scale_y: float = 1.0

    def __post_init__(self):
        if self.amplitude < 0:
            raise ConfigError("drive amplitude must be >= 0")
        if not self.frequency > 0:
            raise ConfigError("drive frequency must be > 0")
        if self.scale_x < 0 or self.scale_y < 0:
            raise ConfigError("per-axis drive scales must be >= 0")

    @property
    def omega(self) -> float:
        return 2.0 * math.pi * self.frequency

    def axis_voltage(self, axis: str) -> float:
        return self.amplitude * (self.scale_x if axis == "x" else self.scale_y)

    def axis_phase(self, axis: str) -> float:
        return 0.0 if axis == "x" else self.phase_offset


@dataclass(frozen=True)
class TiltConfig:
    tilt_deg: float = 0.0  # 0 horizontal, +-90 vertical

    def __post_init__(self):
        if not -90.0 <= self.tilt_deg <= 90.0:
            raise ConfigError("tilt_deg must lie in [-90, 90]")

    @property
    def transverse_factor(self) -> float:
        # cos(90 deg) evaluates to 6e-17; snap the vertical case to an exact zero
        if abs(self.tilt_deg) == 90.0:
            return 0.0
        return math.cos(math.radians(self.tilt_deg))

    @property
    def axial_factor(self) -> float:
        return math.sin(math.radians(self.tilt_deg))


@dataclass(frozen=True)
class ContactParams:
    penalty_stiffness: float | None = None  # N/m
    damping: float | None = None  # N*s/m
    damping_ratio: float = 0.3
    friction: float = 0.3
    thrust_friction: float = 0.05
    slip_regularization: float | None = None  # m/s
    thrust_radius: float = 0.15e-3  # m
    viscous_drag: float = 0.0  # N*m*s/rad

    def __post_init__(self):
        if self.penalty_stiffness is not None and not self.penalty_stiffness > 0:
            raise ConfigError("contact.penalty_stiffness must be > 0")
        if self.damping is not None and self.damping < 0:
            raise ConfigError("contact.damping must be >= 0")
        if self.damping_ratio < 0:
            raise ConfigError("contact.damping_ratio must be >= 0")
        if self.friction < 0 or self.thrust_friction < 0:
            raise ConfigError("friction coefficients must be >= 0")
        if self.slip_regularization is not None and not self.slip_regularization > 0:
            raise ConfigError("contact.slip_regularization must be > 0")
        if self.thrust_radius < 0 or self.viscous_drag < 0:
            raise ConfigError("thrust_radius and viscous_drag must be >= 0")


@dataclass(frozen=True)
class SimSettings:
    dt: float | None = None
    steps_per_cycle: int = 100
    duration: float = 0.1
    record_stride: int = 10
    load_torque: float = 0.0  # N*m, resistive
    warmup_cycles: int = 2
    average_cycles: int = 8

    def __post_init__(self):
        if self.dt is not None and not self.dt > 0:
            raise IntegratorError("sim.dt must be > 0")
        if not self.duration > 0:
            raise IntegratorError("sim.duration must be > 0")
        if self.record_stride < 1 or self.steps_per_cycle < 50:
            raise IntegratorError("need record_stride >= 1 and steps_per_cycle >= 50")
        if self.load_torque < 0:
            raise ConfigError("sim.load_torque is resistive and must be >= 0")
        if self.warmup_cycles < 0 or self.average_cycles < 1:
            raise ConfigError("need warmup_cycles >= 0 and average_cycles >= 1")


@dataclass(frozen=True)
class MotorConfig:
    material: MaterialProps
    piezo: PiezoProps
    stator: StatorGeometry
    patches: tuple[PiezoPatch, PiezoPatch]
    rotor: RotorGeometry
    drive: DriveSignal
    tilt: TiltConfig
    contact: ContactParams
    sim: SimSettings
    source: dict = field(default_factory=dict, compare=False, repr=False)

    @classmethod
    def from_dict(cls, data: dict | None = None) -> "MotorConfig":
        """Build a config from a (partial) nested dict merged over DEFAULTS."""
        d = merge_dicts(DEFAULTS, data or {})
        try:
            material = MaterialProps(**d["material"])
            rotor_mat = d["rotor"].get("material")
            rotor_material = material if rotor_mat is None else MaterialProps(**merge_dicts(d["material"], rotor_mat))
            patches = tuple(
                PiezoPatch(axis=ax, span=tuple(float(v) for v in d["patch"][ax].get("span", [0.0, d["patch"][ax]["length"]])),
                           **{k: v for k, v in d["patch"][ax].items() if k != "span"})
                for ax in AXES
            )
            rotor = RotorGeometry(
                segments=tuple(AnnulusSegment(**s) for s in d["rotor"]["segments"]),
                bore_radius=d["rotor"]["bore_radius"],
                material=rotor_material,
            )
            return cls(
                material=material,
                piezo=PiezoProps(**d["piezo"]),
                stator=StatorGeometry(**d["stator"]),
                patches=patches,
                rotor=rotor,
                drive=DriveSignal(**d["drive"]),
                tilt=TiltConfig(float(d["tilt_deg"])),
                contact=ContactParams(**d["contact"]),
                sim=SimSettings(**d["sim"]),
                source=d,
            )
        except TypeError as exc:  # unknown or missing keyword
            raise ConfigError(str(exc)) from exc

    def to_dict(self) -> dict:
        return copy.deepcopy(self.source) if self.source else merge_dicts(DEFAULTS, {})

    def patch(self, axis: str) -> PiezoPatch:
        for p in self.patches:
            if p.axis == axis:
                return p
        raise ConfigError(f"no patch on axis {axis!r}")

    def replace(self, overrides: dict[str, Any]) -> "MotorConfig":
        """Return a new config with dotted-key overrides applied."""
        d = self.to_dict()
        for key, value in overrides.items():
            set_path(d, key, value)
        return MotorConfig.from_dict(d)


@dataclass(frozen=True)
class SectionProps:
    area: float  # m^2
    second_moment: float  # m^4, centroidal, about the axis normal to bending
    centroid: float  # m, offset of the centroid from the circle center along the cut normal


@dataclass(frozen=True)
class ValidatedConfig:
    """A MotorConfig plus cached derived quantities. Immutable."""

    config: MotorConfig
    clearance: float  # m
    rotor_mass: float  # kg
    rotor_inertia: float  # kg*m^2
    sections: dict  # axis -> SectionProps
    penalty_stiffness: float  # N/m, resolved
    dt: float  # s, resolved

    def __getattr__(self, name):
        # dataclass fields resolve normally; everything else comes from the config
        if name.startswith("__") or name == "config":
            raise AttributeError(name)
        return getattr(self.config, name)

    @property
    def n_steps(self) -> int:
        return int(math.ceil(self.config.sim.duration / self.dt - 1e-9))

    @property
    def transverse_gravity(self) -> float:
        return GRAVITY * self.config.tilt.transverse_factor

    @property
    def axial_gravity(self) -> float:
        return GRAVITY * abs(self.config.tilt.axial_factor)

    def replace(self, overrides: dict[str, Any]) -> "ValidatedConfig":
        return validate_config(self.config.replace(overrides))

    @property
    def hash(self) -> str:
        return config_hash(self.config)


def _seg_F0(y: float, R: float) -> float:
    s = math.sqrt(max(R * R - y * y, 0.0))
    return 0.5 * (y * s + R * R * math.asin(max(-1.0, min(1.0, y / R))))


def _seg_F2(y: float, R: float) -> float:
    s = math.sqrt(max(R * R - y * y, 0.0))
    return y / 8.0 * (2 * y * y - R * R) * s + R**4 / 8.0 * math.asin(max(-1.0, min(1.0, y / R)))


def _seg_F3(y: float, R: float) -> float:
    s = math.sqrt(max(R * R - y * y, 0.0))
    return y / 8.0 * (5 * R * R - 2 * y * y) * s + 3 * R**4 / 8.0 * math.asin(max(-1.0, min(1.0, y / R)))


def section_properties(stator: StatorGeometry, axis: str) -> SectionProps:
    """Area and centroidal second moment of the flat-cut circular section.

    The section is the disk of diameter D with everything beyond the chord at
    distance ``flat_cut_thickness`` from the opposite side removed. The flat's
    normal is +y: bending along ``"y"`` sees the reduced depth, bending along
    ``"x"`` keeps the full width.
    """
    if axis not in AXES:
        raise GeometryError(f"axis must be one of {AXES}")
    D, t = stator.diameter, stator.flat_cut_thickness
    if not (D > 0 and 0 < t <= D):
        raise GeometryError("need D > 0 and 0 < flat_cut_thickness <= D")
    R = D / 2
    h = t - R  # chord position
    area = 2.0 * (_seg_F0(h, R) - _seg_F0(-R, R))
    first = -2.0 / 3.0 * max(R * R - h * h, 0.0) ** 1.5
    ybar = first / area
    if axis == "y":
        i_origin = 2.0 * (_seg_F2(h, R) - _seg_F2(-R, R))
        inertia = i_origin - area * ybar * ybar
    else:
        inertia = 2.0 / 3.0 * (_seg_F3(h, R) - _seg_F3(-R, R))
    return SectionProps(area=area, second_moment=inertia, centroid=ybar)


def auto_penalty_stiffness(mass: float, clearance: float, omega: float, dt_cap: float) -> float:
    """Default contact stiffness: 100 m g / c * max(1, (omega/omega_grav)^2),
    capped so that dt <= sqrt(m/k)/20 holds for ``dt_cap``."""
    omega_grav = math.sqrt(GRAVITY / clearance)
    k = 100.0 * mass * GRAVITY / clearance * max(1.0, (omega / omega_grav) ** 2)
    return min(k, mass / (20.0 * dt_cap) ** 2)


def validate_config(cfg: MotorConfig | ValidatedConfig) -> ValidatedConfig:
    """Check the joint invariants of ``cfg`` and cache derived quantities."""
    if isinstance(cfg, ValidatedConfig):
        return cfg
    st, rotor = cfg.stator, cfg.rotor
    clearance = rotor.bore_radius - st.shaft_radius
    if not clearance > 0:
        raise ClearanceError(
            f"bore radius {rotor.bore_radius} must exceed shaft radius {st.shaft_radius}"
        )
    for p in cfg.patches:
        if p.span[1] > st.length:
            raise GeometryError(f"patch {p.axis} span {p.span} exceeds stator length {st.length}")
    if sorted(p.axis for p in cfg.patches) != sorted(AXES):
        raise ConfigError("standard config needs exactly one patch per axis")
    if any(s.inner_radius > 0 and s.inner_radius < rotor.bore_radius - 1e-15 for s in rotor.segments):
        raise GeometryError("no rotor segment may be narrower than the bore")

    from .inertia import inertia_axial

    report = inertia_axial(rotor)
    mass, inertia = report.mass, report.inertia_axial
    f = cfg.drive.frequency
    dt_cycle = 1.0 / (50.0 * f)
    dt_target = cfg.sim.dt if cfg.sim.dt is not None else 1.0 / (cfg.sim.steps_per_cycle * f)
    k = cfg.contact.penalty_stiffness
    if k is None:
        k = auto_penalty_stiffness(mass, clearance, cfg.drive.omega, dt_target)
    dt_contact = math.sqrt(mass / k) / 20.0
    if cfg.sim.dt is None:
        dt = min(dt_target, dt_contact)
    else:
        dt = cfg.sim.dt
        bound = min(dt_cycle, dt_contact)
        if dt > bound * (1 + 1e-12):
            raise IntegratorError(f"dt = {dt:g} s exceeds stability bound {bound:g} s")
    sections = {ax: section_properties(st, ax) for ax in AXES}
    return ValidatedConfig(
        config=cfg,
        clearance=clearance,
        rotor_mass=mass,
        rotor_inertia=inertia,
        sections=sections,
        penalty_stiffness=k,
        dt=dt,
    )


# ---------------------------------------------------------------- dict / files

_PATH_TOKEN = re.compile(r"([^.\[\]]+)|\[(\d+)\]")


class _Loader(yaml.SafeLoader):
    """SafeLoader that also reads exponent floats without a dot (``5e-3``)."""


_Loader.add_implicit_resolver(
    "tag:yaml.org,2002:float",
    re.compile(r"^[-+]?(?:\d+\.?\d*|\.\d+)[eE][-+]?\d+$"),
    list("-+0123456789."),
)


def _yaml(text: str) -> Any:
    return yaml.load(text, Loader=_Loader)


def merge_dicts(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in over.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = merge_dicts(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def _split_path(path: str) -> list:
    parts: list = []
    pos = 0
    for m in _PATH_TOKEN.finditer(path):
        if m.start() != pos and path[pos:m.start()] != ".":
            raise ConfigError(f"malformed key path {path!r}")
        parts.append(int(m.group(2)) if m.group(2) is not None else m.group(1))
        pos = m.end()
    if pos != len(path) or not parts:
        raise ConfigError(f"malformed key path {path!r}")
    return parts


def set_path(d: dict, path: str, value: Any) -> None:
    """Set ``value`` at a dotted path such as ``rotor.segments[0].height``."""
    parts = _split_path(path)
    node: Any = d
    for i, part in enumerate(parts[:-1]):
        nxt = parts[i + 1]
        if isinstance(part, int):
            if not isinstance(node, list) or part >= len(node):
                raise ConfigError(f"index {part} out of range in {path!r}")
            node = node[part]
        else:
            if part not in node or node[part] is None:
                node[part] = [] if isinstance(nxt, int) else {}
            node = node[part]
    last = parts[-1]
    if isinstance(last, int):
        if not isinstance(node, list) or last >= len(node):
            raise ConfigError(f"index {last} out of range in {path!r}")
        node[last] = value
    else:
        node[last] = value


def get_path(d: dict, path: str) -> Any:
    node: Any = d
    for part in _split_path(path):
        try:
            node = node[part]
        except (KeyError, IndexError, TypeError) as exc:
            raise ConfigError(f"unknown key {path!r}") from exc
    return node


def parse_override(text: str) -> tuple[str, Any]:
    if "=" not in text:
        raise ConfigError(f"override {text!r} is not of the form key=value")
    key, raw = text.split("=", 1)
    return key.strip(), _yaml(raw)


def _check_known_keys(data: dict, ref: dict, prefix: str = "") -> None:
    for key, value in data.items():
        if key not in ref:
            raise ConfigError(f"unknown config key {prefix + key!r}")
        if isinstance(value, dict) and isinstance(ref[key], dict):
            _check_known_keys(value, ref[key], prefix + key + ".")


def preset_names() -> list[str]:
    root = resources.files("micromotor") / "presets"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".yaml"))


def preset_dict(name: str) -> dict:
    path = resources.files("micromotor") / "presets" / f"{name}.yaml"
    if not path.is_file():
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(preset_names())}")
    return _yaml(path.read_text()) or {}


def load_config(
    path: str | Path | None = None,
    overrides: list[str] | dict | None = None,
    preset: str | None = None,
) -> MotorConfig:
    """Assemble a config from defaults, an optional preset, a file and overrides.

    Later sources win: defaults < preset < file < overrides.
    """
    data: dict = {}
    if preset:
        data = preset_dict(preset)
        data.pop("meta", None)
    if path:
        file_data = _yaml(Path(path).read_text()) or {}
        file_data.pop("meta", None)
        data = merge_dicts(data, file_data)
    _check_known_keys(data, DEFAULTS)
    merged = merge_dicts(DEFAULTS, data)
    items = overrides.items() if isinstance(overrides, dict) else (parse_override(o) for o in overrides or [])
    for key, value in items:
        get_path(merged, key)  # rejects unknown keys
        set_path(merged, key, value)
    return MotorConfig.from_dict(merged)


def preset_meta(name: str) -> dict:
    return preset_dict(name).get("meta", {})


def config_hash(cfg: MotorConfig) -> str:
    blob = json.dumps(cfg.to_dict(), sort_keys=True, default=repr)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]
