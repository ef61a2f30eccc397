"""Exception and warning types raised across the package."""


class MicromotorError(Exception):
    """Base class for all package errors."""


class ConfigError(MicromotorError):
    """Malformed configuration input (unknown key, bad value type)."""


class GeometryError(ConfigError):
    """Non-positive or inconsistent dimensions."""


class ClearanceError(GeometryError):
    """Rotor bore does not clear the shaft (R_b <= R_s)."""


class IntegratorError(ConfigError):
    """Time step violates the stability bound."""


class DomainError(MicromotorError, ValueError):
    """Argument outside the domain of a function."""


class AxisMismatch(MicromotorError, ValueError):
    """Piezo patch and bending mode act on different axes."""


class RangeError(MicromotorError, ValueError):
    """Invalid sweep range or grid."""


class FlatCurve(MicromotorError, ValueError):
    """Response curve carries no peak information."""


class BlowUp(MicromotorError, RuntimeError):
    """Simulation state left its finite guard."""


class StallError(MicromotorError, RuntimeError):
    """Drive torque at rest cannot overcome the resistive torque."""


class EdgePeakWarning(UserWarning):
    """Maximum of a response curve sits on the grid boundary."""
