"""Centripetal-friction piezoelectric micromotor simulation."""

__version__ = "0.1.0"
