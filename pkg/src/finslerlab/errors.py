"""Exception hierarchy.

Numerical domain failures derive from :class:`GeometryError`; bad model or
scenario data derives from :class:`ConfigurationError` (the CLI maps the
latter to exit code 2).
"""

from __future__ import annotations


class FinslerLabError(Exception):
    """Base class for every error raised by this package."""


class GeometryError(FinslerLabError):
    pass


class ConfigurationError(FinslerLabError):
    pass


class DimensionMismatch(GeometryError, ValueError):
    pass


class ConeViolation(GeometryError):
    pass


class DualConeViolation(GeometryError):
    pass


class DomainViolation(GeometryError):
    pass


class SingularTensor(GeometryError):
    pass


class NewtonDivergence(GeometryError):
    pass


class OutOfDomain(GeometryError):
    pass


class DegenerateFlag(GeometryError):
    pass


class NoConicNormal(GeometryError):
    pass


class FrameDegenerate(GeometryError):
    pass


class NormalExcluded(GeometryError):
    pass


class InsufficientSamples(GeometryError):
    pass


class EmptyDomain(GeometryError):
    pass


class UnsupportedOperation(GeometryError):
    pass


class NotUnitWind(ConfigurationError):
    pass


class NotKilling(ConfigurationError):
    pass
