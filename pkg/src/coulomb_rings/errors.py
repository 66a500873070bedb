"""Exception types raised across the package."""

from __future__ import annotations


class CoulombRingsError(Exception):
    """Base class for all package errors."""


class CoincidentParticles(CoulombRingsError, ValueError):
    """Two particles share a position, so the pair energy is undefined."""


class OriginSingularity(CoulombRingsError, ValueError):
    """A particle sits on the interior point charge."""


class NonPositiveRadius(CoulombRingsError, ValueError):
    pass


class NotAtEquilibrium(CoulombRingsError, ValueError):
    pass


class SOutOfRange(CoulombRingsError, ValueError):
    pass


class TooFewParticles(CoulombRingsError, ValueError):
    pass


class NonConvergence(CoulombRingsError, RuntimeError):
    """Local refinement stopped before reaching the gradient tolerance."""


class UnknownM(CoulombRingsError, KeyError):
    pass


class BadInputFile(CoulombRingsError, ValueError):
    pass
