"""Analytic stability theory of a single ring of charges.

A ring of ``N`` charges at radius ``R`` around an enclosed charge ``Q`` is a
critical point exactly when ``R^2 = Q + (N - 1)/2``. Its small oscillations
split into angular modes ``s(N - s)`` and radial modes
``4Q + 2(N - 1) - s(N - s)`` for ``s = 0 .. N-1``. Both spectra come from the
circulant matrices ``L`` and ``B`` built here, whose eigenvalues are known in
closed form.

Conventions: spectra are indexed ``s = 0 .. N-1``; matrix eigenvalues and
the two trigonometric sum rules use ``s = 1 .. N`` with ``s = 0`` the same as
``s = N``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NotAtEquilibrium, SOutOfRange

EQUILIBRIUM_TOL = 1e-12


def equilibrium_radius(n: int, q: float = 0.0) -> float:
    """Squared radius ``R^2`` at which a ring of ``n`` around ``q`` is stationary."""
    if n < 1 or q < 0.0:
        raise ValueError("need n >= 1 and q >= 0")
    return q + (n - 1) / 2.0


@dataclass(frozen=True)
class RingAnsatz:
    n: int
    q: float
    r: float

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ValueError("a ring needs at least two particles")
        if self.q < 0.0 or self.r <= 0.0:
            raise ValueError("need q >= 0 and r > 0")

    @classmethod
    def at_equilibrium(cls, n: int, q: float = 0.0) -> "RingAnsatz":
        return cls(n, q, math.sqrt(equilibrium_radius(n, q)))

    @property
    def is_equilibrium(self) -> bool:
        return abs(self.r**2 - equilibrium_radius(self.n, self.q)) < EQUILIBRIUM_TOL


@dataclass(frozen=True)
class RingSpectrum:
    n: int
    q: float
    angular: np.ndarray
    radial: np.ndarray

    @property
    def min_radial(self) -> float:
        return float(self.radial.min())

    @property
    def stable(self) -> bool:
        # a zero radial mode is marginal; quartic terms decide, so not stable
        return self.min_radial > 0.0

    def combined(self) -> np.ndarray:
        return np.sort(np.concatenate([self.angular, self.radial]))


def ring_spectrum(a: RingAnsatz) -> RingSpectrum:
    if not a.is_equilibrium:
        raise NotAtEquilibrium(
            f"R^2 = {a.r**2!r} but a ring of {a.n} around Q={a.q} needs "
            f"R^2 = {equilibrium_radius(a.n, a.q)!r}"
        )
    s = np.arange(a.n, dtype=np.float64)
    angular = s * (a.n - s)
    radial = 4.0 * a.q + 2.0 * (a.n - 1) - angular
    return RingSpectrum(a.n, a.q, angular, radial)


def _largest_below(cond, start: int) -> int:
    n = start
    while n > 0 and not cond(n):
        n -= 1
    while cond(n + 1):
        n += 1
    return n


def nmax_interior(q: float) -> int:
    """Largest integer strictly below ``4 (sqrt(q + 1/2) + 1)``.

    The comparison is done on squares, ``(n - 4)^2 < 16 q + 8``, so exact
    integer bounds such as ``q = 1/2`` resolve to ``bound - 1``.
    """
    if q < 0.0:
        raise ValueError("q must be >= 0")
    bound = 4.0 * (math.sqrt(q + 0.5) + 1.0)
    return _largest_below(lambda n: n <= 4 or (n - 4) ** 2 < 16.0 * q + 8.0, int(bound))


def nmax_total(m: int) -> int:
    """Outer-ring capacity for ``m`` particles in total, at least 1.

    Largest integer strictly below ``4 (sqrt(m + 1/2) - 1)``, compared as
    ``(n + 4)^2 < 16 m + 8`` in exact integer arithmetic.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    n = _largest_below(lambda k: (k + 4) ** 2 < 16 * m + 8, max(int(4.0 * (math.sqrt(m + 0.5) - 1.0)), 0))
    return max(n, 1)


def _offsets(n: int) -> np.ndarray:
    j = np.arange(1, n + 1)
    return j[:, None] - j[None, :]


def matrix_L(n: int) -> np.ndarray:
    """``L_jk = (1 - delta_jk)(1 + i cot(pi (j - k)/n))``."""
    if n < 2:
        raise ValueError("n must be >= 2")
    diff = _offsets(n)
    off = diff != 0
    out = np.zeros((n, n), dtype=np.complex128)
    out[off] = 1.0 + 1j / np.tan(np.pi * diff[off] / n)
    return out


def matrix_B(n: int) -> np.ndarray:
    """``B_jk = (1 - delta_jk) / sin^2(pi (j - k)/n)``."""
    if n < 2:
        raise ValueError("n must be >= 2")
    diff = _offsets(n)
    off = diff != 0
    out = np.zeros((n, n))
    out[off] = 1.0 / np.sin(np.pi * diff[off] / n) ** 2
    return out


def fourier_vector(n: int, s: int) -> np.ndarray:
    """``psi_k = exp(-2 pi i k s / n)`` for ``k = 1 .. n``."""
    k = np.arange(1, n + 1)
    return np.exp(-2j * np.pi * k * s / n)


def L_eigenvalues(n: int) -> np.ndarray:
    s = np.arange(1, n + 1)
    return (2 * s - n - 1).astype(np.float64)


def B_eigenvalues(n: int) -> np.ndarray:
    # (n^2 - 1)/3 rather than (n^2 - 1)/2: trace(B) = 0 forces the 1/3
    s = np.arange(1, n + 1)
    return (n * n - 1) / 3.0 - 2.0 * s * (n - s)


def B_from_L(n: int) -> np.ndarray:
    """``B`` rebuilt as ``(L^2 + 2L - (n^2 - 1)/3 I) / 2``."""
    lm = matrix_L(n)
    return 0.5 * (lm @ lm + 2.0 * lm - (n * n - 1) / 3.0 * np.eye(n))


def phase_sum(n: int, s: int) -> complex:
    """Direct sum of ``exp(2 pi i k s/n) / (1 - exp(2 pi i k/n))`` over ``k = 1 .. n-1``.

    Equals ``s - (n + 1)/2`` for ``1 <= s <= n`` (:func:`phase_sum_closed`).
    At ``s = n`` this is the force balance sum ``(n - 1)/2`` behind the
    equilibrium radius. With ``exp(-2 pi i k s/n)`` in the numerator the
    same closed form holds at ``n - s`` instead of ``s``.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if not 1 <= s <= n:
        raise SOutOfRange(f"s must lie in 1..{n}; use s={n} for s=0")
    k = np.arange(1, n)
    w = np.exp(2j * np.pi * k / n)
    return complex(np.sum(np.exp(2j * np.pi * k * s / n) / (1.0 - w)))


def phase_sum_closed(n: int, s: int) -> float:
    if not 1 <= s <= n:
        raise SOutOfRange(f"s must lie in 1..{n}")
    return s - (n + 1) / 2.0


def cosecant_sum(n: int, s: int) -> float:
    """Direct sum of ``cos(2 k s pi/n) / sin^2(k pi/n)`` over ``k = 1 .. n-1``."""
    if n < 2:
        raise ValueError("n must be >= 2")
    if not 0 <= s <= n:
        raise SOutOfRange(f"s must lie in 0..{n}")
    k = np.arange(1, n)
    return float(np.sum(np.cos(2.0 * k * s * np.pi / n) / np.sin(k * np.pi / n) ** 2))


def cosecant_sum_closed(n: int, s: int) -> float:
    return (n * n - 1) / 3.0 - 2.0 * s * (n - s)
