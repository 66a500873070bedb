"""Energy functional of like charges in a quadratic well with log repulsion.

Positions are stored as an ``(N, 2)`` float array of Cartesian pairs. The
energy is

    V_Q = sum_i |z_i|^2 - sum_{i<j} ln|z_i - z_j|^2 - Q sum_i ln|z_i|^2

where the last term is an optional point charge ``Q`` at the origin standing
in for an azimuthally symmetric enclosed distribution. All evaluations are
vectorised numpy with a fixed reduction order, so results are deterministic
for a given input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import CoincidentParticles, NonPositiveRadius, OriginSingularity

GRAD_TOL = 1e-10
HESS_FD_TOL = 1e-5
ZERO_MODE_TOL = 1e-8


@dataclass(frozen=True)
class Configuration:
    """N planar particle positions, immutable."""

    positions: np.ndarray

    def __post_init__(self) -> None:
        pos = np.array(self.positions, dtype=np.float64, copy=True)
        if pos.ndim == 1 and pos.size == 2:
            pos = pos.reshape(1, 2)
        if pos.ndim != 2 or pos.shape[1] != 2 or pos.shape[0] < 1:
            raise ValueError(f"positions must have shape (N, 2) with N >= 1, got {pos.shape}")
        if not np.all(np.isfinite(pos)):
            raise ValueError("positions must be finite")
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)

    @property
    def n(self) -> int:
        return self.positions.shape[0]

    @property
    def flat(self) -> np.ndarray:
        """Coordinates as ``(x_1, y_1, ..., x_N, y_N)``."""
        return self.positions.reshape(-1).copy()

    @property
    def radii(self) -> np.ndarray:
        return np.hypot(self.positions[:, 0], self.positions[:, 1])

    @classmethod
    def from_flat(cls, x: np.ndarray) -> "Configuration":
        return cls(np.asarray(x, dtype=np.float64).reshape(-1, 2))

    @classmethod
    def from_complex(cls, z) -> "Configuration":
        z = np.atleast_1d(np.asarray(z, dtype=np.complex128))
        return cls(np.column_stack([z.real, z.imag]))

    def rotated(self, theta: float) -> "Configuration":
        c, s = math.cos(theta), math.sin(theta)
        rot = np.array([[c, -s], [s, c]])
        return Configuration(self.positions @ rot.T)

    def permuted(self, order) -> "Configuration":
        return Configuration(self.positions[np.asarray(order)])


@dataclass(frozen=True)
class ModelParams:
    """Interior charge ``q`` reduced to a point charge at the origin."""

    q: float = 0.0
    interior_model: str = "point_at_origin"

    def __post_init__(self) -> None:
        if not (self.q >= 0.0 and math.isfinite(self.q)):
            raise ValueError(f"interior charge must be finite and >= 0, got {self.q}")
        if self.interior_model != "point_at_origin":
            raise ValueError(f"unsupported interior model {self.interior_model!r}")


@dataclass(frozen=True)
class EnergyReport:
    total: float
    confinement: float
    pair: float
    interior: float


@dataclass
class HessianMatrix:
    """Symmetric ``2N x 2N`` Cartesian Hessian with lazily cached eigensystem."""

    entries: np.ndarray
    _eig: tuple[np.ndarray, np.ndarray] | None = field(default=None, repr=False)

    def _eigh(self) -> tuple[np.ndarray, np.ndarray]:
        if self._eig is None:
            self._eig = np.linalg.eigh(self.entries)
        return self._eig

    @property
    def eigenvalues(self) -> np.ndarray:
        """Ascending eigenvalues."""
        return self._eigh()[0]

    @property
    def eigenvectors(self) -> np.ndarray:
        """Columns are eigenvectors matching :attr:`eigenvalues`."""
        return self._eigh()[1]

    @cached_property
    def asymmetry(self) -> float:
        scale = max(float(np.max(np.abs(self.entries))), 1.0)
        return float(np.max(np.abs(self.entries - self.entries.T))) / scale


def rotation_generator(c: Configuration) -> np.ndarray:
    """Unit vector ``(-y_1, x_1, ..., -y_N, x_N)`` of an infinitesimal rotation."""
    g = np.column_stack([-c.positions[:, 1], c.positions[:, 0]]).reshape(-1)
    norm = np.linalg.norm(g)
    if norm == 0.0:
        raise ValueError("all particles at the origin; rotation generator vanishes")
    return g / norm


def nonrotational_eigenvalues(h: HessianMatrix, c: Configuration) -> np.ndarray:
    """Spectrum of ``h`` restricted to the complement of the rotation direction.

    At a critical point of a rotation-invariant energy the rotation generator
    is an exact null vector, so this is the full spectrum with that one zero
    mode removed.
    """
    g = rotation_generator(c)
    dim = g.size
    basis, _ = np.linalg.qr(np.column_stack([g, np.eye(dim)]))
    comp = basis[:, 1:dim]
    return np.linalg.eigvalsh(comp.T @ h.entries @ comp)


def mode_counts(eigs: np.ndarray, tol: float = ZERO_MODE_TOL) -> tuple[int, int, int]:
    """(negative, zero, positive) counts with ``|lambda| < tol`` counted as zero."""
    eigs = np.asarray(eigs)
    neg = int(np.sum(eigs <= -tol))
    pos = int(np.sum(eigs >= tol))
    return neg, eigs.size - neg - pos, pos


def _pair_geometry(pos: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    d = pos[:, None, :] - pos[None, :, :]
    r2 = d[..., 0] ** 2 + d[..., 1] ** 2
    return d, r2


def _check(c: Configuration, p: ModelParams) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    pos = c.positions
    d, r2 = _pair_geometry(pos)
    n = c.n
    if n > 1:
        off = r2[~np.eye(n, dtype=bool)]
        if np.any(off == 0.0):
            i, j = np.argwhere((r2 == 0.0) & ~np.eye(n, dtype=bool))[0]
            raise CoincidentParticles(f"particles {i} and {j} coincide at {tuple(pos[i])}")
    rad2 = pos[:, 0] ** 2 + pos[:, 1] ** 2
    if p.q > 0.0 and np.any(rad2 == 0.0):
        raise OriginSingularity(
            f"particle {int(np.argmin(rad2))} sits on the interior charge at the origin"
        )
    return d, r2, rad2


def energy(c: Configuration, p: ModelParams | None = None) -> EnergyReport:
    p = p or ModelParams()
    _, r2, rad2 = _check(c, p)
    confinement = float(np.sum(rad2))
    iu = np.triu_indices(c.n, k=1)
    pair = -float(np.sum(np.log(r2[iu]))) if c.n > 1 else 0.0
    interior = -p.q * float(np.sum(np.log(rad2))) if p.q > 0.0 else 0.0
    return EnergyReport(confinement + pair + interior, confinement, pair, interior)


def total_energy(c: Configuration, p: ModelParams | None = None) -> float:
    return energy(c, p).total


def gradient(c: Configuration, p: ModelParams | None = None) -> np.ndarray:
    """Exact gradient, flattened as ``(dV/dx_1, dV/dy_1, ...)``."""
    p = p or ModelParams()
    d, r2, rad2 = _check(c, p)
    pos = c.positions
    grad = 2.0 * pos
    if c.n > 1:
        inv = np.zeros_like(r2)
        mask = ~np.eye(c.n, dtype=bool)
        inv[mask] = 1.0 / r2[mask]
        grad = grad - 2.0 * np.einsum("ij,ijk->ik", inv, d)
    if p.q > 0.0:
        grad = grad - 2.0 * p.q * pos / rad2[:, None]
    return grad.reshape(-1)


def hessian_analytic(c: Configuration, p: ModelParams | None = None) -> HessianMatrix:
    p = p or ModelParams()
    d, r2, rad2 = _check(c, p)
    n = c.n
    eye2 = np.eye(2)
    blocks = np.zeros((n, n, 2, 2))
    if n > 1:
        mask = ~np.eye(n, dtype=bool)
        s = np.where(mask, r2, 1.0)
        outer = d[..., :, None] * d[..., None, :]
        # second derivative of -ln|d|^2 with respect to z_i, z_i
        b = (4.0 * outer - 2.0 * s[..., None, None] * eye2) / (s**2)[..., None, None]
        b[~mask] = 0.0
        blocks = -b
        diag = b.sum(axis=1)
    else:
        diag = np.zeros((1, 2, 2))
    diag = diag + 2.0 * eye2
    if p.q > 0.0:
        zz = c.positions[:, :, None] * c.positions[:, None, :]
        diag = diag - p.q * (
            2.0 * eye2 / rad2[:, None, None] - 4.0 * zz / (rad2**2)[:, None, None]
        )
    idx = np.arange(n)
    blocks[idx, idx] = diag
    h = blocks.transpose(0, 2, 1, 3).reshape(2 * n, 2 * n)
    return HessianMatrix(0.5 * (h + h.T))


def hessian_fd(c: Configuration, p: ModelParams | None = None, step: float = 1e-4) -> HessianMatrix:
    """Symmetrised central-difference Hessian built from energy evaluations only."""
    if not (1e-7 <= step <= 1e-3):
        raise ValueError(f"step must lie in [1e-7, 1e-3], got {step}")
    p = p or ModelParams()
    x0 = c.flat
    dim = x0.size

    def f(x: np.ndarray) -> float:
        return energy(Configuration.from_flat(x), p).total

    h = np.zeros((dim, dim))
    for a in range(dim):
        for b in range(a, dim):
            e_a = np.zeros(dim)
            e_a[a] = step
            e_b = np.zeros(dim)
            e_b[b] = step
            val = (
                f(x0 + e_a + e_b) - f(x0 + e_a - e_b) - f(x0 - e_a + e_b) + f(x0 - e_a - e_b)
            ) / (4.0 * step * step)
            h[a, b] = h[b, a] = val
    return HessianMatrix(h)


def energy_difference(c: Configuration, delta: np.ndarray, p: ModelParams | None = None) -> float:
    """``V(c + delta) - V(c)`` evaluated without cancellation.

    Each term is written as a change relative to the current geometry and the
    logarithms go through ``log1p``, so the result keeps full relative
    precision even when the difference is far below the round-off of the
    total energy.
    """
    p = p or ModelParams()
    pos = c.positions
    dlt = np.asarray(delta, dtype=np.float64).reshape(-1, 2)
    new = pos + dlt
    conf = float(np.sum(2.0 * np.sum(pos * dlt, axis=1) + np.sum(dlt * dlt, axis=1)))
    pair = 0.0
    if c.n > 1:
        d, r2 = _pair_geometry(pos)
        dd = dlt[:, None, :] - dlt[None, :, :]
        iu = np.triu_indices(c.n, k=1)
        rel = (2.0 * np.sum(d * dd, axis=-1) + np.sum(dd * dd, axis=-1))[iu] / r2[iu]
        if np.any(rel <= -1.0):
            raise CoincidentParticles("step makes two particles coincide")
        pair = -float(np.sum(np.log1p(rel)))
    interior = 0.0
    if p.q > 0.0:
        rad2 = np.sum(pos * pos, axis=1)
        rel = (2.0 * np.sum(pos * dlt, axis=1) + np.sum(dlt * dlt, axis=1)) / rad2
        if np.any(np.sum(new * new, axis=1) == 0.0):
            raise OriginSingularity("step moves a particle onto the origin")
        interior = -p.q * float(np.sum(np.log1p(rel)))
    return conf + pair + interior


def ring_configuration(n: int, radius: float, phase: float = 0.0, center: bool = False) -> Configuration:
    """``n`` particles at ``radius * exp(2 pi i k / n)``, optionally plus one at the origin."""
    if radius <= 0.0:
        raise NonPositiveRadius(f"ring radius must be positive, got {radius}")
    t = phase + 2.0 * np.pi * np.arange(1, n + 1) / n
    pts = radius * np.column_stack([np.cos(t), np.sin(t)])
    if center:
        pts = np.vstack([pts, [0.0, 0.0]])
    return Configuration(pts)


def ring_closed_form(n: int, radius: float, q: float = 0.0) -> float:
    """Energy of the regular ``n``-gon of the given radius around charge ``q``.

    Uses ``prod_{i<j} |w^i - w^j| = n^(n/2)`` for the ``n``-th roots of unity.
    """
    if radius <= 0.0:
        raise NonPositiveRadius(f"ring radius must be positive, got {radius}")
    if n < 1 or q < 0.0:
        raise ValueError("need n >= 1 and q >= 0")
    log_r = math.log(radius)
    return n * radius**2 - n * (n - 1) * log_r - n * math.log(n) - 2.0 * q * n * log_r
