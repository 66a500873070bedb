"""Multi-start simulated annealing with deterministic seeding and local polish.

Each restart draws all of its random numbers up front from its own Philox
stream keyed by ``seed ^ restart_index``, runs a Metropolis sweep schedule
with geometric cooling in a compiled kernel, then descends to a critical
point with Armijo-backtracked gradient descent. The lowest polished energy
wins, ties going to the lowest restart index.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numba
import numpy as np

from .core_model import (
    Configuration,
    ModelParams,
    energy,
    gradient,
)
from .errors import NonConvergence, TooFewParticles

log = logging.getLogger(__name__)

POLISH_TOL = 1e-8
POLISH_MAX_ITER = 100_000
ARMIJO_C = 1e-4
GAP_FRAC = 0.3
CENTER_EPS = 0.05
BULK_FRACTION = 0.7
THREADS_ENV = "COULOMB_RINGS_THREADS"


@dataclass(frozen=True)
class AnnealParams:
    m: int
    q: float = 0.0
    t0: float = 1.0
    alpha: float = 0.95
    sweeps: int = 2000
    moves_per_sweep: int | None = None  # defaults to m
    step_scale: float = 0.5
    restarts: int = 16
    seed: int = 0

    def __post_init__(self) -> None:
        if self.m < 1 or self.sweeps < 1 or self.restarts < 1:
            raise ValueError("m, sweeps and restarts must be positive")
        if self.moves_per_sweep is not None and self.moves_per_sweep < 1:
            raise ValueError("moves_per_sweep must be positive")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if self.t0 <= 0.0 or self.step_scale <= 0.0 or self.q < 0.0:
            raise ValueError("t0 and step_scale must be positive, q non-negative")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    @property
    def moves(self) -> int:
        return self.moves_per_sweep if self.moves_per_sweep is not None else self.m

    def to_dict(self) -> dict:
        d = asdict(self)
        d["moves_per_sweep"] = self.moves
        return d


@dataclass(frozen=True)
class RingSignature:
    occupations: tuple[int, ...]
    ring_radii: tuple[float, ...]
    assignment: tuple[int, ...]

    def __str__(self) -> str:
        return "/".join(str(k) for k in self.occupations)


@dataclass(frozen=True)
class RestartRecord:
    index: int
    key: int
    energy: float
    grad_norm: float
    converged: bool
    acceptance: float


@dataclass(frozen=True)
class AnnealResult:
    params: AnnealParams
    best: Configuration
    best_energy: float
    signature: RingSignature
    density_bulk: float | None
    grad_norm_after_polish: float
    converged: bool
    best_restart: int
    restarts: tuple[RestartRecord, ...] = field(default=())


@dataclass(frozen=True)
class PolishOutcome:
    config: Configuration
    grad_norm: float
    iterations: int
    converged: bool
    drops: tuple[float, ...]


# ---------------------------------------------------------------------------
# polish
# ---------------------------------------------------------------------------


@numba.njit(cache=True, nogil=True)
def _gradient_kernel(pos, q, out):
    n = pos.shape[0]
    for i in range(n):
        gx = 2.0 * pos[i, 0]
        gy = 2.0 * pos[i, 1]
        for j in range(n):
            if j != i:
                dx = pos[i, 0] - pos[j, 0]
                dy = pos[i, 1] - pos[j, 1]
                w = 2.0 / (dx * dx + dy * dy)
                gx -= w * dx
                gy -= w * dy
        if q > 0.0:
            w = 2.0 * q / (pos[i, 0] ** 2 + pos[i, 1] ** 2)
            gx -= w * pos[i, 0]
            gy -= w * pos[i, 1]
        out[i, 0] = gx
        out[i, 1] = gy


@numba.njit(cache=True, nogil=True)
def _difference_kernel(pos, dlt, q):
    # same cancellation-free form as core_model.energy_difference
    n = pos.shape[0]
    de = 0.0
    for i in range(n):
        a = 2.0 * (pos[i, 0] * dlt[i, 0] + pos[i, 1] * dlt[i, 1]) + dlt[i, 0] ** 2 + dlt[i, 1] ** 2
        de += a
        if q > 0.0:
            rel = a / (pos[i, 0] ** 2 + pos[i, 1] ** 2)
            if rel <= -1.0:
                return math.inf
            de -= q * math.log1p(rel)
    for i in range(n):
        for j in range(i + 1, n):
            dx = pos[i, 0] - pos[j, 0]
            dy = pos[i, 1] - pos[j, 1]
            ex = dlt[i, 0] - dlt[j, 0]
            ey = dlt[i, 1] - dlt[j, 1]
            rel = (2.0 * (dx * ex + dy * ey) + ex * ex + ey * ey) / (dx * dx + dy * dy)
            if rel <= -1.0:
                return math.inf
            de -= math.log1p(rel)
    return de


@numba.njit(cache=True, nogil=True)
def _descend_kernel(pos, q, tol, max_iter, c1, drops):
    n = pos.shape[0]
    g = np.empty((n, 2))
    g_new = np.empty((n, 2))
    trial = np.empty((n, 2))
    _gradient_kernel(pos, q, g)
    gnorm = math.sqrt(np.sum(g * g))
    step = 1e-2 / max(gnorm, 1.0)
    it = 0
    while gnorm >= tol and it < max_iter:
        t = step
        g2 = gnorm * gnorm
        while True:
            for i in range(n):
                trial[i, 0] = -t * g[i, 0]
                trial[i, 1] = -t * g[i, 1]
            de = _difference_kernel(pos, trial, q)
            if de <= -c1 * t * g2:
                break
            t *= 0.5
            if t < 1e-300:
                return it, gnorm, False
        for i in range(n):
            pos[i, 0] += trial[i, 0]
            pos[i, 1] += trial[i, 1]
        _gradient_kernel(pos, q, g_new)
        ss = 0.0
        sy = 0.0
        for i in range(n):
            for k in range(2):
                ss += trial[i, k] * trial[i, k]
                sy += trial[i, k] * (g_new[i, k] - g[i, k])
        # Barzilai-Borwein length as the next trial step
        step = ss / sy if sy > 0.0 else 2.0 * t
        step = min(max(step, 1e-12), 1e3)
        if it < drops.shape[0]:
            drops[it] = de
        it += 1
        g[:, :] = g_new
        gnorm = math.sqrt(np.sum(g * g))
    return it, gnorm, gnorm < tol


def descend(
    c: Configuration,
    p: ModelParams | None = None,
    tol: float = POLISH_TOL,
    max_iter: int = POLISH_MAX_ITER,
    record: bool = False,
) -> PolishOutcome:
    """Gradient descent with Armijo backtracking.

    The trial step is the Barzilai-Borwein length from the previous
    iteration; it is halved until the sufficient-decrease test passes, so
    every accepted step lowers the energy. Energy changes are evaluated in
    a cancellation-free form (see :func:`energy_difference`) that stays
    accurate near the minimum, where differencing two totals would drown in
    round-off.
    """
    p = p or ModelParams()
    pos = np.array(c.positions, dtype=np.float64)
    drops = np.zeros(max_iter if record else 0)
    it, gnorm, ok = _descend_kernel(pos, float(p.q), float(tol), int(max_iter), ARMIJO_C, drops)
    out = Configuration(pos)
    # report the gradient as recomputed by the reference implementation
    gnorm = float(np.linalg.norm(gradient(out, p)))
    return PolishOutcome(out, gnorm, int(it), bool(ok) and gnorm < tol, tuple(drops[:it]))


def polish(c: Configuration, p: ModelParams | None = None, tol: float = POLISH_TOL,
           max_iter: int = POLISH_MAX_ITER) -> Configuration:
    out = descend(c, p, tol=tol, max_iter=max_iter)
    if not out.converged:
        err = NonConvergence(
            f"gradient norm {out.grad_norm:.3e} after {out.iterations} iterations (tol {tol:.1e})"
        )
        err.outcome = out
        raise err
    return out.config


# ---------------------------------------------------------------------------
# Metropolis kernel
# ---------------------------------------------------------------------------


@numba.njit(cache=True, nogil=True)
def _site_energy(pos, i, x, y, q, pair_on):
    e = x * x + y * y
    if q > 0.0:
        e -= q * math.log(x * x + y * y)
    if pair_on:
        for j in range(pos.shape[0]):
            if j != i:
                dx = x - pos[j, 0]
                dy = y - pos[j, 1]
                e -= math.log(dx * dx + dy * dy)
    return e


@numba.njit(cache=True, nogil=True)
def _metropolis(pos, q, temps, sigmas, idx, noise, unif, pair_on):
    """Run the sweep schedule in place on ``pos``; returns the acceptance ratio."""
    moves = idx.shape[1]
    accepted = 0
    for k in range(temps.shape[0]):
        t = temps[k]
        sig = sigmas[k]
        for m in range(moves):
            i = idx[k, m]
            ox = pos[i, 0]
            oy = pos[i, 1]
            nx = ox + sig * noise[k, m, 0]
            ny = oy + sig * noise[k, m, 1]
            de = _site_energy(pos, i, nx, ny, q, pair_on) - _site_energy(pos, i, ox, oy, q, pair_on)
            if not math.isfinite(de):
                continue
            if de <= 0.0 or unif[k, m] < math.exp(-de / t):
                pos[i, 0] = nx
                pos[i, 1] = ny
                accepted += 1
    return accepted / (temps.shape[0] * moves)


def restart_key(seed: int, index: int) -> int:
    return int(seed) ^ int(index)


def restart_stream(seed: int, index: int) -> np.random.Generator:
    """Philox-4x64 stream for one restart; identical on every platform."""
    return np.random.Generator(np.random.Philox(key=restart_key(seed, index)))


def initial_positions(rng: np.random.Generator, m: int) -> np.ndarray:
    """Uniform sample of the disc of radius ``sqrt(m)``."""
    u = rng.random((m, 2))
    r = math.sqrt(m) * np.sqrt(u[:, 0])
    th = 2.0 * math.pi * u[:, 1]
    return np.column_stack([r * np.cos(th), r * np.sin(th)])


def schedule(p: AnnealParams) -> tuple[np.ndarray, np.ndarray]:
    temps = p.t0 * p.alpha ** np.arange(p.sweeps, dtype=np.float64)
    sigmas = p.step_scale * np.sqrt(temps / p.t0)
    return temps, sigmas


def metropolis_run(p: AnnealParams, index: int, pair_on: bool = True,
                   temps: np.ndarray | None = None) -> tuple[np.ndarray, float]:
    """One annealing restart; returns final positions and acceptance ratio."""
    rng = restart_stream(p.seed, index)
    pos = initial_positions(rng, p.m)
    if temps is None:
        temps, sigmas = schedule(p)
    else:
        temps = np.asarray(temps, dtype=np.float64)
        sigmas = p.step_scale * np.sqrt(temps / p.t0)
    n = temps.shape[0]
    idx = rng.integers(0, p.m, size=(n, p.moves), dtype=np.int64)
    noise = rng.standard_normal((n, p.moves, 2))
    unif = rng.random((n, p.moves))
    acc = _metropolis(pos, float(p.q), temps, sigmas, idx, noise, unif, pair_on)
    return pos, float(acc)


# ---------------------------------------------------------------------------
# structure diagnostics
# ---------------------------------------------------------------------------


def nearest_neighbor_distances(c: Configuration) -> np.ndarray:
    d = c.positions[:, None, :] - c.positions[None, :, :]
    r = np.hypot(d[..., 0], d[..., 1])
    np.fill_diagonal(r, np.inf)
    return r.min(axis=1)


def detect_rings(c: Configuration, gap_frac: float = GAP_FRAC,
                 center_eps: float = CENTER_EPS) -> RingSignature:
    """Group particles into concentric rings by gaps in the sorted radii.

    A new ring starts wherever consecutive radii (sorted descending) differ
    by more than ``gap_frac`` times the median nearest-neighbour spacing.
    Particles within ``center_eps * sqrt(N)`` of the origin always form a
    single innermost group.
    """
    n = c.n
    radii = c.radii
    if n == 1:
        return RingSignature((1,), (float(radii[0]),), (0,))
    order = np.argsort(-radii, kind="stable")
    r_sorted = radii[order]
    spacing = float(np.median(nearest_neighbor_distances(c)))
    center = r_sorted < center_eps * math.sqrt(n)
    ring_of = np.zeros(n, dtype=np.int64)
    ring = 0
    for k in range(1, n):
        if center[k]:
            if not center[k - 1]:
                ring += 1
        elif r_sorted[k - 1] - r_sorted[k] > gap_frac * spacing:
            ring += 1
        ring_of[k] = ring
    ring_of = _merge_strays(ring_of, r_sorted)
    occ = np.bincount(ring_of)
    means = np.array([r_sorted[ring_of == g].mean() for g in range(occ.size)])
    assignment = np.empty(n, dtype=np.int64)
    assignment[order] = ring_of
    return RingSignature(
        tuple(int(k) for k in occ),
        tuple(float(r) for r in means),
        tuple(int(a) for a in assignment),
    )


def _merge_strays(ring_of: np.ndarray, r_sorted: np.ndarray) -> np.ndarray:
    """Fold single-particle groups other than the innermost into a neighbour.

    A lone particle sitting between two distorted rings is not a ring of its
    own; it joins whichever adjacent group has the radially closer member.
    """
    ring_of = ring_of.copy()
    while True:
        occ = np.bincount(ring_of)
        last = occ.size - 1
        lone = [g for g in range(last) if occ[g] == 1]
        if not lone:
            return ring_of
        g = lone[0]
        k = int(np.flatnonzero(ring_of == g)[0])
        gap_out = r_sorted[k - 1] - r_sorted[k] if g > 0 else math.inf
        gap_in = r_sorted[k] - r_sorted[k + 1]
        target = g - 1 if gap_out <= gap_in else g + 1
        ring_of[k] = target
        # relabel to keep group indices contiguous
        _, ring_of = np.unique(ring_of, return_inverse=True)


def bulk_density(c: Configuration, fraction: float = BULK_FRACTION) -> float:
    """Particles per unit area inside ``fraction`` of the outermost radius."""
    if c.n < 10:
        raise TooFewParticles(f"bulk density needs at least 10 particles, got {c.n}")
    radii = c.radii
    cut = fraction * float(radii.max())
    return float(np.sum(radii <= cut)) / (math.pi * cut * cut)


# ---------------------------------------------------------------------------
# driver
# ---------------------------------------------------------------------------


def thread_count(restarts: int) -> int:
    env = os.environ.get(THREADS_ENV)
    cap = int(env) if env else (os.cpu_count() or 1)
    return max(1, min(cap, restarts))


def _one_restart(p: AnnealParams, mp: ModelParams, index: int):
    pos, acc = metropolis_run(p, index)
    start = Configuration(pos)
    out = descend(start, mp)
    e = energy(out.config, mp).total
    rec = RestartRecord(index, restart_key(p.seed, index), e, out.grad_norm, out.converged, acc)
    return rec, out


def anneal(p: AnnealParams, threads: int | None = None, gap_frac: float = GAP_FRAC,
           center_eps: float = CENTER_EPS) -> AnnealResult:
    mp = ModelParams(q=p.q)
    workers = threads if threads is not None else thread_count(p.restarts)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(lambda i: _one_restart(p, mp, i), range(p.restarts)))
    else:
        runs = [_one_restart(p, mp, i) for i in range(p.restarts)]

    best_i = min(range(len(runs)), key=lambda i: (runs[i][0].energy, i))
    rec, out = runs[best_i]
    if not out.converged:
        log.warning("best restart %d did not converge: |g| = %.3e", best_i, out.grad_norm)
    best = out.config
    sig = detect_rings(best, gap_frac=gap_frac, center_eps=center_eps)
    dens = bulk_density(best) if best.n >= 10 else None
    return AnnealResult(
        params=p,
        best=best,
        best_energy=energy(best, mp).total,
        signature=sig,
        density_bulk=dens,
        grad_norm_after_polish=out.grad_norm,
        converged=out.converged,
        best_restart=best_i,
        restarts=tuple(r for r, _ in runs),
    )
