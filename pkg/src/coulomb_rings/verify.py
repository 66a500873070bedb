"""Self-check suite behind ``coulomb-rings verify``.

Every check returns a :class:`Check`; the suite passes only if all do.
Tolerances can be overridden by ``COULOMB_RINGS_TOL_<NAME>`` environment
variables or a config mapping, and the values in force are echoed in the
report header.
"""

from __future__ import annotations

import math
import os
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import spectral
from .annealer import AnnealParams, anneal
from .core_model import (
    GRAD_TOL,
    ZERO_MODE_TOL,
    ModelParams,
    energy,
    gradient,
    hessian_analytic,
    mode_counts,
    ring_closed_form,
    ring_configuration,
)
from .io import TABLE_FILES, TABLE_SHA256, data_dir, load_golden, table_hash
from .shell_model import format_occupations, shell_fill

DEFAULT_TOLERANCES = {
    "GRAD_TOL": GRAD_TOL,
    "ZERO_MODE_TOL": ZERO_MODE_TOL,
    "SUM_RULE_TOL": 1e-9,
    "EIG_TOL": 1e-8,
    "IDENTITY_TOL": 1e-9,
    "CLOSED_FORM_TOL": 1e-10,
    "ANNEAL_ENERGY_TOL": 1e-6,
}
ENV_PREFIX = "COULOMB_RINGS_TOL_"

HEXAGON_ENERGY = 15.0 - 15.0 * math.log(2.5) - 6.0 * math.log(6.0)
PENTAGON_CENTER_ENERGY = 15.0 - 15.0 * math.log(3.0) - 5.0 * math.log(5.0)


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str


def resolve_tolerances(overrides: dict | None = None, environ=None) -> tuple[dict, list[str]]:
    environ = os.environ if environ is None else environ
    tol = dict(DEFAULT_TOLERANCES)
    changed = []
    for key, val in (overrides or {}).items():
        key = key.upper()
        if key in tol:
            tol[key] = float(val)
            changed.append(f"{key} (config)")
    for key in tol:
        env = environ.get(ENV_PREFIX + key)
        if env:
            tol[key] = float(env)
            changed.append(f"{key} (env)")
    return tol, changed


def check_golden_hashes(directory=None) -> Check:
    directory = Path(directory) if directory is not None else data_dir()
    bad = [n for n in TABLE_FILES if table_hash(directory / n) != TABLE_SHA256[n]]
    return Check("golden_table_hashes", not bad, "drifted: " + ", ".join(bad) if bad else "pinned")


def check_shell_tables(directory=None) -> Check:
    golden = load_golden(directory)
    fails = []
    for m, row in sorted(golden.items()):
        got = shell_fill(m).occupations
        if got != row.nth:
            fails.append(f"M={m}: predicted {format_occupations(got)} vs table {format_occupations(row.nth)}")
    return Check("shell_tables", not fails, "; ".join(fails) or f"{len(golden)} rows match")


def check_ring_extremum(tol: dict) -> Check:
    worst = 0.0
    for q in (0.0, 1.0, 5.0, 20.5):
        for n in range(2, 101):
            c = ring_configuration(n, math.sqrt(spectral.equilibrium_radius(n, q)))
            worst = max(worst, float(np.linalg.norm(gradient(c, ModelParams(q)))))
    return Check("ring_extremum", worst < tol["GRAD_TOL"], f"max |grad| = {worst:.2e}")


def check_sum_rules(tol: dict) -> Check:
    worst = 0.0
    for n in range(2, 65):
        for s in range(1, n + 1):
            v = spectral.phase_sum(n, s)
            worst = max(worst, abs(v - spectral.phase_sum_closed(n, s)))
        for s in range(0, n + 1):
            worst = max(worst, abs(spectral.cosecant_sum(n, s) - spectral.cosecant_sum_closed(n, s)))
    return Check("sum_rules", worst < tol["SUM_RULE_TOL"], f"max error = {worst:.2e}")


def check_calogero(tol: dict) -> Check:
    eig_err = ident_err = trace_err = 0.0
    for n in range(2, 65):
        lm = spectral.matrix_L(n)
        bm = spectral.matrix_B(n)
        eig_err = max(eig_err, float(np.max(np.abs(np.linalg.eigvalsh(lm) - np.sort(spectral.L_eigenvalues(n))))))
        eig_err = max(eig_err, float(np.max(np.abs(np.linalg.eigvalsh(bm) - np.sort(spectral.B_eigenvalues(n))))))
        ident_err = max(ident_err, float(np.max(np.abs(spectral.B_from_L(n) - bm))))
        trace_err = max(trace_err, abs(np.trace(bm)), abs(np.trace(lm)))
    ok = eig_err < tol["EIG_TOL"] and ident_err < tol["IDENTITY_TOL"] and trace_err == 0.0
    return Check("calogero_spectra", ok,
                 f"eig err {eig_err:.2e}, identity err {ident_err:.2e}, trace {trace_err:.1e}")


def ring_hessian(n: int, q: float):
    c = ring_configuration(n, math.sqrt(spectral.equilibrium_radius(n, q)))
    h = hessian_analytic(c, ModelParams(q))
    return c, h


def check_stability_threshold(tol: dict) -> Check:
    notes = []
    ok = True
    for q in (0.0, 1.0, 2.0, 5.0, 10.0):
        nmax = spectral.nmax_interior(q)
        c, h = ring_hessian(nmax, q)
        full = mode_counts(h.eigenvalues, tol["ZERO_MODE_TOL"])
        stable = full[0] == 0 and full[1] == 1
        c2, h2 = ring_hessian(nmax + 2, q)
        unstable = mode_counts(h2.eigenvalues, tol["ZERO_MODE_TOL"])[0] > 0
        ok &= stable and unstable
        notes.append(f"Q={q:g}: N={nmax} {'stable' if stable else 'NOT stable'}, "
                     f"N={nmax + 2} {'unstable' if unstable else 'NOT unstable'}")
    return Check("stability_threshold", ok, "; ".join(notes))


def alternating_radial_mode(n: int = 8, q: float = 0.0) -> np.ndarray:
    """Radial components of the most negative Hessian mode of the ring."""
    c, h = ring_hessian(n, q)
    v = h.eigenvectors[:, 0].reshape(-1, 2)
    unit = c.positions / c.radii[:, None]
    return np.sum(v * unit, axis=1)


def check_mode_shape() -> Check:
    radial = alternating_radial_mode(8, 0.0)
    signs = np.sign(radial)
    ok = bool(np.all(signs != 0) and np.all(signs * np.roll(signs, 1) < 0))
    return Check("instability_mode_shape", ok, "signs " + "".join("+" if s > 0 else "-" for s in signs))


def check_hexagon_pentagon(tol: dict, run_anneal: bool = True) -> Check:
    hexa = energy(ring_configuration(6, math.sqrt(2.5))).total
    pent = energy(ring_configuration(5, math.sqrt(3.0), center=True)).total
    err = max(abs(hexa - HEXAGON_ENERGY), abs(pent - PENTAGON_CENTER_ENERGY),
              abs(ring_closed_form(6, math.sqrt(2.5)) - HEXAGON_ENERGY),
              abs(ring_closed_form(5, math.sqrt(3.0), 1.0) - PENTAGON_CENTER_ENERGY))
    ok = err < tol["CLOSED_FORM_TOL"] and pent < hexa
    detail = f"hexagon {hexa:.6f}, pentagon+center {pent:.6f}, closed-form err {err:.1e}"
    if run_anneal:
        res = anneal(AnnealParams(m=6, seed=42))
        de = abs(res.best_energy - PENTAGON_CENTER_ENERGY)
        ok &= res.signature.occupations == (5, 1) and de < tol["ANNEAL_ENERGY_TOL"]
        detail += f"; annealed {res.signature} at {res.best_energy:.8f}"
    return Check("hexagon_vs_pentagon", ok, detail)


def run_all(directory=None, run_anneal: bool = True, overrides: dict | None = None) -> dict:
    tol, changed = resolve_tolerances(overrides)
    checks = [
        check_golden_hashes(directory),
        check_shell_tables(directory),
        check_ring_extremum(tol),
        check_sum_rules(tol),
        check_calogero(tol),
        check_stability_threshold(tol),
        check_mode_shape(),
        check_hexagon_pentagon(tol, run_anneal=run_anneal),
    ]
    return {
        "header": {"tolerances": tol, "overridden": changed},
        "checks": [asdict(c) for c in checks],
        "passed": all(c.passed for c in checks),
    }
