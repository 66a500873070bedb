"""Exit criteria, one test each; a PASS/FAIL line per criterion is printed in the summary."""

import math
import subprocess
import sys
import time

import numpy as np
import pytest

from coulomb_rings import spectral
from coulomb_rings.annealer import AnnealParams, anneal
from coulomb_rings.core_model import (
    ModelParams,
    energy,
    gradient,
    hessian_analytic,
    mode_counts,
    ring_closed_form,
    ring_configuration,
)
from coulomb_rings.io import load_golden
from coulomb_rings.report import ring_deltas
from coulomb_rings.shell_model import shell_fill

HEXAGON = 15 - 15 * math.log(5 / 2) - 6 * math.log(6)
PENTAGON_CENTER = 15 - 15 * math.log(3) - 5 * math.log(5)


def record(log, num, title, ok, detail):
    log.append(f"[{'PASS' if ok else 'FAIL'}] criterion {num:2d} {title}: {detail}")
    assert ok, detail


def ring_hessian(n, q):
    c = ring_configuration(n, math.sqrt(spectral.equilibrium_radius(n, q)))
    return c, hessian_analytic(c, ModelParams(q))


def test_01_ring_extremum(acceptance_log):
    t = time.perf_counter()
    worst = 0.0
    for q in (0.0, 1.0, 5.0, 20.5):
        for n in range(2, 101):
            c = ring_configuration(n, math.sqrt(spectral.equilibrium_radius(n, q)))
            worst = max(worst, float(np.linalg.norm(gradient(c, ModelParams(q)))))
    dt = time.perf_counter() - t
    record(acceptance_log, 1, "ring extremum", worst < 1e-10 and dt < 5,
           f"max |grad| {worst:.2e} < 1e-10 in {dt:.2f}s")


def test_02_sum_rules(acceptance_log):
    t = time.perf_counter()
    worst = 0.0
    for n in range(2, 65):
        for s in range(1, n + 1):
            worst = max(worst, abs(spectral.phase_sum(n, s) - spectral.phase_sum_closed(n, s)))
        for s in range(0, n + 1):
            worst = max(worst, abs(spectral.cosecant_sum(n, s) - spectral.cosecant_sum_closed(n, s)))
    dt = time.perf_counter() - t
    record(acceptance_log, 2, "sum rules", worst < 1e-9 and dt < 5, f"max error {worst:.2e} < 1e-9 in {dt:.2f}s")


def test_03_calogero_spectra(acceptance_log):
    t = time.perf_counter()
    eig = ident = 0.0
    traces = True
    for n in range(2, 65):
        lm, bm = spectral.matrix_L(n), spectral.matrix_B(n)
        s = np.arange(1, n + 1)
        eig = max(eig, float(np.max(np.abs(np.linalg.eigvalsh(lm) - np.sort(2 * s - n - 1)))))
        eig = max(eig, float(np.max(np.abs(np.linalg.eigvalsh(bm) - np.sort((n * n - 1) / 3 - 2 * s * (n - s))))))
        ident = max(ident, float(np.max(np.abs(0.5 * (lm @ lm + 2 * lm - (n * n - 1) / 3 * np.eye(n)) - bm))))
        traces &= np.trace(bm) == 0 and np.trace(lm) == 0
    dt = time.perf_counter() - t
    ok = eig < 1e-8 and ident < 1e-9 and traces and dt < 30
    record(acceptance_log, 3, "Calogero spectra", ok,
           f"eig err {eig:.2e} < 1e-8, identity err {ident:.2e}, trace(B)=trace(L)=0, {dt:.2f}s")


def test_04_stability_threshold(acceptance_log):
    t = time.perf_counter()
    notes, ok = [], True
    for q in (0.0, 1.0, 2.0, 5.0, 10.0):
        n = spectral.nmax_interior(q)
        _, h = ring_hessian(n, q)
        neg, zero, _ = mode_counts(h.eigenvalues, 1e-8)
        _, h2 = ring_hessian(n + 2, q)
        neg2 = mode_counts(h2.eigenvalues, 1e-8)[0]
        ok &= neg == 0 and zero == 1 and neg2 > 0
        notes.append(f"Q={q:g}:{n}s/{n + 2}u" if neg == 0 and zero == 1 and neg2 > 0 else f"Q={q:g}:fail")
    dt = time.perf_counter() - t
    record(acceptance_log, 4, "stability threshold", ok and dt < 60, " ".join(notes) + f" in {dt:.2f}s")


def test_05_instability_mode_shape(acceptance_log):
    c, h = ring_hessian(8, 0.0)
    v = h.eigenvectors[:, 0].reshape(-1, 2)
    radial = np.sum(v * c.positions / c.radii[:, None], axis=1)
    signs = np.sign(radial)
    ok = bool(np.all(signs != 0) and np.all(signs * np.roll(signs, 1) < 0))
    record(acceptance_log, 5, "instability mode shape", ok,
           "radial signs " + "".join("+" if x > 0 else "-" for x in signs))


def test_06_shell_golden_tables(acceptance_log):
    t = time.perf_counter()
    golden = load_golden()
    first = [2, 3, 4, 5, 6, 7, 8, 9, 10, 15, 25, 100]
    sweep = list(range(40, 61))
    assert sorted(golden) == sorted(first + sweep)
    bad = [m for m in first + sweep if shell_fill(m).occupations != golden[m].nth]
    dt = time.perf_counter() - t
    record(acceptance_log, 6, "shell golden tables", not bad and dt < 1,
           f"{len(first)}+{len(sweep)} rows exact, mismatches {bad} in {dt:.3f}s")


def test_07_hexagon_vs_pentagon(acceptance_log):
    t = time.perf_counter()
    e_hex = energy(ring_configuration(6, math.sqrt(2.5))).total
    e_pent = energy(ring_configuration(5, math.sqrt(3.0), center=True)).total
    closed = max(abs(e_hex - HEXAGON), abs(e_pent - PENTAGON_CENTER),
                 abs(ring_closed_form(6, math.sqrt(2.5)) - e_hex),
                 abs(ring_closed_form(5, math.sqrt(3.0), 1.0) - e_pent))
    res = anneal(AnnealParams(m=6, seed=42, restarts=16))
    dt = time.perf_counter() - t
    de = abs(res.best_energy - PENTAGON_CENTER)
    ok = closed < 1e-10 and res.signature.occupations == (5, 1) and de < 1e-6 and e_pent < e_hex and dt < 30
    record(acceptance_log, 7, "hexagon vs pentagon", ok,
           f"hex {e_hex:.6f} > pent {e_pent:.6f}, closed-form err {closed:.1e}, "
           f"annealed {res.signature} |dE| {de:.1e} in {dt:.2f}s")


def test_08_small_m_exactness(acceptance_log):
    notes, ok = [], True
    for m in (2, 3, 4, 5):
        res = anneal(AnnealParams(m=m, seed=42))
        r2 = spectral.equilibrium_radius(m, 0.0)
        de = abs(res.best_energy - ring_closed_form(m, math.sqrt(r2)))
        dr = float(np.max(np.abs(res.best.radii ** 2 - r2)))
        good = res.signature.occupations == (m,) and de < 1e-8 and dr < 1e-7
        ok &= good
        notes.append(f"M={m} {res.signature} dE={de:.0e}")
    record(acceptance_log, 8, "small-M exactness", ok, ", ".join(notes))


def _within(observed, published, per_ring):
    d = ring_deltas(observed, published)
    return max(abs(x) for x in d[:min(len(observed), len(published))]) <= per_ring and abs(len(observed) - len(published)) <= 1


@pytest.mark.slow
def test_09_desk_scale_reproduction(acceptance_log):
    golden = load_golden()
    notes, ok = [], True
    for m in (10, 15, 25):
        sig = anneal(AnnealParams(m=m, seed=42)).signature.occupations
        good = _within(sig, golden[m].nexp, 2)
        ok &= good
        notes.append(f"M={m} {'/'.join(map(str, sig))} vs {'/'.join(map(str, golden[m].nexp))}")
    t = time.perf_counter()
    res = anneal(AnnealParams(m=100, seed=42))
    dt = time.perf_counter() - t
    outer = res.signature.occupations[0]
    rho = res.density_bulk
    rmax = float(res.best.radii.max())
    good100 = (abs(outer - 31) <= 3 and abs(rho - 1 / math.pi) <= 0.15 / math.pi
               and abs(rmax - 10) <= 1.0 and dt <= 600)
    ok &= good100
    notes.append(f"M=100 {res.signature} outer {outer} (31+-3), density {rho:.4f} "
                 f"(1/pi+-15%), r_max {rmax:.2f} (10+-10%), {dt:.1f}s")
    record(acceptance_log, 9, "desk-scale reproduction", ok, "; ".join(notes))


def test_10_determinism(acceptance_log, tmp_path):
    outs = []
    for k in range(2):
        path = tmp_path / f"run{k}.json"
        proc = subprocess.run(
            [sys.executable, "-m", "coulomb_rings", "anneal", "--m", "10", "--seed", "42",
             "--out", str(path), "--json"],
            capture_output=True, check=True,
        )
        outs.append((path.read_bytes(), proc.stdout))
    ok = outs[0] == outs[1] and len(outs[0][0]) > 0
    record(acceptance_log, 10, "determinism", ok, f"two `anneal --seed 42` runs byte-identical ({len(outs[0][0])} bytes)")
