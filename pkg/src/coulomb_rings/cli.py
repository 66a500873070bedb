"""Command-line interface: ``coulomb-rings <subcommand> ...``.

Exit codes: 0 success, 1 numeric failure (a check or tolerance failed),
2 input/config error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import io, report, spectral
from .annealer import CENTER_EPS, GAP_FRAC, AnnealParams, anneal
from .core_model import ModelParams, energy, gradient, ring_configuration
from .errors import BadInputFile, CoulombRingsError
from .render import render_svg
from .shell_model import shell_table
from .verify import run_all

EXIT_OK, EXIT_NUMERIC, EXIT_IO = 0, 1, 2

SCHEDULE_KEYS = ("t0", "alpha", "sweeps", "moves_per_sweep", "step_scale", "restarts")


def _load_config(path) -> dict:
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise BadInputFile(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise BadInputFile(f"config {path} must hold a JSON object")
    return data


def _emit(args, payload: dict, text: str) -> None:
    if args.quiet:
        return
    sys.stdout.write(io.dumps(payload) if args.json else text)


def _ms(values, rng) -> list[int]:
    ms = list(values or [])
    if rng:
        ms += list(range(rng[0], rng[1] + 1))
    if not ms:
        raise BadInputFile("give at least one M (positional or --range)")
    if min(ms) < 1:
        raise BadInputFile("M must be >= 1")
    return ms


def cmd_energy(args, cfg) -> int:
    if args.config_json:
        c, q = io.read_config(args.config_json)
        if args.q is not None:
            q = args.q
    elif args.ring:
        q = args.q or 0.0
        r2 = args.r2 if args.r2 is not None else spectral.equilibrium_radius(args.ring, q)
        c = ring_configuration(args.ring, math.sqrt(r2), center=args.center)
    else:
        raise BadInputFile("give a configuration file or --ring N")
    p = ModelParams(q)
    e = energy(c, p)
    gnorm = float(np.linalg.norm(gradient(c, p)))
    payload = {"n": c.n, "q": q, "total": e.total, "confinement": e.confinement,
               "pair": e.pair, "interior": e.interior, "grad_norm": gnorm}
    _emit(args, payload, "".join(f"{k:12s} {v!r}\n" for k, v in payload.items()))
    return EXIT_OK


def cmd_spectrum(args, cfg) -> int:
    ans = spectral.RingAnsatz.at_equilibrium(args.n, args.q)
    sp = spectral.ring_spectrum(ans)
    payload = {"n": args.n, "q": args.q, "r2": spectral.equilibrium_radius(args.n, args.q),
               "angular": sp.angular.tolist(), "radial": sp.radial.tolist(),
               "stable": sp.stable, "nmax": spectral.nmax_interior(args.q)}
    text = (f"N={args.n} Q={args.q:g} R^2={payload['r2']:g}\n"
            f"angular {' '.join(f'{x:g}' for x in sp.angular)}\n"
            f"radial  {' '.join(f'{x:g}' for x in sp.radial)}\n"
            f"{'stable' if sp.stable else 'not stable'}; largest stable ring around Q: {payload['nmax']}\n")
    _emit(args, payload, text)
    return EXIT_OK


def cmd_nmax(args, cfg) -> int:
    if (args.q is None) == (args.m is None):
        raise BadInputFile("give exactly one of --q or --m")
    if args.q is not None:
        payload = {"q": args.q, "nmax": spectral.nmax_interior(args.q)}
    else:
        payload = {"m": args.m, "nmax": spectral.nmax_total(args.m)}
    _emit(args, payload, f"{payload['nmax']}\n")
    return EXIT_OK


def cmd_shells(args, cfg) -> int:
    ms = _ms(args.m, args.range)
    preds = shell_table(ms)
    payload = {"rows": [{"M": m, "occupations": list(p.occupations), "shells": str(p)}
                        for m, p in zip(ms, preds)]}
    _emit(args, payload, "".join(f"{m:5d}  {p}\n" for m, p in zip(ms, preds)))
    return EXIT_OK


def result_payload(res) -> dict:
    return {
        "params": res.params.to_dict(),
        "result": {
            "best_energy": res.best_energy,
            "signature": str(res.signature),
            "occupations": list(res.signature.occupations),
            "ring_radii": list(res.signature.ring_radii),
            "density_bulk": res.density_bulk,
            "grad_norm_after_polish": res.grad_norm_after_polish,
            "converged": res.converged,
            "best_restart": res.best_restart,
            "restarts": [
                {"index": r.index, "key": r.key, "energy": r.energy, "grad_norm": r.grad_norm,
                 "converged": r.converged, "acceptance": r.acceptance}
                for r in res.restarts
            ],
        },
        "configuration": io.config_to_dict(res.best, res.params.q),
    }


def _anneal_params(args, cfg) -> AnnealParams:
    kw = {k: cfg[k] for k in SCHEDULE_KEYS if k in cfg}
    for k in ("t0", "alpha", "sweeps", "restarts"):
        v = getattr(args, k)
        if v is not None:
            kw[k] = v
    seed = args.seed if args.seed is not None else cfg.get("seed", 0)
    return AnnealParams(m=args.m, q=args.q or 0.0, seed=int(seed), **kw)


def cmd_anneal(args, cfg) -> int:
    p = _anneal_params(args, cfg)
    gap = cfg.get("gap_frac", GAP_FRAC)
    ceps = cfg.get("center_eps", CENTER_EPS)
    res = anneal(p, gap_frac=gap, center_eps=ceps)
    payload = result_payload(res)
    if args.out:
        Path(args.out).write_text(io.dumps(payload))
    if args.svg:
        Path(args.svg).write_text(render_svg(res.best, gap_frac=gap, center_eps=ceps))
    text = (f"M={p.m} seed={p.seed} best energy {res.best_energy!r}\n"
            f"rings {res.signature}  |grad| {res.grad_norm_after_polish:.2e}"
            + (f"  bulk density {res.density_bulk:.4f}" if res.density_bulk is not None else "") + "\n")
    _emit(args, payload, text)
    return EXIT_OK if res.converged else EXIT_NUMERIC


def cmd_compare(args, cfg) -> int:
    ms = _ms(args.m, args.range)
    kw = {k: cfg[k] for k in SCHEDULE_KEYS if k in cfg}
    if args.seed is not None:
        kw["seed"] = args.seed
    rows = report.compare(ms, run_anneal=args.anneal, anneal_kwargs=kw)
    if args.csv:
        Path(args.csv).write_text(report.as_csv(rows))
    payload = {"rows": report.rows_as_records(rows)}
    if args.out:
        Path(args.out).write_text(io.dumps(payload))
    _emit(args, payload, report.as_text(rows))
    bad = [r.m for r in rows if r.nth_matches is False]
    return EXIT_NUMERIC if bad else EXIT_OK


def cmd_render(args, cfg) -> int:
    c, _ = io.read_config(args.config_json)
    svg = render_svg(c, gap_frac=cfg.get("gap_frac", GAP_FRAC), center_eps=cfg.get("center_eps", CENTER_EPS))
    try:
        Path(args.svg).write_text(svg)
    except OSError as exc:
        raise BadInputFile(f"cannot write {args.svg}: {exc}") from exc
    if not args.quiet and not args.json:
        sys.stdout.write(f"wrote {args.svg}\n")
    return EXIT_OK


def cmd_verify(args, cfg) -> int:
    rep = run_all(directory=args.data_dir, run_anneal=not args.skip_anneal,
                  overrides=cfg.get("tolerances"))
    lines = ["tolerances: " + ", ".join(f"{k}={v:g}" for k, v in rep["header"]["tolerances"].items())]
    if rep["header"]["overridden"]:
        lines.append("overridden: " + ", ".join(rep["header"]["overridden"]))
    for chk in rep["checks"]:
        lines.append(f"{'PASS' if chk['passed'] else 'FAIL'}  {chk['name']}: {chk['detail']}")
    lines.append("all checks passed" if rep["passed"] else "verification FAILED")
    _emit(args, rep, "\n".join(lines) + "\n")
    return EXIT_OK if rep["passed"] else EXIT_NUMERIC


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="RNG seed (64-bit)")
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--quiet", action="store_true", help="suppress stdout")
    common.add_argument("--config", default=None, help="JSON file overriding schedule/tolerance constants")

    ap = argparse.ArgumentParser(prog="coulomb-rings", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("energy", parents=[common], help="energy and gradient norm of a configuration")
    s.add_argument("config_json", nargs="?")
    s.add_argument("--ring", type=int, help="use a regular ring of this many particles")
    s.add_argument("--r2", type=float, help="squared ring radius (default: equilibrium)")
    s.add_argument("--q", type=float, default=None)
    s.add_argument("--center", action="store_true", help="add a particle at the origin")
    s.set_defaults(func=cmd_energy)

    s = sub.add_parser("spectrum", parents=[common], help="analytic ring mode spectra")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--q", type=float, default=0.0)
    s.set_defaults(func=cmd_spectrum)

    s = sub.add_parser("nmax", parents=[common], help="largest stable ring population")
    s.add_argument("--q", type=float, default=None, help="enclosed charge")
    s.add_argument("--m", type=int, default=None, help="total particle count")
    s.set_defaults(func=cmd_nmax)

    s = sub.add_parser("shells", parents=[common], help="shell-model ring occupations")
    s.add_argument("m", type=int, nargs="*")
    s.add_argument("--range", type=int, nargs=2, metavar=("LO", "HI"))
    s.set_defaults(func=cmd_shells)

    s = sub.add_parser("anneal", parents=[common], help="simulated annealing + polish")
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--q", type=float, default=None)
    s.add_argument("--restarts", type=int, default=None)
    s.add_argument("--t0", type=float, default=None)
    s.add_argument("--alpha", type=float, default=None)
    s.add_argument("--sweeps", type=int, default=None)
    s.add_argument("--out", default=None, help="write result JSON here")
    s.add_argument("--svg", default=None, help="write SVG rendering here")
    s.set_defaults(func=cmd_anneal)

    s = sub.add_parser("compare", parents=[common], help="shell model (and annealing) vs published tables")
    s.add_argument("m", type=int, nargs="*")
    s.add_argument("--range", type=int, nargs=2, metavar=("LO", "HI"))
    s.add_argument("--anneal", action="store_true", help="fill the observed column from fresh runs")
    s.add_argument("--csv", default=None)
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_compare)

    s = sub.add_parser("render", parents=[common], help="SVG of a configuration JSON")
    s.add_argument("config_json")
    s.add_argument("--svg", required=True)
    s.set_defaults(func=cmd_render)

    s = sub.add_parser("verify", parents=[common], help="run the built-in acceptance checks")
    s.add_argument("--data-dir", default=None, help="alternative golden table directory")
    s.add_argument("--skip-anneal", action="store_true")
    s.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _load_config(args.config)
        return args.func(args, cfg)
    except (BadInputFile, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except CoulombRingsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
