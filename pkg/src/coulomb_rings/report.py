"""Shell-model predictions and annealing runs laid against the published ring tables."""

from __future__ import annotations

import csv
import io as _io
import logging
from dataclasses import dataclass

from .annealer import AnnealParams, RingSignature, anneal
from .io import GoldenRow, load_golden
from .shell_model import ShellPrediction, format_occupations, shell_fill

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ComparisonRow:
    m: int
    predicted: ShellPrediction
    observed: RingSignature | None
    published_nth: tuple[int, ...] | None
    published_nexp: tuple[int, ...] | None

    @property
    def deltas(self) -> tuple[int, ...] | None:
        """Observed minus published observation, ring by ring from the outside."""
        if self.observed is None or self.published_nexp is None:
            return None
        return ring_deltas(self.observed.occupations, self.published_nexp)

    @property
    def max_abs_delta(self) -> int | None:
        d = self.deltas
        return None if d is None else max(abs(x) for x in d)

    @property
    def nth_matches(self) -> bool | None:
        return None if self.published_nth is None else self.predicted.occupations == self.published_nth


def ring_deltas(a, b) -> tuple[int, ...]:
    """Per-ring differences, outermost aligned; a missing ring counts as 0."""
    k = max(len(a), len(b))
    a = tuple(a) + (0,) * (k - len(a))
    b = tuple(b) + (0,) * (k - len(b))
    return tuple(x - y for x, y in zip(a, b))


def compare(ms, run_anneal: bool = False, golden: dict[int, GoldenRow] | None = None,
            anneal_kwargs: dict | None = None) -> list[ComparisonRow]:
    golden = golden if golden is not None else load_golden()
    rows = []
    for m in ms:
        g = golden.get(int(m))
        if g is None:
            log.warning("no published row for M=%d; only the prediction is computed", m)
        obs = None
        if run_anneal:
            obs = anneal(AnnealParams(m=int(m), **(anneal_kwargs or {}))).signature
        rows.append(ComparisonRow(
            int(m), shell_fill(int(m)), obs,
            g.nth if g else None, g.nexp if g else None,
        ))
    return rows


def _s(occ) -> str:
    return "" if occ is None else format_occupations(occ)


def rows_as_records(rows: list[ComparisonRow]) -> list[dict]:
    out = []
    for r in rows:
        out.append({
            "M": r.m,
            "predicted": _s(r.predicted.occupations),
            "published_nth": _s(r.published_nth),
            "nth_match": r.nth_matches,
            "observed": _s(r.observed.occupations if r.observed else None),
            "published_nexp": _s(r.published_nexp),
            "deltas": None if r.deltas is None else list(r.deltas),
            "max_abs_delta": r.max_abs_delta,
        })
    return out


def as_csv(rows: list[ComparisonRow]) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["M", "predicted", "published_nth", "nth_match", "observed", "published_nexp", "deltas", "max_abs_delta"])
    for rec in rows_as_records(rows):
        w.writerow([
            rec["M"], rec["predicted"], rec["published_nth"],
            "" if rec["nth_match"] is None else int(rec["nth_match"]),
            rec["observed"], rec["published_nexp"],
            "" if rec["deltas"] is None else " ".join(f"{d:+d}" for d in rec["deltas"]),
            "" if rec["max_abs_delta"] is None else rec["max_abs_delta"],
        ])
    return buf.getvalue()


def as_text(rows: list[ComparisonRow]) -> str:
    recs = rows_as_records(rows)
    head = ["M", "predicted", "published N_th", "observed", "published N_exp", "max|d|"]
    body = [[
        str(r["M"]), r["predicted"], r["published_nth"] or "-", r["observed"] or "-",
        r["published_nexp"] or "-", "-" if r["max_abs_delta"] is None else str(r["max_abs_delta"]),
    ] for r in recs]
    widths = [max(len(x) for x in col) for col in zip(head, *body)]
    fmt = "  ".join(f"{{:>{w}}}" for w in widths)
    lines = [fmt.format(*head), fmt.format(*("-" * w for w in widths))]
    lines += [fmt.format(*b) for b in body]
    worst = [r.max_abs_delta for r in rows if r.max_abs_delta is not None]
    if worst:
        lines.append(f"max per-ring |observed - published N_exp| = {max(worst)}")
    return "\n".join(lines) + "\n"
