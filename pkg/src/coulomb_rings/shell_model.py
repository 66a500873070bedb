"""Greedy outermost-first ring filling.

The outer ring takes its stability capacity for the current total, those
particles are removed, and the rest fill the next ring by the same rule. A
remainder of one particle becomes a centre "ring" at the origin.
"""

from __future__ import annotations

from dataclasses import dataclass

from .spectral import nmax_total


@dataclass(frozen=True)
class ShellPrediction:
    occupations: tuple[int, ...]

    @property
    def m(self) -> int:
        return sum(self.occupations)

    def __str__(self) -> str:
        return format_occupations(self.occupations)


def format_occupations(occ) -> str:
    return "/".join(str(int(k)) for k in occ)


def parse_occupations(text: str) -> tuple[int, ...]:
    return tuple(int(k) for k in text.strip().split("/"))


def shell_fill(m: int) -> ShellPrediction:
    if m < 1:
        raise ValueError("m must be >= 1")
    occ = []
    remaining = m
    while remaining > 0:
        take = min(remaining, nmax_total(remaining))
        occ.append(take)
        remaining -= take
    return ShellPrediction(tuple(occ))


def shell_table(ms) -> list[ShellPrediction]:
    return [shell_fill(int(m)) for m in ms]
