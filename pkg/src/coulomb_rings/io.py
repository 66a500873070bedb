"""JSON persistence for configurations and access to the embedded ring tables."""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .core_model import Configuration
from .errors import BadInputFile
from .shell_model import parse_occupations

TABLE_FILES = ("table_small.csv", "table_40_60.csv")

# sha256 of the shipped table files; verify fails if these drift
TABLE_SHA256 = {
    "table_small.csv": "bc48d73526de5918fe2e479159c031a724e8571bb01b3b27165f4e69cc9b7e96",
    "table_40_60.csv": "766699d8496d4f51ad8f397f556f8597cab151734e25e5eb1573bce97ab11921",
}


def config_to_dict(c: Configuration, q: float = 0.0) -> dict:
    # json writes floats with repr(), the shortest string that round-trips exactly
    return {"n": c.n, "q": float(q), "positions": [[float(x), float(y)] for x, y in c.positions]}


def config_from_dict(d: dict) -> tuple[Configuration, float]:
    try:
        pos = d["positions"]
        n = int(d.get("n", len(pos)))
        q = float(d.get("q", 0.0))
    except (KeyError, TypeError, ValueError) as exc:
        raise BadInputFile(f"not a configuration object: {exc}") from exc
    if not pos:
        raise BadInputFile("configuration has no positions")
    if n != len(pos):
        raise BadInputFile(f"n = {n} but {len(pos)} positions given")
    try:
        c = Configuration(np.asarray(pos, dtype=np.float64))
    except ValueError as exc:
        raise BadInputFile(str(exc)) from exc
    if q < 0.0 or not math.isfinite(q):
        raise BadInputFile(f"interior charge must be finite and >= 0, got {q}")
    return c, q


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False, allow_nan=False) + "\n"


def write_config(path, c: Configuration, q: float = 0.0) -> None:
    Path(path).write_text(dumps(config_to_dict(c, q)))


def read_config(path) -> tuple[Configuration, float]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise BadInputFile(f"cannot read {path}: {exc}") from exc
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise BadInputFile(f"{path} is not valid JSON: {exc}") from exc
    if isinstance(d, dict) and "configuration" in d:
        d = d["configuration"]
    if not isinstance(d, dict):
        raise BadInputFile(f"{path} does not hold a JSON object")
    return config_from_dict(d)


@dataclass(frozen=True)
class GoldenRow:
    m: int
    nth: tuple[int, ...]
    nexp: tuple[int, ...] | None
    source: str


def data_dir() -> Path:
    return Path(str(resources.files("coulomb_rings") / "data"))


def table_hash(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def load_golden(directory=None) -> dict[int, GoldenRow]:
    directory = Path(directory) if directory is not None else data_dir()
    rows: dict[int, GoldenRow] = {}
    for name in TABLE_FILES:
        path = directory / name
        try:
            lines = [ln for ln in path.read_text().splitlines() if ln and not ln.startswith("#")]
        except OSError as exc:
            raise BadInputFile(f"cannot read golden table {path}: {exc}") from exc
        for rec in csv.DictReader(lines):
            try:
                m = int(rec["M"])
                nexp = rec.get("N_exp") or ""
                rows[m] = GoldenRow(
                    m, parse_occupations(rec["N_th"]),
                    parse_occupations(nexp) if nexp.strip() else None, name,
                )
            except (KeyError, ValueError) as exc:
                raise BadInputFile(f"malformed row in {path}: {rec}") from exc
    return rows
