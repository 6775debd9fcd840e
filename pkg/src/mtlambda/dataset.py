"""Curated curve records shipped with the package (JSON lines, versioned header)."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path

from .ec_arith import EllipticCurve
from .growth import GrowthModel

DATASET_FORMAT = "mtlambda-curves"
DATASET_VERSION = 1


class UnknownLabel(KeyError):
    pass


class DatasetError(ValueError):
    pass


@dataclass(frozen=True)
class CurveRecord:
    label: str
    a_invariants: tuple[int, ...]
    conductor: int
    p: int
    additive: bool
    expected: dict[int, int] = field(default_factory=dict)
    ord_delta: int | None = None
    defect: int | None = None
    lambda_model: GrowthModel | None = None
    residual_model: GrowthModel | None = None
    twist_label: str | None = None
    twist_a_invariants: tuple[int, ...] | None = None
    twist_conductor: int | None = None
    desk_n_max: int | None = None
    default_row: bool = False

    def curve(self) -> EllipticCurve:
        return EllipticCurve.from_ainvs(self.label, self.a_invariants, self.conductor)

    def twist_curve(self) -> EllipticCurve:
        if self.twist_a_invariants is None:
            raise DatasetError(f"{self.label} carries no twist data")
        return EllipticCurve.from_ainvs(self.twist_label, self.twist_a_invariants, self.twist_conductor)


def _model(obj, p: int) -> GrowthModel | None:
    if obj is None:
        return None
    return GrowthModel(
        p,
        Fraction(obj["a"]),
        Fraction(obj["b"]),
        Fraction(obj["c_even"]),
        Fraction(obj["c_odd"]),
        obj["convention"],
    )


def _record(obj: dict) -> CurveRecord:
    p = int(obj["p"])
    rec = CurveRecord(
        label=obj["label"],
        a_invariants=tuple(int(a) for a in obj["a_invariants"]),
        conductor=int(obj["conductor"]),
        p=p,
        additive=bool(obj["additive"]),
        expected={int(n): int(v) for n, v in obj.get("expected", {}).items()},
        ord_delta=obj.get("ord_delta"),
        defect=obj.get("defect"),
        lambda_model=_model(obj.get("lambda_model"), p),
        residual_model=_model(obj.get("residual_model"), p),
        twist_label=obj.get("twist_label"),
        twist_a_invariants=tuple(obj["twist_a_invariants"]) if obj.get("twist_a_invariants") else None,
        twist_conductor=obj.get("twist_conductor"),
        desk_n_max=obj.get("desk_n_max"),
        default_row=bool(obj.get("default_row", False)),
    )
    if len(rec.a_invariants) != 5:
        raise DatasetError(f"{rec.label}: expected five a-invariants")
    if rec.additive and rec.conductor % (p * p):
        raise DatasetError(f"{rec.label}: flagged additive but {p}^2 does not divide {rec.conductor}")
    rec.curve()
    return rec


def default_path() -> Path:
    return Path(str(resources.files("mtlambda") / "data" / "curves.jsonl"))


def load_dataset(path=None) -> dict[str, CurveRecord]:
    path = Path(path) if path else default_path()
    with open(path, encoding="utf-8") as fh:
        lines = [line for line in fh if line.strip()]
    if not lines:
        raise DatasetError(f"{path} is empty")
    header = json.loads(lines[0])
    if header.get("format") != DATASET_FORMAT or header.get("version") != DATASET_VERSION:
        raise DatasetError(f"{path}: unsupported header {header}")
    records = {}
    for line in lines[1:]:
        rec = _record(json.loads(line))
        records[rec.label] = rec
    return records


def lookup(records: dict[str, CurveRecord], label: str) -> CurveRecord:
    try:
        return records[label]
    except KeyError:
        raise UnknownLabel(label) from None
