"""On-disk eigensymbol cache: one JSON file per (level, label, sign)."""

from __future__ import annotations

import json
import os
import tempfile
from fractions import Fraction
from pathlib import Path

from .modsym import Eigensymbol

CACHE_FORMAT = "mtlambda-eigensymbol"
CACHE_VERSION = 1


class CacheVersionError(ValueError):
    pass


def _enc(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def _dec(s: str) -> Fraction:
    num, den = s.split("/")
    return Fraction(int(num), int(den))


def cache_path(cache_dir, level: int, label: str, sign: int) -> Path:
    tag = "plus" if sign > 0 else "minus"
    return Path(cache_dir) / f"{label}-N{level}-{tag}.json"


def dumps(symbol: Eigensymbol) -> str:
    obj = {
        "format": CACHE_FORMAT,
        "version": CACHE_VERSION,
        "level": symbol.level,
        "label": symbol.label,
        "sign": symbol.sign,
        "identifying_eigenvalues": [list(x) for x in symbol.identifying_eigenvalues],
        "values": [_enc(x) for x in symbol.values],
        "manin_values": [_enc(x) for x in symbol.manin_values],
    }
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def loads(text: str) -> Eigensymbol:
    obj = json.loads(text)
    if obj.get("format") != CACHE_FORMAT or obj.get("version") != CACHE_VERSION:
        raise CacheVersionError(f"unsupported cache entry {obj.get('format')!r} v{obj.get('version')!r}")
    return Eigensymbol(
        level=int(obj["level"]),
        sign=int(obj["sign"]),
        label=obj["label"],
        values=tuple(_dec(s) for s in obj["values"]),
        identifying_eigenvalues=tuple((int(l), int(a)) for l, a in obj["identifying_eigenvalues"]),
        manin_values=tuple(_dec(s) for s in obj["manin_values"]),
    )


def save(symbol: Eigensymbol, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    with os.fdopen(fd, "w", encoding="utf-8") as fh:
        fh.write(dumps(symbol))
    os.replace(tmp, path)


def load(path) -> Eigensymbol:
    return loads(Path(path).read_text(encoding="utf-8"))
