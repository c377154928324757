"""Random databases: total, deterministic maps from indices to reals.

Explicit entries take precedence; everything else is served by a default
policy, either a constant or a seeded standard-normal stream.  The normal
stream hashes the canonical index bytes together with the seed (64-bit
FNV-1a, finished with a splitmix64-style mix) and feeds two derived words
through Box-Muller, so lookups are reproducible across platforms.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Mapping

from .indices import Index

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK = (1 << 64) - 1


def _fnv1a(data: bytes, seed: int) -> int:
    h = (_FNV_OFFSET ^ (seed & _MASK)) & _MASK
    for byte in data:
        h = ((h ^ byte) * _FNV_PRIME) & _MASK
    return h


def _mix(h: int) -> int:
    # splitmix64 finalizer
    h = (h + 0x9E3779B97F4A7C15) & _MASK
    h = ((h ^ (h >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    h = ((h ^ (h >> 27)) * 0x94D049BB133111EB) & _MASK
    return h ^ (h >> 31)


def _unit(word: int) -> float:
    # top 53 bits -> (0, 1]; never 0 so log() below is safe
    return ((word >> 11) + 1) / float(1 << 53)


def index_bytes(i: Index) -> bytes:
    """Canonical byte encoding hashed by the normal default."""
    return i.text().encode("utf-8")


def hash_normal(i: Index, seed: int) -> float:
    h = _mix(_fnv1a(index_bytes(i), seed))
    u1 = _unit(h)
    u2 = _unit(_mix(h ^ 0xD1B54A32D192ED03))
    return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)


@dataclass(frozen=True)
class Rdb:
    """Explicit entries over a total default."""

    explicit: Mapping[Index, float] = field(default_factory=dict)
    default_kind: str = "const"  # "const" | "normal"
    default_value: float = 0.0
    seed: int = 0

    def lookup(self, i: Index) -> float:
        if i in self.explicit:
            return self.explicit[i]
        if self.default_kind == "const":
            return self.default_value
        return hash_normal(i, self.seed)

    def to_json(self) -> dict:
        if self.default_kind == "const":
            default = {"kind": "const", "value": self.default_value}
        else:
            default = {"kind": "normal", "seed": self.seed}
        entries = [
            {"index": [[name, value] for name, value in i], "value": v}
            for i, v in sorted(self.explicit.items(), key=lambda kv: kv[0].sort_key())
        ]
        return {"default": default, "entries": entries}

    @staticmethod
    def from_json(doc: dict) -> "Rdb":
        default = doc.get("default", {"kind": "const", "value": 0.0})
        explicit = {
            Index(tuple((str(n), int(k)) for n, k in entry["index"])): float(entry["value"])
            for entry in doc.get("entries", [])
        }
        if default["kind"] == "const":
            return Rdb(explicit, "const", float(default["value"]), 0)
        return Rdb(explicit, "normal", 0.0, int(default["seed"]))

    @staticmethod
    def load(path: str) -> "Rdb":
        with open(path, "r", encoding="utf-8") as fh:
            return Rdb.from_json(json.load(fh))

    def dump(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh, indent=2, sort_keys=True)
            fh.write("\n")
