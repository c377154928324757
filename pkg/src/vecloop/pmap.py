"""Finite partial maps from indices, read through `extend`.

A PMap stores finitely many (index, value) entries but represents a larger
function: a lookup at index i reads the entry at the longest stored prefix
of i.  This models tensor broadcasting; writing at an index implicitly
covers the whole subtree above it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Mapping

from .indices import AChain, Index, in_up, max_below


@dataclass(frozen=True)
class PMap:
    """An immutable finite partial map Index -> value."""

    entries: Mapping[Index, object]

    def __init__(self, entries: Mapping[Index, object] | Iterable[tuple[Index, object]] = ()):
        object.__setattr__(self, "entries", dict(entries))

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, i: Index) -> bool:
        return i in self.entries

    def __eq__(self, other) -> bool:
        return isinstance(other, PMap) and self.entries == other.entries

    def domain(self) -> set[Index]:
        return set(self.entries)

    def get(self, i: Index):
        return self.entries.get(i)

    def items_sorted(self) -> list[tuple[Index, object]]:
        return sorted(self.entries.items(), key=lambda kv: kv[0].sort_key())

    def extend_eval(self, i: Index):
        """Value at the longest stored prefix of i, or None if none exists."""
        best = max_below(self.entries, i)
        return None if best is None else self.entries[best]

    def updated(self, tensor: "PMap") -> "PMap":
        """Overwrite with `tensor`; entries strictly above its domain vanish.

        An entry of the old map survives only when its index is not covered
        by the written region (the upward closure of the tensor's domain).
        """
        new = dict(tensor.entries)
        dom = list(tensor.entries)
        for i, v in self.entries.items():
            if i not in tensor.entries and not in_up(i, dom):
                new[i] = v
        return PMap(new)

    def copied(self, rho: Mapping[Index, Index]) -> "PMap":
        """Relocate represented values along the injective map `rho`.

        Each index in the image takes the represented value of its preimage;
        everything else in the image's upward closure is cleared; entries
        elsewhere are untouched.  Stored entries move literally; a slot
        whose preimage has no stored entry gains one only when the cleared
        slot would otherwise read back a different value, so the result
        stays as sparse as the relocation allows.
        """
        image = {target: source for source, target in rho.items()}
        new: dict[Index, object] = {}
        for target, source in image.items():
            if source in self.entries:
                new[target] = self.entries[source]
        image_list = list(image)
        for i, v in self.entries.items():
            if i not in image and not in_up(i, image_list):
                new[i] = v
        base = PMap(new)
        repairs: dict[Index, object] = {}
        for target in sorted(image, key=Index.sort_key):
            source = image[target]
            if source in self.entries:
                continue
            value = self.extend_eval(source)
            if value is not None and base.extend_eval(target) != value:
                repairs[target] = value
        if repairs:
            new.update(repairs)
        return PMap(new)

    def restricted(self, keep: Iterable[Index]) -> "PMap":
        keep_set = set(keep)
        return PMap({i: v for i, v in self.entries.items() if i in keep_set})

    def canonical(self) -> "PMap":
        """Drop entries already induced by a shorter stored prefix.

        Two maps represent the same total function exactly when their
        canonical forms are equal, so this is the equality used by the
        fixed-point check.
        """
        kept = dict(self.entries)
        for i in sorted(self.entries, key=len, reverse=True):
            if len(i) == 0:
                continue
            nearest = max_below((j for j in kept if j != i), i)
            if nearest is not None and kept[nearest] == self.entries[i]:
                del kept[i]
        return PMap(kept)

    def same_function(self, other: "PMap") -> bool:
        return self.canonical().entries == other.canonical().entries

    def text(self) -> str:
        inner = ", ".join(f"{i.text()}: {v!r}" for i, v in self.items_sorted())
        return "{" + inner + "}"

    def __repr__(self) -> str:
        return f"PMap({self.text()})"


def zeros(chain: AChain | Iterable[Index]) -> PMap:
    """The score tensor that is 0.0 on every index of the given set."""
    return PMap({i: 0.0 for i in chain})


def tensor_add(left: PMap, right: PMap) -> PMap:
    """Pointwise sum; indices on one side only pass through unchanged."""
    out = dict(left.entries)
    for i, v in right.entries.items():
        if i in out:
            out[i] = out[i] + v
        else:
            out[i] = v
    return PMap(out)


def tensor_sum(tensor: PMap) -> float:
    """Total of all entries, in canonical index order."""
    return sum(v for _, v in tensor.items_sorted())


def probe_equal(left: PMap, right: PMap, probes: Iterable[Index],
                value_eq: Callable[[object, object], bool] = lambda a, b: a == b) -> bool:
    """Extensional agreement of the represented functions on `probes`."""
    for i in probes:
        if not value_eq(left.extend_eval(i), right.extend_eval(i)):
            return False
    return True


def cell_eq_on(left: PMap, right: PMap, where: Iterable[Index]) -> bool:
    return probe_equal(left, right, where)
