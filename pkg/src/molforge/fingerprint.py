"""Morgan (circular) fingerprints and Tanimoto similarity.

Atom identifiers start from (element, charge, heavy degree, H count, ring
flag) and are re-hashed once per radius with the sorted (bond order,
neighbor identifier) list. Every identifier at every radius is folded into a
fixed-width bit vector. Hashing is BLAKE2b truncated to 64 bits, so bit
positions are stable across runs and platforms.
"""

from __future__ import annotations

import hashlib
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path

from molforge.errors import EmptyReferenceSet, WidthMismatch
from molforge.molgraph import Molecule

__all__ = [
    "Fingerprint",
    "morgan_fingerprint",
    "morgan_identifiers",
    "tanimoto",
    "max_similarity",
    "bulk_tanimoto",
    "write_fingerprint_dump",
    "read_fingerprint_dump",
]

DEFAULT_WIDTH = 2048
DEFAULT_RADIUS = 2
_MASK64 = (1 << 64) - 1


def _h64(*values: int) -> int:
    data = b"".join((v & _MASK64).to_bytes(8, "little") for v in values)
    return int.from_bytes(hashlib.blake2b(data, digest_size=8).digest(), "little")


@dataclass(frozen=True, slots=True)
class Fingerprint:
    """Fixed-width bit vector stored as a Python int (bit ``i`` = position ``i``)."""

    bits: int
    width: int = DEFAULT_WIDTH
    radius: int = DEFAULT_RADIUS
    popcount: int = field(init=False, compare=False)

    def __post_init__(self) -> None:
        if self.bits < 0 or self.bits >> self.width:
            raise ValueError("bits outside fingerprint width")
        object.__setattr__(self, "popcount", self.bits.bit_count())

    @classmethod
    def from_positions(cls, positions: Iterable[int], width: int = DEFAULT_WIDTH, radius: int = DEFAULT_RADIUS) -> Fingerprint:
        bits = 0
        for p in positions:
            if not 0 <= p < width:
                raise ValueError(f"bit position {p} outside width {width}")
            bits |= 1 << p
        return cls(bits, width, radius)

    def on_bits(self) -> list[int]:
        out, b, i = [], self.bits, 0
        while b:
            if b & 1:
                out.append(i)
            b >>= 1
            i += 1
        return out

    def to_hex(self) -> str:
        return format(self.bits, f"0{self.width // 4}x")

    @classmethod
    def from_hex(cls, text: str, radius: int = DEFAULT_RADIUS) -> Fingerprint:
        text = text.strip()
        return cls(int(text, 16), len(text) * 4, radius)

    def __len__(self) -> int:
        return self.width


def morgan_identifiers(m: Molecule, radius: int = DEFAULT_RADIUS) -> list[set[int]]:
    """64-bit environment identifiers per radius level (index 0 .. radius)."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    ids = [
        _h64(a.element, a.charge, m.degree(i), m.total_h(i), int(m.is_ring_atom(i)))
        for i, a in enumerate(m.atoms)
    ]
    levels = [set(ids)]
    for r in range(1, radius + 1):
        new = []
        for i in range(m.num_atoms):
            env = sorted((int(m.bonds[k].order), ids[j]) for j, k in m.neighbors(i))
            flat = [r, ids[i]]
            for order, nid in env:
                flat += [order, nid]
            new.append(_h64(*flat))
        ids = new
        levels.append(set(ids))
    return levels


def morgan_fingerprint(m: Molecule, radius: int = DEFAULT_RADIUS, width: int = DEFAULT_WIDTH) -> Fingerprint:
    if width <= 0 or width & (width - 1):
        raise ValueError("width must be a power of two")
    bits = 0
    for level in morgan_identifiers(m, radius):
        for ident in level:
            bits |= 1 << (ident % width)
    return Fingerprint(bits, width, radius)


def tanimoto(a: Fingerprint, b: Fingerprint) -> float:
    """``|a & b| / |a | b|``; two empty fingerprints have similarity 1.0."""
    if a.width != b.width:
        raise WidthMismatch(f"fingerprint widths differ: {a.width} vs {b.width}")
    union = (a.bits | b.bits).bit_count()
    if union == 0:
        return 1.0
    return (a.bits & b.bits).bit_count() / union


def bulk_tanimoto(query: Fingerprint, refs: Sequence[Fingerprint]) -> list[float]:
    return [tanimoto(query, r) for r in refs]


def max_similarity(query: Fingerprint, refs: Sequence[Fingerprint]) -> tuple[float, int]:
    """Highest Tanimoto similarity to ``refs`` and its index (first on ties)."""
    if not refs:
        raise EmptyReferenceSet("reference set is empty")
    best, best_i = -1.0, -1
    for i, r in enumerate(refs):
        s = tanimoto(query, r)
        if s > best:
            best, best_i = s, i
    return best, best_i


def write_fingerprint_dump(path: str | Path, items: Iterable[tuple[str, Fingerprint]]) -> None:
    """One ``<hex><TAB><id>`` line per fingerprint."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for ident, fp in items:
            fh.write(f"{fp.to_hex()}\t{ident}\n")


def read_fingerprint_dump(path: str | Path) -> list[tuple[str, Fingerprint]]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            hexpart, _, ident = line.partition("\t")
            out.append((ident, Fingerprint.from_hex(hexpart)))
    return out
