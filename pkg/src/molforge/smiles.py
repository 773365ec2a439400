"""SMILES reading and canonical writing.

The reader covers the organic subset, bracket atoms (isotope, aromatic
symbol, tetrahedral ``@``/``@@``, H count, charge, atom class), explicit
bonds ``- = # :``, branches, ring closures including ``%nn`` and ``.``
fragment separators. Directional bonds ``/`` and ``\\`` are read as single
bonds; double-bond geometry is not modelled.

The writer is a two-pass DFS over canonical ranks: the first pass fixes the
spanning tree and ring-closure bonds, the second emits text with the lowest
free ring digit, aromatic atoms in lowercase and chirality tags re-expressed
in output neighbor order.
"""

from __future__ import annotations

import dataclasses
import sys
from collections.abc import Iterable, Iterator
from dataclasses import dataclass
from pathlib import Path

from molforge import elements
from molforge.errors import GraphError, ParseError, UnsupportedFeature, ValenceError
from molforge.molgraph import (
    IMPLICIT_H,
    Atom,
    Bond,
    BondOrder,
    Chirality,
    Molecule,
    build_molecule,
    canonical_ranks,
)
from molforge.molgraph.core import _needs_pi

__all__ = [
    "SmilesDialect",
    "parse_smiles",
    "write_canonical",
    "canonicalize",
    "read_smiles_file",
    "write_smiles_file",
]


@dataclass(frozen=True, slots=True)
class SmilesDialect:
    """Reader options.

    Attributes:
        accept_stereo: keep ``@``/``@@``; when False chirality is dropped.
        accept_isotopes: keep isotope labels; when False they are dropped.
        strict_aromatic_lowercase: reject input whose lowercase atoms are not
            perceived aromatic after construction.
    """

    accept_stereo: bool = True
    accept_isotopes: bool = True
    strict_aromatic_lowercase: bool = True


DEFAULT_DIALECT = SmilesDialect()

_ORGANIC = {"B": 5, "C": 6, "N": 7, "O": 8, "P": 15, "S": 16, "F": 9, "Cl": 17, "Br": 35, "I": 53}
_AROMATIC_ORGANIC = {"b": 5, "c": 6, "n": 7, "o": 8, "p": 15, "s": 16}
_AROMATIC_BRACKET = {"b": 5, "c": 6, "n": 7, "o": 8, "p": 15, "s": 16, "se": 34, "as": 33, "te": 52}
_BOND_CHARS = {"-": BondOrder.SINGLE, "=": BondOrder.DOUBLE, "#": BondOrder.TRIPLE, ":": BondOrder.AROMATIC,
               "/": BondOrder.SINGLE, "\\": BondOrder.SINGLE}


class _Parser:
    def __init__(self, text: str, dialect: SmilesDialect):
        self.text = text
        self.pos = 0
        self.dialect = dialect
        self.atoms: list[dict] = []
        self.bonds: list[tuple[int, int, BondOrder | None]] = []
        self.atom_pos: list[int] = []
        self.slots: list[list[object]] = []  # neighbor order as written, for stereo
        self.open_rings: dict[int, tuple[int, BondOrder | None, int, int]] = {}

    def fail(self, reason: str, pos: int | None = None) -> ParseError:
        return ParseError(reason, self.pos if pos is None else pos, self.text)

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    # --- atoms ----------------------------------------------------------------
    def read_atom(self) -> dict | None:
        t, p = self.text, self.pos
        if p >= len(t):
            return None
        ch = t[p]
        if ch == "[":
            return self.read_bracket()
        two = t[p:p + 2]
        if two in ("Cl", "Br"):
            self.pos += 2
            return {"element": _ORGANIC[two], "aromatic": False, "bracket": False}
        if ch in _ORGANIC:
            self.pos += 1
            return {"element": _ORGANIC[ch], "aromatic": False, "bracket": False}
        if ch in _AROMATIC_ORGANIC:
            self.pos += 1
            return {"element": _AROMATIC_ORGANIC[ch], "aromatic": True, "bracket": False}
        if ch == "*":
            raise UnsupportedFeature("wildcard atom '*' is not supported", p, t)
        return None

    def read_int(self) -> int | None:
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        return int(self.text[start:self.pos]) if self.pos > start else None

    def read_bracket(self) -> dict:
        start = self.pos
        self.pos += 1
        isotope = self.read_int()
        t = self.text
        sym, aromatic = None, False
        two, one = t[self.pos:self.pos + 2], t[self.pos:self.pos + 1]
        if two in ("se", "as", "te"):
            sym, aromatic = two, True
        elif len(two) == 2 and two[1].islower() and two in elements.ATOMIC_NUMBERS:
            sym = two
        elif one in _AROMATIC_BRACKET:
            sym, aromatic = one, True
        elif one in elements.ATOMIC_NUMBERS:
            sym = one
        elif one == "*":
            raise UnsupportedFeature("wildcard atom '*' is not supported", self.pos, t)
        else:
            raise self.fail("unknown element in bracket atom")
        self.pos += len(sym)
        element = _AROMATIC_BRACKET[sym] if aromatic else elements.ATOMIC_NUMBERS[sym]
        chir = Chirality.NONE
        if t.startswith("@@", self.pos):
            chir, self.pos = Chirality.CW, self.pos + 2
        elif t.startswith("@", self.pos):
            chir, self.pos = Chirality.CCW, self.pos + 1
            if t[self.pos:self.pos + 2] in ("TH", "AL", "SP", "TB", "OH"):
                raise UnsupportedFeature("only tetrahedral @/@@ chirality is supported", self.pos, t)
        hcount = 0
        if self.peek() == "H":
            self.pos += 1
            n = self.read_int()
            hcount = 1 if n is None else n
        charge = 0
        if self.peek() in "+-":
            sign = 1 if self.peek() == "+" else -1
            self.pos += 1
            n = self.read_int()
            if n is not None:
                charge = sign * n
            else:
                charge = sign
                while self.peek() == ("+" if sign > 0 else "-"):
                    charge += sign
                    self.pos += 1
        if self.peek() == ":":
            self.pos += 1
            if self.read_int() is None:
                raise self.fail("atom class requires a number")
        if self.peek() != "]":
            raise self.fail("bad bracket atom", self.pos)
        self.pos += 1
        if abs(charge) > 15:
            raise self.fail("charge out of range", start)
        if not self.dialect.accept_isotopes:
            isotope = None
        if not self.dialect.accept_stereo:
            chir = Chirality.NONE
        return {"element": element, "aromatic": aromatic, "bracket": True, "isotope": isotope,
                "charge": charge, "hcount": hcount, "chirality": chir}

    # --- main loop ------------------------------------------------------------
    def add_bond(self, a: int, b: int, order: BondOrder | None) -> None:
        self.bonds.append((a, b, order))

    def parse(self) -> Molecule:
        t = self.text
        if not t:
            raise self.fail("empty SMILES")
        prev: int | None = None
        pending_bond: BondOrder | None = None
        bond_pos = 0
        stack: list[int | None] = []
        while self.pos < len(t):
            ch = t[self.pos]
            if ch == "(":
                if prev is None:
                    raise self.fail("branch without preceding atom")
                stack.append(prev)
                self.pos += 1
                continue
            if ch == ")":
                if not stack:
                    raise self.fail("unmatched ')'")
                if pending_bond is not None:
                    raise self.fail("bond without following atom")
                prev = stack.pop()
                self.pos += 1
                continue
            if ch in _BOND_CHARS:
                if pending_bond is not None:
                    raise self.fail("two consecutive bonds")
                pending_bond, bond_pos = _BOND_CHARS[ch], self.pos
                self.pos += 1
                continue
            if ch == ".":
                if pending_bond is not None or stack:
                    raise self.fail("fragment separator inside branch or after bond")
                prev = None
                self.pos += 1
                continue
            if ch.isdigit() or ch == "%":
                if prev is None:
                    raise self.fail("ring closure without preceding atom")
                start = self.pos
                if ch == "%":
                    digits = t[self.pos + 1:self.pos + 3]
                    if len(digits) != 2 or not digits.isdigit():
                        raise self.fail("'%' must be followed by two digits")
                    num = int(digits)
                    self.pos += 3
                else:
                    num = int(ch)
                    self.pos += 1
                if num in self.open_rings:
                    other, order, slot_pos, _ = self.open_rings.pop(num)
                    if other == prev:
                        raise self.fail(f"ring closure {num} bonds an atom to itself", start)
                    if order is not None and pending_bond is not None and order != pending_bond:
                        raise self.fail(f"conflicting bond orders on ring closure {num}", start)
                    self.add_bond(other, prev, order if order is not None else pending_bond)
                    self.slots[other][slot_pos] = prev
                    self.slots[prev].append(other)
                else:
                    self.open_rings[num] = (prev, pending_bond, len(self.slots[prev]), start)
                    self.slots[prev].append(("ring", num))
                pending_bond = None
                continue
            atom_start = self.pos
            atom = self.read_atom()
            if atom is None:
                raise self.fail(f"unexpected character {ch!r}")
            idx = len(self.atoms)
            self.atoms.append(atom)
            self.atom_pos.append(atom_start)
            self.slots.append([])
            if prev is not None:
                self.add_bond(prev, idx, pending_bond)
                self.slots[prev].append(idx)
                self.slots[idx].append(prev)
            elif pending_bond is not None:
                raise self.fail("bond without preceding atom", bond_pos)
            if atom.get("hcount") and atom.get("chirality", Chirality.NONE) is not Chirality.NONE:
                self.slots[idx].append(IMPLICIT_H)
            pending_bond = None
            prev = idx
        if pending_bond is not None:
            raise self.fail("bond without following atom", bond_pos)
        if stack:
            raise self.fail("unclosed branch '('")
        if self.open_rings:
            num, (_, _, _, pos) = min(self.open_rings.items())
            raise self.fail(f"unclosed ring closure {num}", pos)
        if not self.atoms:
            raise self.fail("no atoms")
        return self.build()

    def build(self) -> Molecule:
        atoms = []
        for a, slots in zip(self.atoms, self.slots):
            chir = a.get("chirality", Chirality.NONE)
            order = tuple(slots) if chir is not Chirality.NONE else None  # type: ignore[arg-type]
            atoms.append(Atom(
                element=a["element"],
                charge=a.get("charge", 0),
                explicit_h=a.get("hcount", 0),
                isotope=a.get("isotope"),
                aromatic=a["aromatic"],
                chirality=chir,
                stereo_order=order,
                bracket=a["bracket"],
            ))
        bonds = []
        for u, v, order in self.bonds:
            if order is None:
                order = BondOrder.AROMATIC if atoms[u].aromatic and atoms[v].aromatic else BondOrder.SINGLE
            bonds.append(Bond(u, v, order))
        try:
            mol = build_molecule(atoms, bonds)
        except ValenceError as exc:
            where = self.atom_pos[exc.atom_index] if exc.atom_index is not None else 0
            raise ParseError(f"valence failure: {exc}", where, self.text) from exc
        except GraphError as exc:
            raise ParseError(f"invalid graph: {exc}", 0, self.text) from exc
        if self.dialect.strict_aromatic_lowercase:
            for i, a in enumerate(atoms):
                if a.aromatic and not mol.atoms[i].aromatic:
                    raise ParseError("lowercase atom is not in an aromatic ring", self.atom_pos[i], self.text)
        return mol


def parse_smiles(text: str | bytes, dialect: SmilesDialect = DEFAULT_DIALECT, *, name: str | None = None) -> Molecule:
    """Parse a SMILES string into a :class:`Molecule`.

    Raises:
        ParseError: malformed text, unknown element or valence failure; the
            ``position`` attribute holds the offending offset.
    """
    if isinstance(text, (bytes, bytearray)):
        try:
            text = bytes(text).decode("ascii")
        except UnicodeDecodeError as exc:
            raise ParseError("non-ASCII byte in SMILES", exc.start) from None
    text = text.strip()
    try:
        mol = _Parser(text, dialect).parse()
    except ParseError:
        raise
    except (ValueError, KeyError, IndexError, RecursionError) as exc:  # defensive: never leak internals
        raise ParseError(f"malformed SMILES: {exc}", 0, text) from exc
    return mol.with_name(name) if name is not None else mol


# ---------------------------------------------------------------------------
# writer
# ---------------------------------------------------------------------------

def _perm_parity(src: list[int], dst: list[int]) -> int:
    """Parity of the permutation taking sequence ``src`` to ``dst``."""
    pos = {v: i for i, v in enumerate(src)}
    seq = [pos[v] for v in dst]
    parity = 0
    seen = [False] * len(seq)
    for i in range(len(seq)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = seq[j]
            length += 1
        parity ^= (length - 1) & 1
    return parity


def _organic_default_h(m: Molecule, i: int) -> int | None:
    """Hydrogens a reader would assign to atom ``i`` written without brackets."""
    atom = m.atoms[i]
    allowed = elements.allowed_valences(atom.element, 0)
    if not allowed:
        return None
    sigma = 0
    for _, k in m.neighbors(i):
        o = m.bonds[k].order
        sigma += 1 if o == BondOrder.AROMATIC else int(o)
    if atom.aromatic and _needs_pi(dataclasses.replace(atom, bracket=False, charge=0, explicit_h=0), sigma):
        sigma += 1
    fits = [v for v in allowed if v >= sigma]
    return min(fits) - sigma if fits else None


def _atom_token(m: Molecule, i: int, chirality: Chirality) -> str:
    atom = m.atoms[i]
    sym = elements.symbol(atom.element)
    h = m.total_h(i)
    if (
        atom.element in elements.ORGANIC_SUBSET
        and atom.charge == 0
        and atom.isotope is None
        and chirality is Chirality.NONE
        and _organic_default_h(m, i) == h
    ):
        return sym.lower() if atom.aromatic else sym
    out = ["["]
    if atom.isotope is not None:
        out.append(str(atom.isotope))
    out.append(sym.lower() if atom.aromatic else sym)
    out.append(chirality.value)
    if h:
        out.append("H" if h == 1 else f"H{h}")
    if atom.charge:
        sign = "+" if atom.charge > 0 else "-"
        out.append(sign if abs(atom.charge) == 1 else f"{sign}{abs(atom.charge)}")
    out.append("]")
    return "".join(out)


def _bond_token(m: Molecule, k: int) -> str:
    b = m.bonds[k]
    if b.order == BondOrder.AROMATIC:
        return ""
    if b.order == BondOrder.SINGLE:
        return "-" if m.atoms[b.begin].aromatic and m.atoms[b.end].aromatic else ""
    return "=" if b.order == BondOrder.DOUBLE else "#"


def _ring_label(d: int) -> str:
    return str(d) if d < 10 else f"%{d}"


def write_canonical(m: Molecule, ranks: list[int] | None = None) -> str:
    """Canonical SMILES: identical text for any atom numbering of ``m``."""
    n = m.num_atoms
    if n == 0:
        return ""
    if ranks is None:
        ranks = canonical_ranks(m)
    limit = sys.getrecursionlimit()
    if n + 100 > limit:
        sys.setrecursionlimit(n + 200)

    by_rank = lambda j: ranks[j]  # noqa: E731
    visited = [False] * n
    children: list[list[tuple[int, int]]] = [[] for _ in range(n)]  # (child, bond)
    closures: list[list[tuple[int, int]]] = [[] for _ in range(n)]  # (partner, bond) in discovery order
    closure_bonds: set[int] = set()
    parent_bond = [-1] * n
    dfs_order: list[int] = []

    def dfs(v: int) -> None:
        visited[v] = True
        dfs_order.append(v)
        for w in sorted(m.neighbor_indices(v), key=by_rank):
            k = m.bond_index(v, w)
            if k == parent_bond[v]:
                continue
            if visited[w]:
                if k not in closure_bonds:
                    closure_bonds.add(k)
                    closures[w].append((v, k))
                    closures[v].append((w, k))
                continue
            parent_bond[w] = k
            children[v].append((w, k))
            dfs(w)

    roots = []
    for comp in sorted(m.components, key=lambda c: min(ranks[a] for a in c)):
        root = min(comp, key=by_rank)
        roots.append(root)
        dfs(root)
    position = {v: p for p, v in enumerate(dfs_order)}

    out: list[str] = []
    digit_of: dict[int, int] = {}  # closure bond -> digit
    in_use: set[int] = set()

    def emit(v: int, parent: int | None) -> None:
        # closures: partners already written are closings; others are openings
        closing = sorted((c for c in closures[v] if position[c[0]] < position[v]), key=lambda c: digit_of[c[1]])
        opening = sorted((c for c in closures[v] if position[c[0]] > position[v]), key=lambda c: ranks[c[0]])
        atom = m.atoms[v]
        chir = atom.chirality
        if chir is not Chirality.NONE and atom.stereo_order is not None:
            out_order: list[int] = []
            if parent is not None:
                out_order.append(parent)
            if IMPLICIT_H in atom.stereo_order:
                out_order.append(IMPLICIT_H)
            out_order += [p for p, _ in closing] + [p for p, _ in opening] + [c for c, _ in children[v]]
            if _perm_parity(list(atom.stereo_order), out_order):
                chir = chir.flipped()
        out.append(_atom_token(m, v, chir))
        freed = []
        for _, k in closing:
            d = digit_of[k]
            out.append(_ring_label(d))
            freed.append(d)
        for _, k in opening:
            d = 1
            while d in in_use:
                d += 1
            in_use.add(d)
            digit_of[k] = d
            out.append(_bond_token(m, k) + _ring_label(d))
        in_use.difference_update(freed)
        kids = children[v]
        for idx, (w, k) in enumerate(kids):
            last = idx == len(kids) - 1
            if not last:
                out.append("(")
            out.append(_bond_token(m, k))
            emit(w, v)
            if not last:
                out.append(")")

    for j, root in enumerate(roots):
        if j:
            out.append(".")
        emit(root, None)
    return "".join(out)


def canonicalize(text: str, dialect: SmilesDialect = DEFAULT_DIALECT) -> str:
    return write_canonical(parse_smiles(text, dialect))


# ---------------------------------------------------------------------------
# files
# ---------------------------------------------------------------------------

def iter_smiles_records(lines: Iterable[str]) -> Iterator[tuple[int, str, str]]:
    """Yield ``(line number, smiles, id)`` from ``SMILES<TAB>ID`` lines."""
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        if "\t" in line:
            smi, ident = line.split("\t", 1)
        else:
            parts = line.split(None, 1)
            smi, ident = parts[0], (parts[1] if len(parts) > 1 else "")
        yield lineno, smi.strip(), ident.strip() or f"line{lineno}"


def read_smiles_file(
    path: str | Path,
    dialect: SmilesDialect = DEFAULT_DIALECT,
    *,
    skip_invalid: bool = False,
) -> list[Molecule]:
    """Read a UTF-8 ``SMILES<TAB>ID`` file; molecules are named by ID.

    With ``skip_invalid`` unparseable records are dropped instead of raising.
    """
    mols = []
    with open(path, encoding="utf-8") as fh:
        for lineno, smi, ident in iter_smiles_records(fh):
            try:
                mols.append(parse_smiles(smi, dialect, name=ident))
            except ParseError as exc:
                if skip_invalid:
                    continue
                raise ParseError(f"line {lineno}: {exc.reason}", exc.position, smi) from exc
    return mols


def write_smiles_file(path: str | Path, records: Iterable[Molecule | tuple[str, str]]) -> None:
    """Write molecules (canonical SMILES) or ``(smiles, id)`` pairs."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for i, rec in enumerate(records):
            if isinstance(rec, Molecule):
                fh.write(f"{write_canonical(rec)}\t{rec.name or f'mol{i}'}\n")
            else:
                fh.write(f"{rec[0]}\t{rec[1]}\n")
