"""SMARTS-subset patterns and subgraph matching.

Supported atom primitives: element symbols (uppercase aliphatic, lowercase
aromatic), ``#n``, ``A``, ``a``, ``*``, ``H<n>``, ``D<n>``, ``X<n>``,
``R``/``R<n>``, ``r<n>``, charges (``+``, ``-``, ``+2``, ``--``, ``+0``),
combined with ``!``, implicit/explicit ``&``, ``,`` and low-precedence ``;``.
Bond primitives: ``- = # : ~ @`` with the same operators; an unspecified
bond matches single or aromatic. Recursive SMARTS and ``.`` are rejected.

Matching is backtracking over pattern atoms ordered rarest-first and then
by connectivity, so each new pattern atom is drawn from neighbors of an
already-mapped atom.
"""

from __future__ import annotations

import json
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

from molforge import elements
from molforge.errors import ParseError, SchemaError, UnsupportedFeature
from molforge.molgraph import BondOrder, Molecule

__all__ = [
    "Pattern",
    "Match",
    "Alert",
    "parse_pattern",
    "find_matches",
    "has_match",
    "count_matches",
    "load_catalog",
    "default_catalog",
    "match_alerts",
]

# Expression nodes are tuples: ("and", a, b), ("or", a, b), ("not", a), ("prim", kind, value)
Expr = tuple


@dataclass(frozen=True, slots=True)
class Pattern:
    """Parsed query graph; ``atoms[i]`` and ``bonds[k][2]`` are predicate trees."""

    text: str
    atoms: tuple[Expr, ...]
    bonds: tuple[tuple[int, int, Expr], ...]
    adjacency: tuple[tuple[tuple[int, int], ...], ...] = field(repr=False, default=())

    @property
    def num_atoms(self) -> int:
        return len(self.atoms)


@dataclass(frozen=True, slots=True, order=True)
class Match:
    """``mapping[i]`` is the molecule atom matched by pattern atom ``i``."""

    mapping: tuple[int, ...]

    @property
    def atoms(self) -> frozenset[int]:
        return frozenset(self.mapping)


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

_AROM_SYMBOLS = {"c": 6, "n": 7, "o": 8, "s": 16, "p": 15, "b": 5, "se": 34, "as": 33, "te": 52}
_ORGANIC_BARE = {"B": 5, "C": 6, "N": 7, "O": 8, "P": 15, "S": 16, "F": 9, "Cl": 17, "Br": 35, "I": 53}
_BOND_PRIMS = {"-": "single", "=": "double", "#": "triple", ":": "aromatic", "~": "any", "@": "ring",
               "/": "single", "\\": "single"}
_DEFAULT_BOND: Expr = ("or", ("prim", "bond", "single"), ("prim", "bond", "aromatic"))


class _PatternParser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def fail(self, reason: str, pos: int | None = None) -> ParseError:
        return ParseError(reason, self.pos if pos is None else pos, self.text)

    def peek(self, k: int = 0) -> str:
        i = self.pos + k
        return self.text[i] if i < len(self.text) else ""

    def read_int(self) -> int | None:
        start = self.pos
        while self.peek().isdigit():
            self.pos += 1
        return int(self.text[start:self.pos]) if self.pos > start else None

    # --- atom expressions inside [...] ------------------------------------
    def atom_expr(self) -> Expr:
        expr = self.or_expr()
        while self.peek() == ";":
            self.pos += 1
            expr = ("and", expr, self.or_expr())
        return expr

    def or_expr(self) -> Expr:
        expr = self.and_expr()
        while self.peek() == ",":
            self.pos += 1
            expr = ("or", expr, self.and_expr())
        return expr

    def and_expr(self) -> Expr:
        expr = self.unary(first=True)
        while True:
            ch = self.peek()
            if ch == "&":
                self.pos += 1
                expr = ("and", expr, self.unary(first=True))
            elif ch and ch not in ",;]:":
                expr = ("and", expr, self.unary(first=False))
            else:
                return expr

    def unary(self, first: bool) -> Expr:
        if self.peek() == "!":
            self.pos += 1
            return ("not", self.unary(first=True))
        return self.primitive(first)

    def primitive(self, first: bool) -> Expr:
        t, p = self.text, self.pos
        ch = self.peek()
        if not ch or ch in ",;&]":
            raise self.fail("expected atom primitive")
        if t.startswith("$(", p):
            raise UnsupportedFeature("recursive SMARTS is not supported", p, t)
        if ch == "@":
            raise UnsupportedFeature("stereo SMARTS is not supported", p, t)
        if ch == "#":
            self.pos += 1
            n = self.read_int()
            if n is None:
                raise self.fail("'#' must be followed by an atomic number")
            return ("prim", "z", n)
        if ch in "+-":
            sign = 1 if ch == "+" else -1
            self.pos += 1
            n = self.read_int()
            if n is None:
                n = 1
                while self.peek() == ch:
                    n += 1
                    self.pos += 1
            return ("prim", "charge", sign * n)
        if ch == "*":
            self.pos += 1
            return ("prim", "any", None)
        two = t[p:p + 2]
        if two in ("se", "as", "te"):
            self.pos += 2
            return ("prim", "elem", (_AROM_SYMBOLS[two], True))
        if ch == "H":
            self.pos += 1
            n = self.read_int()
            if first and n is None and self.peek() in ("]", "+", "-", ""):
                return ("prim", "z", 1)
            return ("prim", "hcount", 1 if n is None else n)
        if ch in "DXRr" and not (len(two) == 2 and two in elements.ATOMIC_NUMBERS):
            self.pos += 1
            n = self.read_int()
            kind = {"D": "degree", "X": "connect", "R": "rings", "r": "ringsize"}[ch]
            if n is None:
                if ch == "r":
                    raise self.fail("'r' requires a ring size")
                return ("prim", "inring", True) if ch == "R" else ("prim", kind, 1)
            if ch == "R" and n == 0:
                return ("prim", "inring", False)
            return ("prim", kind, n)
        if len(two) == 2 and two[0].isupper() and two[1].islower() and two in elements.ATOMIC_NUMBERS:
            self.pos += 2
            return ("prim", "elem", (elements.ATOMIC_NUMBERS[two], False))
        if ch == "A":
            self.pos += 1
            return ("prim", "aromatic", False)
        if ch == "a":
            self.pos += 1
            return ("prim", "aromatic", True)
        if ch in _AROM_SYMBOLS:
            self.pos += 1
            return ("prim", "elem", (_AROM_SYMBOLS[ch], True))
        if ch in elements.ATOMIC_NUMBERS:
            self.pos += 1
            return ("prim", "elem", (elements.ATOMIC_NUMBERS[ch], False))
        if ch in "hvx^":
            raise UnsupportedFeature(f"primitive {ch!r} is not supported", p, t)
        raise self.fail(f"unknown atom primitive {ch!r}")

    def bracket_atom(self) -> Expr:
        self.pos += 1
        expr = self.atom_expr()
        if self.peek() == ":":  # atom map number
            self.pos += 1
            if self.read_int() is None:
                raise self.fail("atom map requires a number")
        if self.peek() != "]":
            raise self.fail("expected ']'")
        self.pos += 1
        return expr

    def bare_atom(self) -> Expr | None:
        t, p = self.text, self.pos
        two = t[p:p + 2]
        if two in ("Cl", "Br"):
            self.pos += 2
            return ("prim", "elem", (_ORGANIC_BARE[two], False))
        ch = self.peek()
        if ch in _ORGANIC_BARE:
            self.pos += 1
            return ("prim", "elem", (_ORGANIC_BARE[ch], False))
        if ch in ("c", "n", "o", "s", "p", "b"):
            self.pos += 1
            return ("prim", "elem", (_AROM_SYMBOLS[ch], True))
        if ch == "*":
            self.pos += 1
            return ("prim", "any", None)
        if ch == "A":
            self.pos += 1
            return ("prim", "aromatic", False)
        if ch == "a":
            self.pos += 1
            return ("prim", "aromatic", True)
        return None

    # --- bonds ----------------------------------------------------------------
    def bond_expr(self) -> Expr | None:
        if not self.peek() or self.peek() not in "-=#:~@!/\\":
            return None
        return self.bond_low()

    def bond_low(self) -> Expr:
        expr = self.bond_or()
        while self.peek() == ";":
            self.pos += 1
            expr = ("and", expr, self.bond_or())
        return expr

    def bond_or(self) -> Expr:
        expr = self.bond_and()
        while self.peek() == ",":
            self.pos += 1
            expr = ("or", expr, self.bond_and())
        return expr

    def bond_and(self) -> Expr:
        expr = self.bond_unary()
        while True:
            ch = self.peek()
            if ch == "&":
                self.pos += 1
                expr = ("and", expr, self.bond_unary())
            elif ch and ch in "-=#:~@!/\\":
                expr = ("and", expr, self.bond_unary())
            else:
                return expr

    def bond_unary(self) -> Expr:
        if self.peek() == "!":
            self.pos += 1
            return ("not", self.bond_unary())
        ch = self.peek()
        if ch not in _BOND_PRIMS:
            raise self.fail("expected bond primitive")
        self.pos += 1
        return ("prim", "bond", _BOND_PRIMS[ch])

    # --- graph ----------------------------------------------------------------
    def parse(self) -> Pattern:
        t = self.text
        if not t:
            raise self.fail("empty pattern")
        atoms: list[Expr] = []
        bonds: list[tuple[int, int, Expr]] = []
        prev: int | None = None
        stack: list[int] = []
        rings: dict[int, tuple[int, Expr | None, int]] = {}
        pending: Expr | None = None
        while self.pos < len(t):
            ch = self.peek()
            if ch == "(":
                if prev is None:
                    raise self.fail("branch without preceding atom")
                stack.append(prev)
                self.pos += 1
                continue
            if ch == ")":
                if not stack or pending is not None:
                    raise self.fail("unbalanced ')'")
                prev = stack.pop()
                self.pos += 1
                continue
            if ch == ".":
                raise UnsupportedFeature("disconnected patterns are not supported", self.pos, t)
            if ch.isdigit() or ch == "%":
                if prev is None:
                    raise self.fail("ring closure without preceding atom")
                start = self.pos
                if ch == "%":
                    digits = t[self.pos + 1:self.pos + 3]
                    if len(digits) != 2 or not digits.isdigit():
                        raise self.fail("'%' must be followed by two digits")
                    num, self.pos = int(digits), self.pos + 3
                else:
                    num, self.pos = int(ch), self.pos + 1
                if num in rings:
                    other, bexpr, _ = rings.pop(num)
                    if other == prev:
                        raise self.fail("ring closure to the same atom", start)
                    chosen = bexpr if bexpr is not None else pending
                    bonds.append((other, prev, chosen if chosen is not None else _DEFAULT_BOND))
                else:
                    rings[num] = (prev, pending, start)
                pending = None
                continue
            bexpr = self.bond_expr()
            if bexpr is not None:
                if pending is not None:
                    raise self.fail("two consecutive bonds")
                pending = bexpr
                continue
            if ch == "[":
                expr = self.bracket_atom()
            else:
                expr = self.bare_atom()
                if expr is None:
                    raise self.fail(f"unexpected character {ch!r}")
            idx = len(atoms)
            atoms.append(expr)
            if prev is not None:
                bonds.append((prev, idx, pending if pending is not None else _DEFAULT_BOND))
            elif pending is not None:
                raise self.fail("bond without preceding atom")
            pending = None
            prev = idx
        if pending is not None:
            raise self.fail("bond without following atom")
        if stack:
            raise self.fail("unclosed branch")
        if rings:
            num, (_, _, pos) = min(rings.items())
            raise self.fail(f"unclosed ring closure {num}", pos)
        seen = set()
        for u, v, _ in bonds:
            key = (min(u, v), max(u, v))
            if key in seen:
                raise self.fail("duplicate bond in pattern")
            seen.add(key)
        adj: list[list[tuple[int, int]]] = [[] for _ in atoms]
        for k, (u, v, _) in enumerate(bonds):
            adj[u].append((v, k))
            adj[v].append((u, k))
        return Pattern(t, tuple(atoms), tuple(bonds), tuple(tuple(a) for a in adj))


@lru_cache(maxsize=4096)
def parse_pattern(text: str) -> Pattern:
    """Parse a SMARTS-subset pattern.

    Raises:
        UnsupportedFeature: recursive SMARTS, stereo or ``.`` components.
        ParseError: any other malformed input.
    """
    text = text.strip()
    try:
        return _PatternParser(text).parse()
    except ParseError:
        raise
    except (ValueError, KeyError, IndexError, RecursionError) as exc:
        raise ParseError(f"malformed pattern: {exc}", 0, text) from exc


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class _AtomView:
    element: int
    aromatic: bool
    charge: int
    hcount: int
    degree: int
    connect: int
    rings: int
    ring_sizes: frozenset[int]


def atom_views(m: Molecule) -> tuple[_AtomView, ...]:
    cached = m.__dict__.get("_atom_views")
    if cached is not None:
        return cached
    sizes: list[set[int]] = [set() for _ in range(m.num_atoms)]
    for ring in m.rings:
        for a in ring:
            sizes[a].add(len(ring))
    views = tuple(
        _AtomView(
            element=a.element,
            aromatic=a.aromatic,
            charge=a.charge,
            hcount=m.total_h(i),
            degree=m.degree(i),
            connect=m.degree(i) + m.total_h(i),
            rings=m.atom_ring_count[i],
            ring_sizes=frozenset(sizes[i]),
        )
        for i, a in enumerate(m.atoms)
    )
    m.__dict__["_atom_views"] = views  # memoise on the immutable molecule
    return views


def eval_atom(expr: Expr, v: _AtomView) -> bool:
    op = expr[0]
    if op == "and":
        return eval_atom(expr[1], v) and eval_atom(expr[2], v)
    if op == "or":
        return eval_atom(expr[1], v) or eval_atom(expr[2], v)
    if op == "not":
        return not eval_atom(expr[1], v)
    kind, val = expr[1], expr[2]
    if kind == "elem":
        return v.element == val[0] and v.aromatic == val[1]
    if kind == "z":
        return v.element == val
    if kind == "aromatic":
        return v.aromatic == val
    if kind == "any":
        return True
    if kind == "charge":
        return v.charge == val
    if kind == "hcount":
        return v.hcount == val
    if kind == "degree":
        return v.degree == val
    if kind == "connect":
        return v.connect == val
    if kind == "inring":
        return (v.rings > 0) == val
    if kind == "rings":
        return v.rings == val
    if kind == "ringsize":
        return val in v.ring_sizes
    raise ValueError(f"unknown primitive {kind}")


def eval_bond(expr: Expr, order: BondOrder, in_ring: bool) -> bool:
    op = expr[0]
    if op == "and":
        return eval_bond(expr[1], order, in_ring) and eval_bond(expr[2], order, in_ring)
    if op == "or":
        return eval_bond(expr[1], order, in_ring) or eval_bond(expr[2], order, in_ring)
    if op == "not":
        return not eval_bond(expr[1], order, in_ring)
    val = expr[2]
    if val == "any":
        return True
    if val == "ring":
        return in_ring
    return order == {"single": BondOrder.SINGLE, "double": BondOrder.DOUBLE,
                     "triple": BondOrder.TRIPLE, "aromatic": BondOrder.AROMATIC}[val]


def atom_candidates(p: Pattern, m: Molecule) -> list[list[int]]:
    views = atom_views(m)
    return [[j for j, v in enumerate(views) if eval_atom(expr, v)] for expr in p.atoms]


def _search_order(p: Pattern, cands: list[list[int]]) -> list[int]:
    n = p.num_atoms
    order = [min(range(n), key=lambda i: (len(cands[i]), i))]
    placed = {order[0]}
    while len(order) < n:
        frontier = {j for i in placed for j, _ in p.adjacency[i] if j not in placed}
        nxt = min(frontier, key=lambda i: (len(cands[i]), i))
        order.append(nxt)
        placed.add(nxt)
    return order


def iter_mappings(p: Pattern, m: Molecule) -> Iterator[tuple[int, ...]]:
    """Yield every injective mapping satisfying all atom and bond predicates."""
    if p.num_atoms == 0 or m.num_atoms == 0:
        return
    cands = atom_candidates(p, m)
    if any(not c for c in cands):
        return
    cand_sets = [set(c) for c in cands]
    order = _search_order(p, cands)
    pos_of = {a: i for i, a in enumerate(order)}
    # for each step, the earlier-placed pattern neighbors and the bond predicate to check
    back: list[list[tuple[int, Expr]]] = []
    for i, a in enumerate(order):
        back.append([(b, p.bonds[k][2]) for b, k in p.adjacency[a] if pos_of[b] < i])
    ring_bonds = m.ring_bonds
    mapping = [-1] * p.num_atoms
    used: set[int] = set()

    def extend(step: int) -> Iterator[tuple[int, ...]]:
        if step == len(order):
            yield tuple(mapping)
            return
        a = order[step]
        if back[step]:
            anchor = mapping[back[step][0][0]]
            pool = [j for j in m.neighbor_indices(anchor) if j in cand_sets[a]]
        else:
            pool = cands[a]
        for j in pool:
            if j in used:
                continue
            ok = True
            for b, bexpr in back[step]:
                k = m.bond_index(j, mapping[b])
                if k is None or not eval_bond(bexpr, m.bonds[k].order, k in ring_bonds):
                    ok = False
                    break
            if not ok:
                continue
            mapping[a] = j
            used.add(j)
            yield from extend(step + 1)
            used.discard(j)
            mapping[a] = -1

    yield from extend(0)


def _as_pattern(p: Pattern | str) -> Pattern:
    return parse_pattern(p) if isinstance(p, str) else p


def find_matches(p: Pattern | str, m: Molecule, limit: int | None = None, *, unique: bool = True) -> list[Match]:
    """All matches in lexicographic order of mapping, truncated to ``limit``.

    With ``unique`` (default) matches covering the same atom set collapse to
    the lexicographically smallest mapping, so a symmetric group fires once.
    """
    p = _as_pattern(p)
    if unique:
        best: dict[frozenset[int], tuple[int, ...]] = {}
        for mp in iter_mappings(p, m):
            key = frozenset(mp)
            if key not in best or mp < best[key]:
                best[key] = mp
        found = sorted(best.values())
    else:
        found = sorted(iter_mappings(p, m))
    if limit is not None:
        found = found[:limit]
    return [Match(mp) for mp in found]


def has_match(p: Pattern | str, m: Molecule) -> bool:
    return next(iter_mappings(_as_pattern(p), m), None) is not None


def count_matches(p: Pattern | str, m: Molecule) -> int:
    return len(find_matches(p, m))


# ---------------------------------------------------------------------------
# alert catalogs
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class Alert:
    """Named pattern with a severity.

    ``exclude`` patterns veto individual sites: a match of ``smarts`` whose
    atoms all lie inside some match of an exclude pattern is not counted
    (e.g. a hydrazine that is really an acyl hydrazide).
    """

    name: str
    smarts: str
    severity: str
    description: str = ""
    exclude: tuple[str, ...] = ()

    @property
    def pattern(self) -> Pattern:
        return parse_pattern(self.smarts)

    def sites(self, m: Molecule) -> list[Match]:
        found = find_matches(self.pattern, m)
        if not found or not self.exclude:
            return found
        vetoes = [mt.atoms for ex in self.exclude for mt in find_matches(ex, m)]
        return [mt for mt in found if not any(mt.atoms <= v for v in vetoes)]

    def to_dict(self) -> dict:
        out = {"name": self.name, "smarts": self.smarts, "severity": self.severity, "description": self.description}
        if self.exclude:
            out["exclude"] = list(self.exclude)
        return out


def _alerts_from_json(data: object, source: str) -> list[Alert]:
    if not isinstance(data, list):
        raise SchemaError(f"{source}: alert catalog must be a JSON list")
    out = []
    for i, row in enumerate(data):
        if not isinstance(row, dict) or not {"name", "smarts", "severity"} <= row.keys():
            raise SchemaError(f"{source}: entry {i} needs name, smarts and severity")
        if row["severity"] not in ("hard", "soft"):
            raise SchemaError(f"{source}: entry {i} severity must be 'hard' or 'soft'")
        exclude = row.get("exclude", ())
        if isinstance(exclude, str):
            exclude = (exclude,)
        alert = Alert(str(row["name"]), str(row["smarts"]), row["severity"], str(row.get("description", "")),
                      tuple(str(x) for x in exclude))
        alert.pattern  # validate eagerly
        for ex in alert.exclude:
            parse_pattern(ex)
        out.append(alert)
    return out


def load_catalog(path: str | Path) -> list[Alert]:
    """Read an alert catalog: a JSON list of ``{name, smarts, severity, description}``
    objects, each optionally carrying an ``exclude`` SMARTS list."""
    with open(path, encoding="utf-8") as fh:
        return _alerts_from_json(json.load(fh), str(path))


@lru_cache(maxsize=1)
def _default_catalog() -> tuple[Alert, ...]:
    text = resources.files("molforge").joinpath("data/alerts.json").read_text(encoding="utf-8")
    return tuple(_alerts_from_json(json.loads(text), "alerts.json"))


def default_catalog() -> list[Alert]:
    """The shipped hard/soft alert catalog."""
    return list(_default_catalog())


def match_alerts(m: Molecule, alerts: Sequence[Alert]) -> list[tuple[Alert, int]]:
    """``(alert, number of distinct sites)`` for every alert that fires."""
    hits = []
    for alert in alerts:
        n = len(alert.sites(m))
        if n:
            hits.append((alert, n))
    return hits
