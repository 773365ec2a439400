"""Immutable molecular graph and its construction pipeline.

``build_molecule`` is the only way to obtain a :class:`Molecule`. It
validates connectivity, assigns a Kekulé structure to bonds given as
aromatic, fills implicit hydrogens from the valence table, perceives rings
(SSSR) and re-perceives aromaticity with a Hückel ring model, so that a
Kekulé input and its aromatic spelling yield identical molecules.
"""

from __future__ import annotations

import dataclasses
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from functools import cached_property

from molforge import elements
from molforge.errors import GraphError, KekulizeError, ValenceError
from molforge.molgraph.rings import find_bridges, sssr


class BondOrder(IntEnum):
    SINGLE = 1
    DOUBLE = 2
    TRIPLE = 3
    AROMATIC = 4

    @classmethod
    def coerce(cls, value: object) -> BondOrder:
        if isinstance(value, BondOrder):
            return value
        if value == 1.5:
            return cls.AROMATIC
        if isinstance(value, str):
            return cls[value.upper()]
        return cls(int(value))  # type: ignore[arg-type]


class Chirality(Enum):
    """Tetrahedral parity as written in SMILES: looking from the first
    neighbor of ``Atom.stereo_order``, the rest run counter-clockwise (``@``)
    or clockwise (``@@``)."""

    NONE = ""
    CCW = "@"
    CW = "@@"

    def flipped(self) -> Chirality:
        if self is Chirality.CCW:
            return Chirality.CW
        if self is Chirality.CW:
            return Chirality.CCW
        return self


IMPLICIT_H = -1  # placeholder for the implicit hydrogen / lone pair in stereo_order


@dataclass(frozen=True, slots=True)
class Atom:
    """One heavy atom.

    ``bracket`` atoms carry exactly ``explicit_h`` hydrogens; otherwise the
    valence model adds implicit hydrogens on top of ``explicit_h``.
    ``aromatic`` is an input hint; after construction it reflects perception.
    """

    element: int
    charge: int = 0
    explicit_h: int = 0
    isotope: int | None = None
    aromatic: bool = False
    chirality: Chirality = Chirality.NONE
    stereo_order: tuple[int, ...] | None = None
    bracket: bool = False

    @property
    def symbol(self) -> str:
        return elements.symbol(self.element)


@dataclass(frozen=True, slots=True)
class Bond:
    begin: int
    end: int
    order: BondOrder = BondOrder.SINGLE

    @property
    def pair(self) -> tuple[int, int]:
        return (self.begin, self.end) if self.begin < self.end else (self.end, self.begin)

    def other(self, idx: int) -> int:
        return self.end if idx == self.begin else self.begin


@dataclass(frozen=True, eq=False)
class Molecule:
    atoms: tuple[Atom, ...]
    bonds: tuple[Bond, ...]
    kekule: tuple[int, ...]
    implicit_h: tuple[int, ...]
    rings: tuple[tuple[int, ...], ...]
    name: str | None = None
    _adj: tuple[tuple[tuple[int, int], ...], ...] = field(default=(), repr=False)

    # --- basic topology -------------------------------------------------
    @property
    def num_atoms(self) -> int:
        return len(self.atoms)

    @property
    def num_bonds(self) -> int:
        return len(self.bonds)

    def __len__(self) -> int:
        return len(self.atoms)

    def neighbors(self, i: int) -> tuple[tuple[int, int], ...]:
        """``(neighbor index, bond index)`` pairs, ascending by neighbor."""
        return self._adj[i]

    def neighbor_indices(self, i: int) -> list[int]:
        return [j for j, _ in self._adj[i]]

    def degree(self, i: int) -> int:
        return len(self._adj[i])

    def total_h(self, i: int) -> int:
        return self.atoms[i].explicit_h + self.implicit_h[i]

    def valence(self, i: int) -> int:
        return sum(self.kekule[k] for _, k in self._adj[i]) + self.total_h(i)

    @cached_property
    def _bond_lookup(self) -> dict[tuple[int, int], int]:
        return {b.pair: k for k, b in enumerate(self.bonds)}

    def bond_index(self, i: int, j: int) -> int | None:
        return self._bond_lookup.get((i, j) if i < j else (j, i))

    def bond_between(self, i: int, j: int) -> Bond | None:
        k = self.bond_index(i, j)
        return None if k is None else self.bonds[k]

    # --- rings ------------------------------------------------------------
    @cached_property
    def ring_bonds(self) -> frozenset[int]:
        out = set()
        for ring in self.rings:
            for a, b in zip(ring, ring[1:] + ring[:1]):
                out.add(self.bond_index(a, b))
        return frozenset(out)

    @cached_property
    def atom_ring_count(self) -> tuple[int, ...]:
        counts = [0] * self.num_atoms
        for ring in self.rings:
            for a in ring:
                counts[a] += 1
        return tuple(counts)

    def is_ring_atom(self, i: int) -> bool:
        return self.atom_ring_count[i] > 0

    def is_ring_bond(self, k: int) -> bool:
        return k in self.ring_bonds

    @cached_property
    def ring_sizes(self) -> tuple[int, ...]:
        return tuple(sorted(len(r) for r in self.rings))

    # --- fragments ----------------------------------------------------------
    @cached_property
    def components(self) -> tuple[tuple[int, ...], ...]:
        seen = [False] * self.num_atoms
        comps = []
        for start in range(self.num_atoms):
            if seen[start]:
                continue
            stack = [start]
            seen[start] = True
            comp = []
            while stack:
                v = stack.pop()
                comp.append(v)
                for w, _ in self._adj[v]:
                    if not seen[w]:
                        seen[w] = True
                        stack.append(w)
            comps.append(tuple(sorted(comp)))
        return tuple(comps)

    @property
    def is_multifragment(self) -> bool:
        return len(self.components) > 1

    def with_name(self, name: str | None) -> Molecule:
        return dataclasses.replace(self, name=name)

    def __repr__(self) -> str:
        label = f" {self.name!r}" if self.name else ""
        return f"<Molecule{label} atoms={self.num_atoms} bonds={self.num_bonds}>"


# ---------------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------------

BondSpec = Bond | tuple[int, int] | tuple[int, int, object]


def _coerce_bond(spec: BondSpec) -> Bond:
    if isinstance(spec, Bond):
        return Bond(spec.begin, spec.end, BondOrder.coerce(spec.order))
    if len(spec) == 2:
        return Bond(int(spec[0]), int(spec[1]), BondOrder.SINGLE)
    return Bond(int(spec[0]), int(spec[1]), BondOrder.coerce(spec[2]))


def refine_classes(keys: Sequence, nbrs: Sequence[Sequence[tuple[int, int]]]) -> list[int]:
    """Iterative neighborhood refinement (Morgan-style).

    ``keys`` are comparable initial invariants, ``nbrs[i]`` lists
    ``(bond label, neighbor)``. Returns dense class ids ordered by invariant.
    """
    ranks = _dense(keys)
    n_classes = len(set(ranks))
    while True:
        new_keys = [(ranks[i], tuple(sorted((lbl, ranks[j]) for lbl, j in nbrs[i]))) for i in range(len(ranks))]
        new = _dense(new_keys)
        n_new = len(set(new))
        if n_new == n_classes:
            return new
        ranks, n_classes = new, n_new


def _dense(keys: Sequence) -> list[int]:
    order = {k: r for r, k in enumerate(sorted(set(keys)))}
    return [order[k] for k in keys]


def break_ties(ranks: list[int], nbrs: Sequence[Sequence[tuple[int, int]]], choose=None) -> list[int]:
    """Split tied classes one atom at a time until every rank is unique.

    ``choose(ranks, members)`` picks the atom to promote from the lowest tied
    class; by default the lowest index.
    """
    n = len(ranks)
    while len(set(ranks)) < n:
        counts: dict[int, list[int]] = {}
        for i, r in enumerate(ranks):
            counts.setdefault(r, []).append(i)
        tied = min(r for r, members in counts.items() if len(members) > 1)
        members = counts[tied]
        pick = members[0] if choose is None else choose(ranks, members)
        ranks = refine_classes([(r, 0 if i == pick else 1) for i, r in enumerate(ranks)], nbrs)
    return ranks


def _needs_pi(atom: Atom, sigma: int) -> bool:
    allowed = elements.allowed_valences(atom.element, atom.charge)
    if not allowed:
        return False
    if atom.bracket:
        return sigma not in allowed and (sigma + 1) in allowed
    fits = [v for v in allowed if v >= sigma]
    return bool(fits) and min(fits) - sigma >= 1


def _perfect_matching(nodes: list[int], adj: dict[int, list[tuple[int, int]]], order: Sequence[int]) -> dict[int, int] | None:
    """Match every node along allowed edges; returns node -> edge index."""
    matched: dict[int, int] = {}
    partner: dict[int, int] = {}

    def options(u: int) -> list[tuple[int, int]]:
        return [(v, k) for v, k in adj.get(u, ()) if v not in partner]

    def solve() -> bool:
        free = [u for u in nodes if u not in partner]
        if not free:
            return True
        u = min(free, key=lambda x: (len(options(x)), order[x], x))
        for v, k in sorted(options(u), key=lambda vk: (order[vk[0]], vk[0])):
            partner[u], partner[v] = v, u
            matched[u] = matched[v] = k
            if solve():
                return True
            del partner[u], partner[v], matched[u], matched[v]
        return False

    return matched if solve() else None


def _kekulize(atoms: Sequence[Atom], bonds: Sequence[Bond], adj, ring_bond_set: set[int]) -> list[int]:
    kek = [int(b.order) if b.order != BondOrder.AROMATIC else 1 for b in bonds]
    arom_ring = [k for k, b in enumerate(bonds) if b.order == BondOrder.AROMATIC and k in ring_bond_set]
    if not arom_ring:
        return kek

    sigma = [a.explicit_h for a in atoms]
    for k, b in enumerate(bonds):
        sigma[b.begin] += kek[k]
        sigma[b.end] += kek[k]
    on_arom = sorted({a for k in arom_ring for a in (bonds[k].begin, bonds[k].end)})
    need = [i for i in on_arom if _needs_pi(atoms[i], sigma[i])]
    need_set = set(need)
    madj: dict[int, list[tuple[int, int]]] = {}
    for k in arom_ring:
        u, v = bonds[k].begin, bonds[k].end
        if u in need_set and v in need_set:
            madj.setdefault(u, []).append((v, k))
            madj.setdefault(v, []).append((u, k))

    # canonical-order hint so the chosen Kekulé form does not depend on input numbering
    keys = [(a.element, a.charge, a.aromatic, a.explicit_h, len(adj[i])) for i, a in enumerate(atoms)]
    nbrs = [[(int(bonds[k].order), j) for j, k in adj[i]] for i in range(len(atoms))]
    order = break_ties(refine_classes(keys, nbrs), nbrs)

    matching = _perfect_matching(need, madj, order)
    if matching is None:
        raise KekulizeError("cannot assign alternating bonds to aromatic system", atom_index=need[0] if need else None)
    for k in set(matching.values()):
        kek[k] = 2
    return kek


_LONE_PAIR_DONORS = {elements.N, elements.P, 33}
_CHALCOGENS = {elements.O, elements.S, elements.SE, 52}
_ELECTRONEGATIVE = {elements.N, elements.O, elements.S}


def _pi_electrons(i: int, atoms, adj, kek, total_h, ring_bond_set) -> int | None:
    """Electrons atom ``i`` donates to a ring pi system, or None if it cannot take part."""
    atom = atoms[i]
    if atom.element not in elements.AROMATIC_CAPABLE:
        return None
    doubles = []
    for j, k in adj[i]:
        if kek[k] == 3:
            return None
        if kek[k] == 2:
            doubles.append((j, k))
    if len(doubles) > 1:
        return None
    if doubles:
        j, k = doubles[0]
        if k in ring_bond_set:
            return 1
        if atoms[j].element in _ELECTRONEGATIVE and atom.element == elements.C:
            return 0
        return None
    conn = len(adj[i]) + total_h[i]
    q = atom.charge
    if atom.element == elements.C:
        return {-1: 2, 1: 0}.get(q) if conn == 3 else None
    if atom.element in _LONE_PAIR_DONORS:
        if (q == 0 and conn == 3) or (q == -1 and conn == 2):
            return 2
        return None
    if atom.element in _CHALCOGENS:
        return 2 if q == 0 and conn == 2 else None
    if atom.element == elements.B:
        return 0 if q == 0 and conn == 3 else None
    return None


def _ring_bonds_of(ring: tuple[int, ...], bond_of) -> list[int]:
    return [bond_of[(a, b) if a < b else (b, a)] for a, b in zip(ring, ring[1:] + ring[:1])]


def _perceive_aromaticity(atoms, adj, kek, total_h, rings, ring_bond_set, bond_of) -> tuple[set[int], set[int]]:
    """Hückel 4n+2 test on each SSSR ring, then on fused groups of candidate rings."""
    if not rings:
        return set(), set()
    ring_atoms = {a for r in rings for a in r}
    contrib = {i: _pi_electrons(i, atoms, adj, kek, total_h, ring_bond_set) for i in ring_atoms}
    cand = [r for r in rings if all(contrib[a] is not None for a in r)]
    ring_bond_lists = {r: _ring_bonds_of(r, bond_of) for r in cand}

    def huckel(atom_set) -> bool:
        return sum(contrib[a] for a in atom_set) % 4 == 2

    aromatic_rings = {r for r in cand if huckel(r)}

    # fused groups: candidate rings sharing a bond
    groups: list[list[tuple[int, ...]]] = []
    unassigned = list(cand)
    while unassigned:
        group = [unassigned.pop(0)]
        bonds_in = set(ring_bond_lists[group[0]])
        grew = True
        while grew:
            grew = False
            for r in list(unassigned):
                if bonds_in & set(ring_bond_lists[r]):
                    group.append(r)
                    bonds_in |= set(ring_bond_lists[r])
                    unassigned.remove(r)
                    grew = True
        groups.append(group)
    for group in groups:
        pending = [r for r in group if r not in aromatic_rings]
        if not pending or len(group) < 2:
            continue
        for r in pending:
            for s in group:
                if s is r or not (set(ring_bond_lists[r]) & set(ring_bond_lists[s])):
                    continue
                if huckel(set(r) | set(s)):
                    aromatic_rings.update((r, s))
        if any(r not in aromatic_rings for r in group):
            if huckel({a for r in group for a in r}):
                aromatic_rings.update(group)

    arom_atoms: set[int] = set()
    arom_bonds: set[int] = set()
    for r in aromatic_rings:
        arom_atoms.update(r)
        arom_bonds.update(ring_bond_lists[r])
    return arom_atoms, arom_bonds


def _resolve_stereo(atom: Atom, idx: int, adj, total_h: int) -> Atom:
    if atom.chirality is Chirality.NONE:
        return atom if atom.stereo_order is None else dataclasses.replace(atom, stereo_order=None)
    nbrs = [j for j, _ in adj[idx]]
    expected = sorted(nbrs + ([IMPLICIT_H] if total_h == 1 else []))
    if total_h > 1 or len(expected) < 3 or len(expected) > 4:
        return dataclasses.replace(atom, chirality=Chirality.NONE, stereo_order=None)
    order = atom.stereo_order
    if order is None:
        order = tuple(([IMPLICIT_H] if total_h == 1 else []) + nbrs)
    if sorted(order) != expected:
        return dataclasses.replace(atom, chirality=Chirality.NONE, stereo_order=None)
    return dataclasses.replace(atom, stereo_order=tuple(order))


def build_molecule(
    atoms: Sequence[Atom],
    bonds: Iterable[BondSpec],
    *,
    name: str | None = None,
    strict: bool = True,
) -> Molecule:
    """Validate and perceive a molecular graph.

    Bonds may be ``Bond`` objects or ``(i, j[, order])`` tuples; orders are
    1/2/3, ``BondOrder`` members or 4/1.5 for aromatic. With ``strict=False``
    valence violations are tolerated (implicit H clamps at zero); used for
    genericized scaffolds.

    Raises:
        GraphError: bad index, self-loop or duplicate bond.
        ValenceError: an atom's valence is not in its allowed list.
        KekulizeError: aromatic bonds cannot be assigned a Kekulé form.
    """
    atoms = list(atoms)
    bond_list = [_coerce_bond(b) for b in bonds]
    n = len(atoms)
    seen: dict[tuple[int, int], int] = {}
    for k, b in enumerate(bond_list):
        if not (0 <= b.begin < n and 0 <= b.end < n):
            raise GraphError(f"bond {k} references atom outside 0..{n - 1}")
        if b.begin == b.end:
            raise GraphError(f"bond {k} is a self-loop on atom {b.begin}")
        if b.pair in seen:
            raise GraphError(f"duplicate bond between atoms {b.pair[0]} and {b.pair[1]}")
        seen[b.pair] = k
    for i, a in enumerate(atoms):
        if not 0 <= a.element <= 118:
            raise GraphError(f"atom {i} has invalid atomic number {a.element}")

    adj_lists: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for k, b in enumerate(bond_list):
        adj_lists[b.begin].append((b.end, k))
        adj_lists[b.end].append((b.begin, k))
    for lst in adj_lists:
        lst.sort()
    adj = tuple(tuple(lst) for lst in adj_lists)

    edges = [(b.begin, b.end) for b in bond_list]
    bridges = find_bridges(n, edges)
    ring_bond_set = {k for k in range(len(bond_list)) if k not in bridges}

    kek = _kekulize(atoms, bond_list, adj, ring_bond_set)

    implicit = [0] * n
    for i, a in enumerate(atoms):
        sigma = a.explicit_h + sum(kek[k] for _, k in adj[i])
        allowed = elements.allowed_valences(a.element, a.charge)
        if allowed is None:
            continue
        if a.bracket:
            if strict and sigma not in allowed:
                raise ValenceError(
                    f"atom {i} ({a.symbol}{a.charge:+d}) has valence {sigma}, allowed {list(allowed)}",
                    atom_index=i,
                )
            continue
        fits = [v for v in allowed if v >= sigma]
        if not fits:
            if strict:
                raise ValenceError(
                    f"atom {i} ({a.symbol}{a.charge:+d}) has valence {sigma}, allowed {list(allowed)}",
                    atom_index=i,
                )
            continue
        implicit[i] = min(fits) - sigma

    total_h = [a.explicit_h + implicit[i] for i, a in enumerate(atoms)]
    rings = sssr(n, edges)
    bond_of = {b.pair: k for k, b in enumerate(bond_list)}
    arom_atoms, arom_bonds = _perceive_aromaticity(atoms, adj, kek, total_h, rings, ring_bond_set, bond_of)

    final_atoms = []
    for i, a in enumerate(atoms):
        a = dataclasses.replace(a, aromatic=i in arom_atoms)
        final_atoms.append(_resolve_stereo(a, i, adj, total_h[i]))
    final_bonds = tuple(
        Bond(b.begin, b.end, BondOrder.AROMATIC if k in arom_bonds else BondOrder(kek[k]))
        for k, b in enumerate(bond_list)
    )
    return Molecule(
        atoms=tuple(final_atoms),
        bonds=final_bonds,
        kekule=tuple(kek),
        implicit_h=tuple(implicit),
        rings=tuple(rings),
        name=name,
        _adj=adj,
    )


def kekule_bonds(m: Molecule) -> list[Bond]:
    """Bonds with explicit single/double orders in place of aromatic ones."""
    return [Bond(b.begin, b.end, BondOrder(m.kekule[k])) for k, b in enumerate(m.bonds)]


def permute(m: Molecule, order: Sequence[int]) -> Molecule:
    """Renumber atoms: new atom ``p`` is old atom ``order[p]``.

    Bond order is rebuilt from the renumbered graph; the result is the same
    molecule, useful for permutation-invariance checks.
    """
    if sorted(order) != list(range(m.num_atoms)):
        raise ValueError("order must be a permutation of atom indices")
    new_of = {old: new for new, old in enumerate(order)}
    atoms = []
    for old in order:
        a = m.atoms[old]
        if a.stereo_order is not None:
            a = dataclasses.replace(a, stereo_order=tuple(new_of[j] if j >= 0 else j for j in a.stereo_order))
        atoms.append(a)
    bonds = [Bond(new_of[b.begin], new_of[b.end], b.order) for b in m.bonds]
    return build_molecule(atoms, bonds, name=m.name)
