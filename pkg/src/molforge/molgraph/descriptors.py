"""Physicochemical descriptors.

cLogP follows the Wildman–Crippen atom-contribution scheme: heavy atoms are
typed by the first matching row of ``data/crippen.tsv`` and hydrogens by the
atom they sit on. TPSA uses the Ertl N/O fragment table, optionally with
S and P contributions.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from functools import lru_cache
from importlib import resources

from molforge import elements
from molforge.molgraph.core import BondOrder, Chirality, Molecule

__all__ = ["DescriptorSet", "descriptors", "molecular_weight", "exact_mass", "clogp", "tpsa",
           "rotatable_bonds", "stereocenters", "fsp3", "hbd", "hba"]


@dataclass(frozen=True, slots=True)
class DescriptorSet:
    """Descriptor bundle for one molecule.

    ``mw`` uses average atomic weights; ``exact_mass`` the most abundant
    isotope of every element.
    """

    mw: float
    exact_mass: float
    clogp: float
    hbd: int
    hba: int
    rotatable_bonds: int
    tpsa: float
    fsp3: float
    stereocenters: int
    ring_count: int
    largest_ring: int
    formal_charge_total: int
    heavy_atoms: int

    def as_dict(self) -> dict:
        return asdict(self)


# --- mass -----------------------------------------------------------------

def molecular_weight(m: Molecule) -> float:
    # fsum is exactly rounded, so the result does not depend on atom order
    parts = []
    for i, a in enumerate(m.atoms):
        parts.append(float(a.isotope) if a.isotope else elements.average_weight(a.element))
        parts.append(m.total_h(i) * elements.average_weight(elements.H))
    return math.fsum(parts)


def exact_mass(m: Molecule) -> float:
    parts = []
    for i, a in enumerate(m.atoms):
        parts.append(float(a.isotope) if a.isotope else elements.monoisotopic_mass(a.element))
        parts.append(m.total_h(i) * elements.monoisotopic_mass(elements.H))
    return math.fsum(parts)


# --- cLogP ------------------------------------------------------------------

@lru_cache(maxsize=1)
def _crippen_rows() -> tuple[tuple[str, str, float], ...]:
    text = resources.files("molforge").joinpath("data/crippen.tsv").read_text(encoding="utf-8")
    rows = []
    for line in text.splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        kind, smarts, value = line.split("\t")
        rows.append((kind, smarts, float(value)))
    return tuple(rows)


_H_CONTRIB = {"H1": 0.123, "H2": -0.2677, "H3": 0.2142, "H4": 0.298, "HS": 0.1125}


def crippen_types(m: Molecule) -> list[str | None]:
    """Crippen type of every heavy atom (None if no row applies)."""
    from molforge.substructure import iter_mappings, parse_pattern

    types: list[str | None] = [None] * m.num_atoms
    remaining = m.num_atoms
    for kind, smarts, _ in _crippen_rows():
        if not remaining:
            break
        roots = {mp[0] for mp in iter_mappings(parse_pattern(smarts), m)}
        for r in roots:
            if types[r] is None:
                types[r] = kind
                remaining -= 1
    return types


def _has_double_to_hetero(m: Molecule, c: int) -> bool:
    """Aliphatic carbon ``c`` carries a double bond to C, N, O or S."""
    for j, k in m.neighbors(c):
        if m.bonds[k].order != BondOrder.DOUBLE:
            continue
        other = m.atoms[j]
        if other.element in (elements.C, elements.N) or (other.element in (elements.O, elements.S) and not other.aromatic):
            return True
    return False


def hydrogen_type(m: Molecule, parent: int) -> str:
    """Crippen class of a hydrogen bonded to heavy atom ``parent``."""
    a = m.atoms[parent]
    if a.element == elements.C:
        return "H1"
    if a.element == elements.N:
        return "H3"
    if a.element != elements.O:
        return "H2"
    others = [m.atoms[j] for j in m.neighbor_indices(parent)]
    idx = m.neighbor_indices(parent)
    for j, o in zip(idx, others):
        if o.element == elements.C and (o.aromatic or m.degree(j) + m.total_h(j) == 4):
            return "H2"
    for o in others:
        if o.aromatic or o.element not in (elements.C, elements.N, elements.O, elements.S):
            return "H2"
    for o in others:
        if o.element == elements.N:
            return "H3"
    for j, o in zip(idx, others):
        if o.element == elements.C and _has_double_to_hetero(m, j):
            return "H4"
        if o.element in (elements.O, elements.S):
            return "H4"
    return "HS"


def clogp(m: Molecule) -> float:
    values = {kind: v for kind, _, v in _crippen_rows()}
    parts = []
    for i, kind in enumerate(crippen_types(m)):
        if kind is not None:
            parts.append(values[kind])
        h = m.total_h(i)
        if h:
            parts.append(h * _H_CONTRIB[hydrogen_type(m, i)])
    return math.fsum(parts)


# --- TPSA -------------------------------------------------------------------

def _bond_counts(m: Molecule, i: int) -> tuple[int, int, int, int]:
    s = d = t = ar = 0
    for _, k in m.neighbors(i):
        o = m.bonds[k].order
        if o == BondOrder.SINGLE:
            s += 1
        elif o == BondOrder.DOUBLE:
            d += 1
        elif o == BondOrder.TRIPLE:
            t += 1
        else:
            ar += 1
    return s, d, t, ar


def _in_3ring(m: Molecule, i: int) -> bool:
    return any(len(r) == 3 and i in r for r in m.rings)


def _tpsa_n(nb: int, h: int, q: int, s: int, d: int, t: int, ar: int, r3: bool) -> float:
    table = {
        (1, 0, 0, "t1"): 23.79, (1, 1, 0, "d1"): 23.85, (1, 2, 0, "s1"): 26.02,
        (1, 2, 1, "d1"): 25.59, (1, 3, 1, "s1"): 27.64,
    }
    val = None
    if nb == 1:
        key = "t1" if t == 1 else "d1" if d == 1 else "s1" if s == 1 else ""
        val = table.get((1, h, q, key))
    elif nb == 2:
        if h == 0 and q == 0 and s == 1 and d == 1:
            val = 12.36
        elif h == 0 and q == 0 and t == 1 and d == 1:
            val = 13.60
        elif h == 1 and q == 0 and s == 2:
            val = 21.94 if r3 else 12.03
        elif h == 0 and q == 1 and t == 1 and s == 1:
            val = 4.36
        elif h == 1 and q == 1 and d == 1 and s == 1:
            val = 13.97
        elif h == 2 and q == 1 and s == 2:
            val = 16.61
        elif h == 0 and q == 0 and ar == 2:
            val = 12.89
        elif h == 1 and q == 0 and ar == 2:
            val = 15.79
        elif h == 1 and q == 1 and ar == 2:
            val = 14.14
    elif nb == 3:
        if h == 0 and q == 0 and s == 3:
            val = 3.01 if r3 else 3.24
        elif h == 0 and q == 0 and s == 1 and d == 2:
            val = 11.68
        elif h == 0 and q == 1 and s == 2 and d == 1:
            val = 3.01
        elif h == 1 and q == 1 and s == 3:
            val = 4.44
        elif h == 0 and q == 0 and ar == 3:
            val = 4.41
        elif h == 0 and q == 0 and s == 1 and ar == 2:
            val = 4.93
        elif h == 0 and q == 0 and d == 1 and ar == 2:
            val = 8.39
        elif h == 0 and q == 1 and ar == 3:
            val = 4.10
        elif h == 0 and q == 1 and s == 1 and ar == 2:
            val = 3.88
    elif nb == 4 and h == 0 and q == 1 and s == 4:
        val = 0.0
    if val is None:
        val = max(0.0, 30.5 - nb * 8.2 + h * 1.5)
    return val


def _tpsa_o(nb: int, h: int, q: int, s: int, d: int, ar: int, r3: bool) -> float:
    val = None
    if nb == 1:
        if h == 0 and q == 0 and d == 1:
            val = 17.07
        elif h == 1 and q == 0 and s == 1:
            val = 20.23
        elif h == 0 and q == -1 and s == 1:
            val = 23.06
    elif nb == 2:
        if h == 0 and q == 0 and s == 2:
            val = 12.53 if r3 else 9.23
        elif h == 0 and q == 0 and ar == 2:
            val = 13.14
    if val is None:
        val = max(0.0, 28.5 - nb * 8.6 + h * 1.5)
    return val


def _tpsa_s(nb: int, h: int, q: int, s: int, d: int, ar: int) -> float:
    if q != 0:
        return 0.0
    if nb == 1 and h == 1 and s == 1:
        return 38.80
    if nb == 1 and h == 0 and d == 1:
        return 32.09
    if nb == 2 and h == 0 and s == 2:
        return 25.30
    if nb == 2 and h == 0 and ar == 2:
        return 28.24
    if nb == 3 and h == 0 and ar == 2 and d == 1:
        return 21.70
    if nb == 3 and h == 0 and s == 2 and d == 1:
        return 19.21
    if nb == 4 and h == 0 and s == 2 and d == 2:
        return 8.38
    return 0.0


def _tpsa_p(nb: int, h: int, q: int, s: int, d: int) -> float:
    if q != 0:
        return 0.0
    if nb == 3 and h == 0 and s == 3:
        return 13.59
    if nb == 2 and h == 0 and s == 1 and d == 1:
        return 34.14
    if nb == 4 and h == 0 and s == 3 and d == 1:
        return 9.81
    if nb == 3 and h == 1 and s == 2 and d == 1:
        return 23.47
    return 0.0


def tpsa(m: Molecule, include_s_and_p: bool = False) -> float:
    parts = []
    for i, a in enumerate(m.atoms):
        if a.element not in (elements.N, elements.O) and not (
            include_s_and_p and a.element in (elements.S, elements.P)
        ):
            continue
        nb, h, q = m.degree(i), m.total_h(i), a.charge
        s, d, t, ar = _bond_counts(m, i)
        if a.element == elements.N:
            parts.append(_tpsa_n(nb, h, q, s, d, t, ar, _in_3ring(m, i)))
        elif a.element == elements.O:
            parts.append(_tpsa_o(nb, h, q, s, d, ar, _in_3ring(m, i)))
        elif a.element == elements.S:
            parts.append(_tpsa_s(nb, h, q, s, d, ar))
        else:
            parts.append(_tpsa_p(nb, h, q, s, d))
    return math.fsum(parts)


# --- H-bond donors / acceptors ----------------------------------------------

def hbd(m: Molecule) -> int:
    """N-H (neutral trivalent or N+ tetravalent), neutral O-H, S-H and aromatic nH."""
    count = 0
    for i, a in enumerate(m.atoms):
        h = m.total_h(i)
        if not h:
            continue
        v = m.valence(i)
        if a.element == elements.N:
            if a.aromatic:
                count += int(a.charge == 0 and h == 1)
            elif (v == 3 and a.charge == 0) or (v == 4 and a.charge == 1):
                count += 1
        elif a.element in (elements.O, elements.S) and not a.aromatic and h == 1 and a.charge == 0:
            count += 1
    return count


def _attached_to_multiply_bonded_hetero(m: Molecule, i: int) -> bool:
    """Atom ``i`` is singly bonded to an atom that has a double bond to O, N, P or S."""
    for j, k in m.neighbors(i):
        if m.bonds[k].order != BondOrder.SINGLE:
            continue
        for x, kk in m.neighbors(j):
            if x != i and m.bonds[kk].order == BondOrder.DOUBLE and m.atoms[x].element in (
                elements.O, elements.N, elements.P, elements.S
            ):
                return True
    return False


def hba(m: Molecule) -> int:
    """Acceptors: O/S except acid-type OH, trivalent N not bonded to a
    C=O/N/P/S-type centre, two-connected aromatic n, and aromatic o/s."""
    count = 0
    for i, a in enumerate(m.atoms):
        h, q, v = m.total_h(i), a.charge, m.valence(i)
        if a.element in (elements.O, elements.S) and not a.aromatic:
            if q < 0:
                count += 1
            elif h == 1 and v == 2:
                count += int(not _attached_to_multiply_bonded_hetero(m, i))
            elif h == 0 and v == 2:
                count += 1
        elif a.element == elements.N and not a.aromatic:
            if v == 3 and q == 0 and not _attached_to_multiply_bonded_hetero(m, i):
                count += 1
        elif a.element == elements.N and a.aromatic:
            count += int(h == 0 and q == 0 and m.degree(i) == 2)
        elif a.element in (elements.O, elements.S) and a.aromatic and q == 0:
            count += 1
    return count


# --- topology-derived counts -------------------------------------------------

def _is_amide_cn(m: Molecule, c: int, n: int) -> bool:
    if m.atoms[c].element != elements.C or m.atoms[n].element != elements.N:
        return False
    return any(
        m.bonds[k].order == BondOrder.DOUBLE and m.atoms[j].element in (elements.O, elements.S)
        for j, k in m.neighbors(c)
    )


def _has_triple(m: Molecule, i: int) -> bool:
    return any(m.bonds[k].order == BondOrder.TRIPLE for _, k in m.neighbors(i))


def rotatable_bonds(m: Molecule) -> int:
    """Acyclic single bonds between two non-terminal heavy atoms.

    Amide (and thioamide) C-N bonds and bonds to sp (triple-bonded) atoms
    are not counted.
    """
    count = 0
    for k, b in enumerate(m.bonds):
        if b.order != BondOrder.SINGLE or m.is_ring_bond(k):
            continue
        u, v = b.begin, b.end
        if m.degree(u) < 2 or m.degree(v) < 2:
            continue
        if _has_triple(m, u) or _has_triple(m, v):
            continue
        if _is_amide_cn(m, u, v) or _is_amide_cn(m, v, u):
            continue
        count += 1
    return count


def _is_sp3_carbon(m: Molecule, i: int) -> bool:
    if m.atoms[i].element != elements.C or m.atoms[i].aromatic:
        return False
    return all(m.bonds[k].order == BondOrder.SINGLE for _, k in m.neighbors(i)) and m.degree(i) + m.total_h(i) == 4


def fsp3(m: Molecule) -> float:
    carbons = [i for i, a in enumerate(m.atoms) if a.element == elements.C]
    if not carbons:
        return 0.0
    return sum(1 for i in carbons if _is_sp3_carbon(m, i)) / len(carbons)


def _environment(m: Molecule, start: int, center: int, depth: int) -> tuple:
    """Rooted-tree signature of the branch entered at ``start`` from ``center``."""

    def sig(v: int, path: frozenset[int], d: int, order: int) -> tuple:
        a = m.atoms[v]
        head = (order, a.element, a.charge, a.isotope or 0, a.aromatic, m.total_h(v))
        if d == 0:
            return head
        kids = []
        for w, k in m.neighbors(v):
            if w in path:
                continue
            kids.append(sig(w, path | {w}, d - 1, int(m.bonds[k].order)))
        return head + (tuple(sorted(kids)),)

    k = m.bond_index(start, center)
    return sig(start, frozenset((center, start)), depth, int(m.bonds[k].order))


def stereocenters(m: Molecule, depth: int = 4) -> int:
    """sp3 carbons with four distinct substituent environments, plus any
    atom carrying explicit chirality."""
    count = 0
    for i, a in enumerate(m.atoms):
        if a.chirality is not Chirality.NONE:
            count += 1
            continue
        if not _is_sp3_carbon(m, i) or m.total_h(i) > 1:
            continue
        envs = [_environment(m, j, i, depth) for j in m.neighbor_indices(i)]
        if m.total_h(i) == 1:
            envs.append(("H",))
        if len(set(envs)) == 4:
            count += 1
    return count


def descriptors(m: Molecule) -> DescriptorSet:
    return DescriptorSet(
        mw=molecular_weight(m),
        exact_mass=exact_mass(m),
        clogp=clogp(m),
        hbd=hbd(m),
        hba=hba(m),
        rotatable_bonds=rotatable_bonds(m),
        tpsa=tpsa(m),
        fsp3=fsp3(m),
        stereocenters=stereocenters(m),
        ring_count=len(m.rings),
        largest_ring=max((len(r) for r in m.rings), default=0),
        formal_charge_total=sum(a.charge for a in m.atoms),
        heavy_atoms=m.num_atoms,
    )
