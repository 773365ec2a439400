"""Murcko frameworks and generic scaffold keys."""

from __future__ import annotations

from molforge.molgraph import Atom, Bond, BondOrder, Chirality, Molecule, build_molecule
from molforge.smiles import write_canonical

__all__ = ["murcko_scaffold", "murcko_atoms", "subgraph", "generic_scaffold", "generic_scaffold_key", "largest_fragment"]


def largest_fragment(m: Molecule) -> tuple[int, ...]:
    """Atom indices of the largest connected fragment.

    Ties on size are resolved by the canonical SMILES of the fragment, so
    the choice does not depend on atom numbering.
    """
    comps = m.components
    if len(comps) <= 1:
        return comps[0] if comps else ()
    biggest = max(len(c) for c in comps)
    tied = [c for c in comps if len(c) == biggest]
    if len(tied) == 1:
        return tied[0]
    return min(tied, key=lambda c: write_canonical(subgraph(m, c)))


def murcko_atoms(m: Molecule) -> set[int]:
    """Ring systems plus linkers of the largest fragment, with atoms
    double-bonded to that framework."""
    keep = set(largest_fragment(m))
    degree = {i: sum(1 for j in m.neighbor_indices(i) if j in keep) for i in keep}
    stack = [i for i in keep if degree[i] <= 1 and not m.is_ring_atom(i)]
    while stack:
        v = stack.pop()
        if v not in keep:
            continue
        keep.discard(v)
        for w in m.neighbor_indices(v):
            if w in keep:
                degree[w] -= 1
                if degree[w] <= 1 and not m.is_ring_atom(w):
                    stack.append(w)
    if not keep:
        return set()
    extra = set()
    for i in keep:
        for j, k in m.neighbors(i):
            if j not in keep and m.kekule[k] == 2:
                extra.add(j)
    return keep | extra


def subgraph(m: Molecule, atom_set, *, strict: bool = True) -> Molecule:
    """Induced subgraph; atoms losing bonds gain hydrogens to keep valence."""
    order = sorted(atom_set)
    new_of = {old: new for new, old in enumerate(order)}
    atoms = []
    for old in order:
        a = m.atoms[old]
        lost = sum(m.kekule[k] for j, k in m.neighbors(old) if j not in new_of)
        atoms.append(Atom(
            element=a.element,
            charge=a.charge,
            explicit_h=m.total_h(old) + lost,
            isotope=a.isotope,
            aromatic=a.aromatic,
            chirality=Chirality.NONE,
            bracket=True,
        ))
    bonds = [
        Bond(new_of[b.begin], new_of[b.end], _kek_order(m, k))
        for k, b in enumerate(m.bonds)
        if b.begin in new_of and b.end in new_of
    ]
    return build_molecule(atoms, bonds, name=m.name, strict=strict)


def _kek_order(m: Molecule, k: int) -> BondOrder:
    return BondOrder(m.kekule[k])


def murcko_scaffold(m: Molecule) -> Molecule:
    """Murcko framework of ``m`` (an empty molecule for acyclic input)."""
    keep = murcko_atoms(m)
    if not keep:
        return build_molecule([], [], name=m.name)
    return subgraph(m, keep)


def generic_scaffold(m: Molecule) -> Molecule:
    """Murcko framework with every atom carbon and every bond single."""
    keep = murcko_atoms(m)
    if not keep:
        return build_molecule([], [], name=m.name)
    order = sorted(keep)
    new_of = {old: new for new, old in enumerate(order)}
    atoms = [Atom(element=6) for _ in order]
    bonds = [(new_of[b.begin], new_of[b.end], 1) for b in m.bonds if b.begin in new_of and b.end in new_of]
    return build_molecule(atoms, bonds, name=m.name, strict=False)


def generic_scaffold_key(m: Molecule) -> str:
    """Canonical SMILES of the generic framework; ``""`` for acyclic molecules."""
    return write_canonical(generic_scaffold(m))
