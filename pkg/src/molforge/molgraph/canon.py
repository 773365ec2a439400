"""Canonical atom ranking.

Ranks come from iterative refinement of atom invariants followed by
tie-breaking. Where remaining ties touch stereocenters (a chiral atom with
equivalent neighbors, or equivalent chiral atoms) the choice affects how the
chirality reads, so all tie-break branches are explored up to a leaf budget
and the one with the smallest stereo/graph key is kept.
"""

from __future__ import annotations

from molforge.molgraph.core import IMPLICIT_H, Chirality, Molecule, break_ties, refine_classes

LEAF_BUDGET = 512


def _parity(seq: list[int]) -> int:
    inv = 0
    for a in range(len(seq)):
        for b in range(a + 1, len(seq)):
            if seq[a] > seq[b]:
                inv += 1
    return inv & 1


def atom_invariants(m: Molecule) -> list[tuple]:
    out = []
    for i, a in enumerate(m.atoms):
        out.append((
            a.element,
            a.isotope or 0,
            a.charge,
            m.degree(i),
            m.total_h(i),
            m.is_ring_atom(i),
            a.aromatic,
            a.chirality is not Chirality.NONE,
        ))
    return out


def _neighbor_labels(m: Molecule) -> list[list[tuple[int, int]]]:
    return [[(int(m.bonds[k].order), j) for j, k in m.neighbors(i)] for i in range(m.num_atoms)]


def stereo_key(m: Molecule, ranks: list[int]) -> tuple:
    """Chirality of each stereocenter expressed against neighbor ranks."""
    items = []
    for i, a in enumerate(m.atoms):
        if a.chirality is Chirality.NONE or a.stereo_order is None:
            continue
        seq = [ranks[j] if j != IMPLICIT_H else -1 for j in a.stereo_order]
        tag = 0 if a.chirality is Chirality.CCW else 1
        items.append((ranks[i], tag ^ _parity(seq)))
    return tuple(sorted(items))


def _graph_key(m: Molecule, ranks: list[int], inv: list[tuple]) -> tuple:
    atoms = tuple(inv[i] for i in sorted(range(m.num_atoms), key=ranks.__getitem__))
    edges = tuple(sorted(
        (min(ranks[b.begin], ranks[b.end]), max(ranks[b.begin], ranks[b.end]), int(b.order)) for b in m.bonds
    ))
    return atoms, edges


def canonical_ranks(m: Molecule) -> list[int]:
    """Canonical position of every atom (a permutation of ``0..n-1``).

    Invariant under input atom renumbering for the same stereo-labeled graph.
    """
    n = m.num_atoms
    if n == 0:
        return []
    inv = atom_invariants(m)
    nbrs = _neighbor_labels(m)
    ranks = refine_classes(inv, nbrs)
    chiral = [i for i, a in enumerate(m.atoms) if a.chirality is not Chirality.NONE]
    if not chiral:
        return break_ties(ranks, nbrs)

    relevant = set(chiral)
    for c in chiral:
        relevant.update(m.neighbor_indices(c))

    def tied_relevant_class(r: list[int]) -> list[int] | None:
        classes: dict[int, list[int]] = {}
        for i, v in enumerate(r):
            classes.setdefault(v, []).append(i)
        best = None
        for v, members in classes.items():
            if len(members) > 1 and any(i in relevant for i in members):
                if best is None or v < best:
                    best = v
        return None if best is None else classes[best]

    best_key = None
    best_ranks: list[int] | None = None
    leaves = 0

    def descend(r: list[int]) -> None:
        nonlocal best_key, best_ranks, leaves
        members = tied_relevant_class(r)
        if members is None or leaves >= LEAF_BUDGET:
            final = break_ties(r, nbrs)
            leaves += 1
            key = (stereo_key(m, final), _graph_key(m, final, inv))
            if best_key is None or key < best_key:
                best_key, best_ranks = key, final
            return
        for pick in members:
            if leaves >= LEAF_BUDGET:
                return
            descend(refine_classes([(v, 0 if i == pick else 1) for i, v in enumerate(r)], nbrs))

    descend(ranks)
    assert best_ranks is not None
    return best_ranks
