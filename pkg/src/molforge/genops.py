"""Generation primitives over masked graphs and the beam-search decoder.

A :class:`MaskedGraph` is a molecule in which some atoms (and every bond
touching them) carry no label yet. The four primitives build masked graphs
(:func:`fragment_mask`, :func:`scaffold_decorate`, :func:`link_fragments`)
or edit a molecule directly (:func:`graph_edit`). :func:`decode` fills the
masked positions from a :class:`ProposalModel`.

Decoding is semi-autoregressive: at every step each beam unmasks the
position whose model distribution has the lowest entropy (ties by index).
Unmasking an atom is followed by micro-steps that assign its bonds to
neighbours that are already labelled, so valence can be checked as the
graph grows. Distributions are temperature-scaled, nucleus-truncated and
renormalised before expansion; beams are ranked by cumulative log
probability.
"""

from __future__ import annotations

import dataclasses
import math
from collections import Counter
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from typing import Protocol, Union, runtime_checkable

import numpy as np

from molforge import elements
from molforge.errors import (
    DecodeExhausted,
    EmptyCorpus,
    FullMask,
    GraphError,
    MoleculeError,
    RangeError,
    ValenceError,
)
from molforge.molgraph import IMPLICIT_H, Atom, Bond, BondOrder, Chirality, Molecule, build_molecule
from molforge.smiles import write_canonical

__all__ = [
    "AtomLabel",
    "Position",
    "MaskedGraph",
    "ProposalModel",
    "FrequencyModel",
    "DecodeParams",
    "BROAD_SCOUT",
    "PRESETS",
    "Beam",
    "fragment_mask",
    "scaffold_decorate",
    "link_fragments",
    "graph_edit",
    "adjust_distribution",
    "decode",
    "decode_beams",
    "train_frequency_model",
]

AtomLabel = tuple[int, int]  # (atomic number, formal charge)
Position = Union[int, tuple[int, int]]  # atom index or bond pair (i < j)

_UNCHECKED_CAP = 8  # valence ceiling for elements without a valence table


def _pair(i: int, j: int) -> tuple[int, int]:
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True, eq=False)
class MaskedGraph:
    """Partially labelled molecular graph.

    Attributes:
        atoms: per-atom label; ``None`` while masked. Fixed atoms are bracket
            atoms whose ``explicit_h`` equals ``spare_h`` (the hydrogens left
            if every masked bond were absent); decoded atoms are organic
            atoms with implicit hydrogens.
        bonds: ``(i, j, order)`` with ``i < j``; order ``None`` while masked.
        masked_atoms: indices that started masked (decoded or not).
        masked_bonds: pairs that started masked.
        spare_h: per-atom hydrogen budget that masked bonds may consume
            (meaningful for fixed atoms only).
        provenance: name of the primitive that produced the graph.
    """

    atoms: tuple[Atom | None, ...]
    bonds: tuple[tuple[int, int, int | None], ...]
    masked_atoms: frozenset[int]
    masked_bonds: frozenset[tuple[int, int]]
    spare_h: tuple[int, ...]
    provenance: str = ""
    name: str | None = None
    _adj: tuple[tuple[tuple[int, int], ...], ...] = field(default=(), repr=False)

    def __post_init__(self) -> None:
        if not self._adj:
            adj: list[list[tuple[int, int]]] = [[] for _ in self.atoms]
            for k, (i, j, _) in enumerate(self.bonds):
                adj[i].append((j, k))
                adj[j].append((i, k))
            object.__setattr__(self, "_adj", tuple(tuple(sorted(a)) for a in adj))

    @property
    def num_atoms(self) -> int:
        return len(self.atoms)

    @property
    def fixed_atoms(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.num_atoms) if i not in self.masked_atoms)

    def neighbors(self, i: int) -> tuple[tuple[int, int], ...]:
        """``(neighbor, bond index)`` pairs sorted by neighbor."""
        return self._adj[i]

    def is_resolved(self, i: int) -> bool:
        return self.atoms[i] is not None

    def bond_order(self, i: int, j: int) -> int | None:
        for nb, k in self._adj[i]:
            if nb == j:
                return self.bonds[k][2]
        raise KeyError((i, j))

    def pending(self) -> list[Position]:
        """Positions still to decode: masked atoms, then masked bonds whose
        two ends are already labelled (links of length zero)."""
        out: list[Position] = [i for i in sorted(self.masked_atoms) if self.atoms[i] is None]
        for i, j, order in self.bonds:
            if order is None and self.atoms[i] is not None and self.atoms[j] is not None:
                out.append((i, j))
        return out

    @property
    def is_complete(self) -> bool:
        return all(a is not None for a in self.atoms) and all(o is not None for _, _, o in self.bonds)

    def with_atom(self, i: int, label: AtomLabel) -> MaskedGraph:
        atoms = list(self.atoms)
        atoms[i] = Atom(element=label[0], charge=label[1])
        return dataclasses.replace(self, atoms=tuple(atoms))

    def with_bond(self, pair: tuple[int, int], order: int) -> MaskedGraph:
        bonds = list(self.bonds)
        for k, (i, j, _) in enumerate(bonds):
            if (i, j) == pair:
                bonds[k] = (i, j, order)
                break
        else:
            raise KeyError(pair)
        return dataclasses.replace(self, bonds=tuple(bonds))

    def used_valence(self, i: int) -> tuple[int, int]:
        """(sum of assigned masked-or-decoded bond orders, unassigned bonds) at ``i``.

        For a fixed atom only masked bonds count, since its fixed bonds are
        already part of its valence.
        """
        fixed = i not in self.masked_atoms
        used = open_ = 0
        for j, k in self._adj[i]:
            a, b, order = self.bonds[k]
            if fixed and (a, b) not in self.masked_bonds:
                continue
            if order is None:
                open_ += 1
            else:
                used += order
        return used, open_

    def feasible_at(self, i: int) -> bool:
        """Can atom ``i`` still reach a legal valence (every open bond at least single)?"""
        used, open_ = self.used_valence(i)
        if i not in self.masked_atoms:
            return used + open_ <= self.spare_h[i]
        a = self.atoms[i]
        if a is None:
            return True
        allowed = elements.allowed_valences(a.element, a.charge)
        cap = max(allowed) if allowed else _UNCHECKED_CAP
        return used + open_ <= cap

    def to_molecule(self) -> Molecule:
        """Build the completed molecule.

        Raises:
            ValueError: positions are still masked.
            MoleculeError: the labelled graph is not a valid molecule.
        """
        if not self.is_complete:
            raise ValueError("graph still has masked positions")
        atoms = []
        for i, a in enumerate(self.atoms):
            if i not in self.masked_atoms:
                used, _ = self.used_valence(i)
                h = self.spare_h[i] - used
                if h < 0:
                    raise ValenceError(f"atom {i} exceeds its hydrogen budget", atom_index=i)
                a = dataclasses.replace(a, explicit_h=h)
            atoms.append(a)
        return build_molecule(atoms, [(i, j, o) for i, j, o in self.bonds], name=self.name)


def _fixed_atom(a: Atom, spare: int) -> Atom:
    return dataclasses.replace(a, aromatic=False, bracket=True, explicit_h=spare)


def _check_atoms(m: Molecule, idx: Iterable[int], what: str) -> None:
    for i in idx:
        if not isinstance(i, (int, np.integer)) or not 0 <= i < m.num_atoms:
            raise IndexError(f"{what} {i} outside 0..{m.num_atoms - 1}")


# ---------------------------------------------------------------- primitives


def fragment_mask(m: Molecule, atom_set: Iterable[int], *, de_novo: bool = False) -> MaskedGraph:
    """Mask ``atom_set`` and every bond touching it; the rest stays fixed.

    Fixed atoms keep their element, charge, chirality and total valence:
    hydrogens plus the orders of their masked bonds form a budget that the
    decoded bonds must fit into.

    Raises:
        IndexError: an index is out of range.
        ValueError: ``atom_set`` is empty.
        FullMask: every atom would be masked and ``de_novo`` is False.
    """
    masked = frozenset(int(i) for i in atom_set)
    if not masked:
        raise ValueError("atom_set is empty")
    _check_atoms(m, masked, "atom")
    if len(masked) == m.num_atoms and not de_novo:
        raise FullMask("masking every atom leaves no scaffold; pass de_novo=True to allow it")
    atoms: list[Atom | None] = []
    spare = []
    for i, a in enumerate(m.atoms):
        if i in masked:
            atoms.append(None)
            spare.append(0)
            continue
        s = m.total_h(i) + sum(m.kekule[k] for j, k in m.neighbors(i) if j in masked)
        atoms.append(_fixed_atom(a, s))
        spare.append(s)
    bonds = []
    mbonds = set()
    for k, b in enumerate(m.bonds):
        i, j = b.pair
        if i in masked or j in masked:
            bonds.append((i, j, None))
            mbonds.add((i, j))
        else:
            bonds.append((i, j, m.kekule[k]))
    return MaskedGraph(tuple(atoms), tuple(bonds), masked, frozenset(mbonds), tuple(spare), "fragment_mask", m.name)


def _replace_h_slot(a: Atom, new_idx: int) -> Atom:
    """Put a new substituent where the chiral atom's implicit H sat."""
    if a.chirality is Chirality.NONE or a.stereo_order is None or IMPLICIT_H not in a.stereo_order:
        return a
    return dataclasses.replace(a, stereo_order=tuple(new_idx if j == IMPLICIT_H else j for j in a.stereo_order))


def _fixed_copy(m: Molecule, offset: int = 0) -> tuple[list[Atom], list[int], list[tuple[int, int, int]]]:
    atoms = []
    for a in m.atoms:
        if a.stereo_order is not None and offset:
            a = dataclasses.replace(a, stereo_order=tuple(j + offset if j >= 0 else j for j in a.stereo_order))
        atoms.append(a)
    spare = [m.total_h(i) for i in range(m.num_atoms)]
    bonds = [(b.begin + offset, b.end + offset, m.kekule[k]) for k, b in enumerate(m.bonds)]
    return atoms, spare, bonds


def _assemble(
    atoms: list[Atom],
    spare: list[int],
    bonds: list[tuple[int, int, int]],
    n_new: int,
    new_bonds: list[tuple[int, int]],
    provenance: str,
    name: str | None,
) -> MaskedGraph:
    n_fixed = len(atoms)
    all_atoms: list[Atom | None] = [_fixed_atom(a, s) for a, s in zip(atoms, spare)]
    all_atoms += [None] * n_new
    all_bonds = [(min(i, j), max(i, j), o) for i, j, o in bonds]
    mb = set()
    for i, j in new_bonds:
        p = _pair(i, j)
        all_bonds.append((p[0], p[1], None))
        mb.add(p)
    return MaskedGraph(
        tuple(all_atoms),
        tuple(all_bonds),
        frozenset(range(n_fixed, n_fixed + n_new)),
        frozenset(mb),
        tuple(spare) + (0,) * n_new,
        provenance,
        name,
    )


def scaffold_decorate(
    core: Molecule,
    attachment_points: Sequence[int],
    growth_budget: int,
    *,
    allow_identity: bool = False,
) -> MaskedGraph:
    """Grow a chain of ``growth_budget`` masked atoms from each attachment point.

    Each chain replaces one hydrogen of its attachment atom. With
    ``growth_budget == 0`` a graph with nothing masked is returned when
    ``allow_identity`` is set (decoding it yields the core itself).

    Raises:
        IndexError: an attachment point is out of range.
        RangeError: ``growth_budget`` is negative, or zero without ``allow_identity``.
        ValenceError: an attachment atom has no hydrogen left to replace.
    """
    _check_atoms(core, attachment_points, "attachment point")
    if growth_budget < 0 or (growth_budget == 0 and not allow_identity):
        raise RangeError(f"growth_budget must be >= 1 (got {growth_budget})")
    atoms, spare, bonds = _fixed_copy(core)
    if growth_budget == 0:
        return _assemble(atoms, spare, bonds, 0, [], "scaffold_decorate", core.name)
    hbudget = list(spare)
    n = core.num_atoms
    new_bonds = []
    for p in attachment_points:
        if hbudget[p] < 1:
            raise ValenceError(f"attachment atom {p} has no hydrogen to replace", atom_index=p)
        hbudget[p] -= 1
        atoms[p] = _replace_h_slot(atoms[p], n)
        prev = p
        for _ in range(growth_budget):
            new_bonds.append((prev, n))
            prev = n
            n += 1
    return _assemble(atoms, spare, bonds, n - core.num_atoms, new_bonds, "scaffold_decorate", core.name)


def link_fragments(
    a: Molecule,
    a_site: int,
    b: Molecule,
    b_site: int,
    linker_len_range: tuple[int, int],
) -> list[MaskedGraph]:
    """One masked graph per linker length joining ``a_site`` to ``b_site``.

    Atoms of ``a`` come first, then ``b``, then the linker chain. Length 0
    is a single masked bond between the two sites.

    Raises:
        IndexError: a site is out of range.
        RangeError: the range is negative or inverted.
        ValenceError: a site has no hydrogen to replace.
    """
    lo, hi = linker_len_range
    if lo < 0 or hi < lo:
        raise RangeError(f"invalid linker length range {linker_len_range}")
    _check_atoms(a, [a_site], "site")
    _check_atoms(b, [b_site], "site")
    for m, s in ((a, a_site), (b, b_site)):
        if m.total_h(s) < 1:
            raise ValenceError(f"site atom {s} has no hydrogen to replace", atom_index=s)
    atoms_a, spare_a, bonds_a = _fixed_copy(a)
    atoms_b, spare_b, bonds_b = _fixed_copy(b, a.num_atoms)
    na = a.num_atoms
    bs = b_site + na
    n_fixed = na + b.num_atoms
    name = "+".join(x for x in (a.name, b.name) if x) or None
    out = []
    for length in range(lo, hi + 1):
        atoms = atoms_a + atoms_b
        first = n_fixed if length else bs
        last = n_fixed + length - 1 if length else a_site
        atoms[a_site] = _replace_h_slot(atoms[a_site], first)
        atoms[bs] = _replace_h_slot(atoms[bs], last)
        chain = [a_site] + list(range(n_fixed, n_fixed + length)) + [bs]
        new_bonds = list(zip(chain, chain[1:]))
        out.append(_assemble(atoms, spare_a + spare_b, bonds_a + bonds_b, length, new_bonds, "link_fragments", name))
    return out


_EDIT_OPS = ("add_atom", "remove_atom", "add_bond", "remove_bond", "set_element", "set_order")


def _element_of(value: int | str) -> int:
    if isinstance(value, str):
        return elements.atomic_number(value)
    return int(value)


def graph_edit(m: Molecule, edit_script: Sequence[Mapping]) -> Molecule:
    """Apply atom/bond edits in order and revalidate the result.

    Each step is a mapping with an ``op`` key:

    * ``{"op": "add_atom", "element": "C", "charge": 0}`` appends an atom.
    * ``{"op": "remove_atom", "atom": i}`` deletes an atom and its bonds;
      higher indices shift down by one.
    * ``{"op": "add_bond", "begin": i, "end": j, "order": 1}``
    * ``{"op": "remove_bond", "begin": i, "end": j}``
    * ``{"op": "set_element", "atom": i, "element": "N"}`` (optional ``charge``)
    * ``{"op": "set_order", "begin": i, "end": j, "order": 2}``

    Indices refer to the molecule as it stands before that step. Aromatic
    bonds are edited in their Kekulé form and aromaticity is perceived
    again afterwards. Atoms touched by an edit get implicit hydrogens and
    lose chirality; untouched atoms keep their hydrogens and stereo.

    Raises:
        IndexError: a step names an atom that does not exist (message and
            ``step`` attribute carry the step number).
        GraphError: an unknown op, a bond that already exists or is missing.
        ValenceError: the result violates valence; ``step`` is the last step
            that touched the offending atom.
    """
    # atoms are tracked by a stable id so bonds survive index shifts
    order: list[int] = list(range(m.num_atoms))
    labels: dict[int, Atom] = {i: a for i, a in enumerate(m.atoms)}
    hydrogens = {i: m.total_h(i) for i in range(m.num_atoms)}
    bonds: dict[tuple[int, int], int] = {b.pair: m.kekule[k] for k, b in enumerate(m.bonds)}
    touched: dict[int, int] = {}
    next_id = m.num_atoms

    def at(step: int, idx) -> int:
        if not isinstance(idx, int) or not 0 <= idx < len(order):
            err = IndexError(f"step {step}: atom index {idx} outside 0..{len(order) - 1}")
            err.step = step
            raise err
        return order[idx]

    for s, edit in enumerate(edit_script):
        op = edit.get("op")
        if op not in _EDIT_OPS:
            raise GraphError(f"step {s}: unknown edit op {op!r}")
        if op == "add_atom":
            aid = next_id
            next_id += 1
            order.append(aid)
            labels[aid] = Atom(element=_element_of(edit.get("element", "C")), charge=int(edit.get("charge", 0)))
            touched[aid] = s
        elif op == "remove_atom":
            aid = at(s, edit["atom"])
            order.remove(aid)
            for pair in [p for p in bonds if aid in p]:
                del bonds[pair]
                touched[pair[0] if pair[1] == aid else pair[1]] = s
            touched.pop(aid, None)
        elif op == "set_element":
            aid = at(s, edit["atom"])
            labels[aid] = dataclasses.replace(
                labels[aid],
                element=_element_of(edit["element"]),
                charge=int(edit.get("charge", labels[aid].charge)),
                isotope=None,
            )
            touched[aid] = s
        else:
            i, j = at(s, edit["begin"]), at(s, edit["end"])
            if i == j:
                raise GraphError(f"step {s}: bond from atom {edit['begin']} to itself")
            pair = _pair(i, j)
            if op == "add_bond":
                if pair in bonds:
                    raise GraphError(f"step {s}: bond {edit['begin']}-{edit['end']} already exists")
                bonds[pair] = int(BondOrder.coerce(edit.get("order", 1)))
            else:
                if pair not in bonds:
                    raise GraphError(f"step {s}: no bond {edit['begin']}-{edit['end']}")
                if op == "remove_bond":
                    del bonds[pair]
                else:
                    bonds[pair] = int(BondOrder.coerce(edit["order"]))
            touched[i] = touched[j] = s

    pos = {aid: p for p, aid in enumerate(order)}
    atoms = []
    for aid in order:
        a = labels[aid]
        if aid in touched or aid >= m.num_atoms:
            a = Atom(element=a.element, charge=a.charge, isotope=a.isotope)
        else:
            a = dataclasses.replace(a, aromatic=False, bracket=True, explicit_h=hydrogens[aid])
            if a.stereo_order is not None:
                a = dataclasses.replace(a, stereo_order=tuple(pos[j] if j >= 0 else j for j in a.stereo_order))
        atoms.append(a)
    new_bonds = [Bond(pos[i], pos[j], BondOrder(o)) for (i, j), o in sorted(bonds.items(), key=lambda kv: (pos[kv[0][0]], pos[kv[0][1]]))]
    try:
        return build_molecule(atoms, new_bonds, name=m.name)
    except ValenceError as exc:
        step = None
        if exc.atom_index is not None:
            step = touched.get(order[exc.atom_index])
        raise type(exc)(f"{exc} (after edit step {step})", atom_index=exc.atom_index, step=step) from None


# ------------------------------------------------------------ proposal model


@runtime_checkable
class ProposalModel(Protocol):
    """Scores labels for one position of a partially decoded graph.

    ``distribution(g, position)`` returns probabilities aligned with
    ``atom_labels`` when ``position`` is an atom index and with
    ``bond_labels`` when it is a bond pair. They must sum to 1.
    """

    atom_labels: tuple[AtomLabel, ...]
    bond_labels: tuple[int, ...]

    def distribution(self, g: MaskedGraph, position: Position) -> Sequence[float]: ...


def _atom_context(g: MaskedGraph, i: int) -> tuple[int, ...]:
    return tuple(sorted(g.atoms[j].element for j, _ in g.neighbors(i) if g.atoms[j] is not None))


def _bond_context(g: MaskedGraph, i: int, j: int) -> tuple[int, int]:
    a, b = g.atoms[i].element, g.atoms[j].element
    return (a, b) if a <= b else (b, a)


@dataclass(frozen=True)
class FrequencyModel:
    """Laplace-smoothed label frequencies conditioned on local context.

    Atom context is the sorted tuple of elements of already-labelled
    neighbours (every atom is also counted under the empty context, so an
    isolated position falls back to the corpus marginal). Bond context is
    the sorted pair of endpoint elements. Unseen contexts give a uniform
    distribution.
    """

    atom_labels: tuple[AtomLabel, ...]
    bond_labels: tuple[int, ...]
    atom_counts: Mapping[tuple[int, ...], tuple[int, ...]]
    bond_counts: Mapping[tuple[int, int], tuple[int, ...]]
    alpha: float = 1.0

    def _smoothed(self, counts: tuple[int, ...] | None, n: int) -> list[float]:
        if counts is None:
            return [1.0 / n] * n
        total = sum(counts) + self.alpha * n
        return [(c + self.alpha) / total for c in counts]

    def distribution(self, g: MaskedGraph, position: Position) -> list[float]:
        if isinstance(position, tuple):
            ctx = _bond_context(g, *position)
            return self._smoothed(self.bond_counts.get(ctx), len(self.bond_labels))
        return self._smoothed(self.atom_counts.get(_atom_context(g, position)), len(self.atom_labels))

    def to_dict(self) -> dict:
        return {
            "atom_labels": [list(l) for l in self.atom_labels],
            "bond_labels": list(self.bond_labels),
            "alpha": self.alpha,
            "atom_counts": [[list(c), list(v)] for c, v in sorted(self.atom_counts.items())],
            "bond_counts": [[list(c), list(v)] for c, v in sorted(self.bond_counts.items())],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> FrequencyModel:
        return cls(
            atom_labels=tuple(tuple(l) for l in data["atom_labels"]),
            bond_labels=tuple(data["bond_labels"]),
            atom_counts={tuple(c): tuple(v) for c, v in data["atom_counts"]},
            bond_counts={tuple(c): tuple(v) for c, v in data["bond_counts"]},
            alpha=float(data.get("alpha", 1.0)),
        )


def train_frequency_model(corpus: Iterable[Molecule], *, alpha: float = 1.0) -> FrequencyModel:
    """Count atom and bond labels by context over ``corpus``.

    The atom vocabulary is every (element, charge) seen, sorted; bond labels
    are Kekulé orders 1, 2 and 3.

    Raises:
        EmptyCorpus: no molecules (or no atoms) in the corpus.
    """
    atom_c: dict[tuple[int, ...], Counter] = {}
    bond_c: dict[tuple[int, int], Counter] = {}
    vocab: set[AtomLabel] = set()
    for m in corpus:
        for i, a in enumerate(m.atoms):
            label = (a.element, a.charge)
            vocab.add(label)
            ctx = tuple(sorted(m.atoms[j].element for j in m.neighbor_indices(i)))
            atom_c.setdefault(ctx, Counter())[label] += 1
            if ctx:
                atom_c.setdefault((), Counter())[label] += 1
        for k, b in enumerate(m.bonds):
            x, y = m.atoms[b.begin].element, m.atoms[b.end].element
            bond_c.setdefault((min(x, y), max(x, y)), Counter())[m.kekule[k]] += 1
    if not vocab:
        raise EmptyCorpus("training corpus has no atoms")
    atom_labels = tuple(sorted(vocab))
    bond_labels = (1, 2, 3)
    return FrequencyModel(
        atom_labels=atom_labels,
        bond_labels=bond_labels,
        atom_counts={c: tuple(v[l] for l in atom_labels) for c, v in atom_c.items()},
        bond_counts={c: tuple(v[o] for o in bond_labels) for c, v in bond_c.items()},
        alpha=alpha,
    )


# ------------------------------------------------------------------ decoder


@dataclass(frozen=True, slots=True)
class DecodeParams:
    """Beam-search settings.

    ``sample=False`` expands every label in the nucleus (deterministic);
    ``sample=True`` draws up to ``beam_width`` labels per expansion without
    replacement from a generator seeded with ``seed``.
    """

    beam_width: int = 8
    temperature: float = 1.0
    nucleus_p: float = 1.0
    max_outputs: int = 50
    seed: int = 0
    sample: bool = False

    def __post_init__(self) -> None:
        if self.beam_width < 1:
            raise ValueError("beam_width must be >= 1")
        if not self.temperature > 0:
            raise ValueError("temperature must be > 0")
        if not 0 < self.nucleus_p <= 1:
            raise ValueError("nucleus_p must be in (0, 1]")
        if self.max_outputs < 1:
            raise ValueError("max_outputs must be >= 1")

    @classmethod
    def from_dict(cls, data: Mapping) -> DecodeParams:
        data = dict(data)
        preset = data.pop("preset", None)
        base = PRESETS[preset] if preset else cls()
        return dataclasses.replace(base, **data)


BROAD_SCOUT = DecodeParams(beam_width=32, temperature=1.2, nucleus_p=0.95, max_outputs=200)
PRESETS: dict[str, DecodeParams] = {"default": DecodeParams(), "broad_scout": BROAD_SCOUT}


def _adjust_log(probs: Sequence[float], temperature: float, nucleus_p: float) -> list[tuple[int, float]]:
    """``(label index, log probability)`` after temperature and nucleus, best first.

    Working in log space keeps every label with non-zero input mass even at
    temperatures where its scaled probability underflows.
    """
    support = [(i, math.log(p) / temperature) for i, p in enumerate(probs) if p > 0]
    if not support:
        return []
    top = max(x for _, x in support)
    log_z = top + math.log(math.fsum(math.exp(x - top) for _, x in support))
    scaled = sorted(((i, x - log_z) for i, x in support), key=lambda t: (-t[1], t[0]))
    if nucleus_p < 1:
        kept, mass = [], 0.0
        for item in scaled:
            kept.append(item)
            mass += math.exp(item[1])
            if mass >= nucleus_p:
                break
        top = kept[0][1]
        log_z = top + math.log(math.fsum(math.exp(x - top) for _, x in kept))
        scaled = [(i, x - log_z) for i, x in kept]
    return scaled


def adjust_distribution(probs: Sequence[float], temperature: float, nucleus_p: float) -> list[tuple[int, float]]:
    """Temperature-scale, nucleus-truncate and renormalise.

    Returns ``(label index, probability)`` pairs in descending probability
    (ties by index). Zero-probability labels never appear. With
    ``nucleus_p == 1`` nothing with non-zero mass is dropped.
    """
    return [(i, math.exp(x)) for i, x in _adjust_log(probs, temperature, nucleus_p)]


@dataclass(frozen=True, slots=True)
class Beam:
    """A partial (or finished) hypothesis.

    ``unmask_trace`` holds ``(position, label, log p)`` per decision, where
    label is an (element, charge) pair for atoms and a bond order for bonds.
    """

    graph: MaskedGraph
    cum_logprob: float = 0.0
    unmask_trace: tuple[tuple[Position, object, float], ...] = ()
    tie_key: tuple[int, ...] = ()
    molecule: Molecule | None = None

    def extend(self, g: MaskedGraph, position: Position, label: object, label_idx: int, logp: float) -> Beam:
        return Beam(g, self.cum_logprob + logp, self.unmask_trace + ((position, label, logp),), self.tie_key + (label_idx,))


def _entropy(probs: Sequence[float]) -> float:
    return -sum(p * math.log(p) for p in probs if p > 0)


def _next_position(g: MaskedGraph, model: ProposalModel) -> Position:
    best = None
    for pos in g.pending():
        key = (_entropy(model.distribution(g, pos)), 0 if isinstance(pos, int) else 1, pos if isinstance(pos, int) else pos[0], pos if isinstance(pos, int) else pos[1])
        if best is None or key < best[0]:
            best = (key, pos)
    return best[1]


def _choices(probs: Sequence[float], params: DecodeParams, rng: np.random.Generator | None) -> list[tuple[int, float]]:
    """``(label index, log probability)`` pairs to expand."""
    total = float(sum(probs))
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"model distribution sums to {total}, not 1")
    adj = _adjust_log(probs, params.temperature, params.nucleus_p)
    if rng is None or len(adj) <= 1:
        return adj
    p = np.exp(np.array([x for _, x in adj]))
    k = min(params.beam_width, int(np.count_nonzero(p)))
    picked = rng.choice(len(adj), size=k, replace=False, p=p / p.sum())
    return [adj[int(x)] for x in sorted(picked)]


def _expand(beam: Beam, pos: Position, model: ProposalModel, params: DecodeParams, rng) -> list[Beam]:
    g = beam.graph
    if isinstance(pos, tuple):
        out = []
        for idx, lq in _choices(model.distribution(g, pos), params, rng):
            order = model.bond_labels[idx]
            g2 = g.with_bond(pos, order)
            if g2.feasible_at(pos[0]) and g2.feasible_at(pos[1]):
                out.append(beam.extend(g2, pos, order, idx, lq))
        return out
    partial = []
    for idx, lq in _choices(model.distribution(g, pos), params, rng):
        label = model.atom_labels[idx]
        g2 = g.with_atom(pos, label)
        if g2.feasible_at(pos):
            partial.append(beam.extend(g2, pos, label, idx, lq))
    # micro-steps: bonds from the new atom to labelled neighbours, ascending
    for j, k in g.neighbors(pos):
        i0, j0, order = g.bonds[k]
        if order is not None or g.atoms[j] is None:
            continue
        pair = (i0, j0)
        nxt = []
        for b in partial:
            for idx, lq in _choices(model.distribution(b.graph, pair), params, rng):
                o = model.bond_labels[idx]
                g3 = b.graph.with_bond(pair, o)
                if g3.feasible_at(i0) and g3.feasible_at(j0):
                    nxt.append(b.extend(g3, pair, o, idx, lq))
        partial = nxt
    return partial


def _rank_key(b: Beam) -> tuple:
    return (-b.cum_logprob, b.tie_key)


def decode_beams(g: MaskedGraph, model: ProposalModel, params: DecodeParams = DecodeParams()) -> list[Beam]:
    """Run the decoder and return finished beams carrying their molecules.

    Completed graphs that fail revalidation are dropped, duplicates (same
    canonical SMILES) keep only their best-scoring beam, and the result is
    sorted by ``cum_logprob`` descending (ties by label indices along the
    trace), truncated to ``max_outputs``.

    Raises:
        DecodeExhausted: no valid completion survived.
    """
    if not g.pending():
        if not g.is_complete:
            raise DecodeExhausted("masked bonds have no decodable endpoints")
        return [Beam(g, 0.0, (), (), g.to_molecule())]
    if not model.atom_labels and g.masked_atoms:
        raise ValueError("model atom vocabulary is empty")
    rng = np.random.default_rng(params.seed) if params.sample else None
    beams = [Beam(g)]
    while beams and beams[0].graph.pending():
        candidates: list[Beam] = []
        for beam in beams:
            candidates.extend(_expand(beam, _next_position(beam.graph, model), model, params, rng))
        candidates.sort(key=_rank_key)
        beams = candidates[: params.beam_width]
    finished: dict[str, Beam] = {}
    for beam in beams:
        try:
            mol = beam.graph.to_molecule()
        except MoleculeError:
            continue
        key = write_canonical(mol)
        if key not in finished:
            finished[key] = dataclasses.replace(beam, molecule=mol)
    if not finished:
        raise DecodeExhausted("no valence-valid completion survived the beam")
    return sorted(finished.values(), key=_rank_key)[: params.max_outputs]


def decode(g: MaskedGraph, model: ProposalModel, params: DecodeParams = DecodeParams()) -> list[tuple[Molecule, float]]:
    """Ranked ``(molecule, cum_logprob)`` completions of ``g``; see :func:`decode_beams`."""
    return [(b.molecule, b.cum_logprob) for b in decode_beams(g, model, params)]
