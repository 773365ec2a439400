"""Molecular graph model: atoms, bonds, rings, aromaticity and descriptors."""

from __future__ import annotations

from molforge.molgraph.canon import canonical_ranks
from molforge.molgraph.core import (
    IMPLICIT_H,
    Atom,
    Bond,
    BondOrder,
    Chirality,
    Molecule,
    build_molecule,
    kekule_bonds,
    permute,
)
from molforge.molgraph.descriptors import DescriptorSet, descriptors

__all__ = [
    "IMPLICIT_H",
    "Atom",
    "Bond",
    "BondOrder",
    "Chirality",
    "DescriptorSet",
    "Molecule",
    "build_molecule",
    "canonical_ranks",
    "descriptors",
    "kekule_bonds",
    "permute",
]
