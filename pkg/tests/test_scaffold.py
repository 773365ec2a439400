from __future__ import annotations

import random
from collections import deque

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corpus_data import BY_ID, CORPUS
from molforge.molgraph import permute
from molforge.scaffold import generic_scaffold_key, largest_fragment, murcko_atoms, murcko_scaffold
from molforge.smiles import parse_smiles, write_canonical

# Generic keys for the two div_BM_5 molecules, recorded from the extractor.
DIV_BM_KEYS = {
    "div_BM_5_1782": "CC1CC2CC(CC3CCCCC3)CC(CC34CCC4C3)C2C1",
    "div_BM_5_1773": "CC1CC2CC(CC3CCCCC3)CC(CC3CCC3)C2C1",
}


def _canon(m):
    return write_canonical(m) if m.num_atoms else ""


def test_murcko_examples():
    assert _canon(murcko_scaffold(parse_smiles("Cc1ccccc1"))) == "c1ccccc1"
    assert murcko_scaffold(parse_smiles("CCCCCC")).num_atoms == 0
    diphenylethane = murcko_scaffold(parse_smiles("c1ccccc1CCc1ccccc1"))
    assert diphenylethane.num_atoms == 14
    assert _canon(diphenylethane) == _canon(parse_smiles("c1ccccc1CCc1ccccc1"))


def test_exocyclic_double_bond_retained():
    assert _canon(murcko_scaffold(parse_smiles("CC1CCC(=O)CC1"))) == _canon(parse_smiles("O=C1CCCCC1"))


def test_generic_key_examples():
    benzene = generic_scaffold_key(parse_smiles("c1ccccc1"))
    assert generic_scaffold_key(parse_smiles("c1ccncc1")) == benzene
    assert generic_scaffold_key(parse_smiles("C1CCCCC1")) == benzene
    assert generic_scaffold_key(parse_smiles("CCCC")) == ""


def test_div_bm_keys_recorded():
    keys = {cid: generic_scaffold_key(parse_smiles(BY_ID[cid])) for cid in DIV_BM_KEYS}
    assert keys == DIV_BM_KEYS
    assert keys["div_BM_5_1782"] != keys["div_BM_5_1773"]


def test_largest_fragment_only():
    m = parse_smiles("c1ccccc1C.[Na+].[Cl-]")
    assert len(largest_fragment(m)) == 7
    assert _canon(murcko_scaffold(m)) == "c1ccccc1"


def _shortest_path_atoms(m, a, b):
    prev = {a: None}
    q = deque([a])
    while q:
        v = q.popleft()
        for w in m.neighbor_indices(v):
            if w not in prev:
                prev[w] = v
                q.append(w)
    path, v = set(), b
    while v is not None:
        path.add(v)
        v = prev[v]
    return path


@pytest.mark.parametrize("cid,smiles,_mw,_t", CORPUS)
def test_containment_and_idempotence(cid, smiles, _mw, _t):
    m = parse_smiles(smiles)
    atoms = murcko_atoms(m)
    ring_atoms = {i for i in range(m.num_atoms) if m.is_ring_atom(i)}
    assert ring_atoms <= atoms <= set(range(m.num_atoms))
    # every linker atom sits on a shortest path between two ring atoms
    linkers = atoms - ring_atoms
    covered = set()
    ring_list = sorted(ring_atoms)
    for i, a in enumerate(ring_list):
        for b in ring_list[i + 1:]:
            covered |= _shortest_path_atoms(m, a, b)
    exocyclic = {i for i in linkers if m.degree(i) == 1}  # retained =O / =C
    assert linkers - exocyclic <= covered
    s = murcko_scaffold(m)
    assert _canon(murcko_scaffold(s)) == _canon(s)


@settings(max_examples=30, deadline=None)
@given(idx=st.integers(0, len(CORPUS) - 1), seed=st.integers(0, 2**32 - 1))
def test_key_permutation_invariant(idx, seed):
    m = parse_smiles(CORPUS[idx][1])
    order = list(range(m.num_atoms))
    random.Random(seed).shuffle(order)
    assert generic_scaffold_key(permute(m, order)) == generic_scaffold_key(m)
