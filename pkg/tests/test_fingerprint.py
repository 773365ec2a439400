from __future__ import annotations

import random
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corpus_data import BY_ID, CORPUS, SMALL
from molforge.errors import EmptyReferenceSet, WidthMismatch
from molforge.fingerprint import (
    Fingerprint,
    max_similarity,
    morgan_fingerprint,
    morgan_identifiers,
    read_fingerprint_dump,
    tanimoto,
    write_fingerprint_dump,
)
from molforge.molgraph import permute
from molforge.smiles import parse_smiles

GOLDEN = Path(__file__).parent / "data" / "golden_fingerprints.txt"

bitsets = st.sets(st.integers(0, 2047), max_size=60)


def test_golden_fingerprints_bit_exact():
    golden = read_fingerprint_dump(GOLDEN)
    assert len(golden) == 10
    for ident, fp in golden:
        assert morgan_fingerprint(parse_smiles(BY_ID[ident])) == fp, ident


def test_dump_round_trip(tmp_path):
    items = [(cid, morgan_fingerprint(parse_smiles(s))) for cid, s, _, _ in CORPUS[:3]]
    path = tmp_path / "fp.txt"
    write_fingerprint_dump(path, items)
    assert read_fingerprint_dump(path) == items


def test_methane_radius_zero_single_bit():
    assert morgan_fingerprint(parse_smiles("C"), radius=0).popcount == 1


def test_benzene_symmetry():
    levels = morgan_identifiers(parse_smiles("c1ccccc1"), radius=2)
    assert [len(l) for l in levels] == [1, 1, 1]
    assert morgan_fingerprint(parse_smiles("c1ccccc1")).popcount <= 3


def test_tanimoto_examples():
    a = Fingerprint.from_positions([1, 2, 3])
    b = Fingerprint.from_positions([2, 3, 4])
    assert tanimoto(a, b) == 0.5
    assert tanimoto(a, a) == 1.0
    assert tanimoto(a, Fingerprint.from_positions([7, 8])) == 0.0
    assert tanimoto(Fingerprint(0), Fingerprint(0)) == 1.0
    with pytest.raises(WidthMismatch):
        tanimoto(a, Fingerprint.from_positions([1], width=1024))


def test_width_and_popcount():
    fp = morgan_fingerprint(parse_smiles(BY_ID["SP1_fm_0599"]))
    assert len(fp) == 2048
    assert fp.popcount == len(fp.on_bits())


def test_max_similarity_examples():
    fps = [morgan_fingerprint(parse_smiles(s)) for s in SMALL[:8]]
    assert max_similarity(fps[5], fps) == (1.0, 5)
    with pytest.raises(EmptyReferenceSet):
        max_similarity(fps[0], [])


def test_max_similarity_equals_linear_scan():
    rng = random.Random(3)
    refs = [Fingerprint.from_positions(rng.sample(range(2048), rng.randint(1, 80))) for _ in range(50)]
    for _ in range(20):
        q = Fingerprint.from_positions(rng.sample(range(2048), rng.randint(1, 80)))
        qs = set(q.on_bits())
        scores = [len(qs & set(r.on_bits())) / len(qs | set(r.on_bits())) for r in refs]
        best = max(scores)
        assert max_similarity(q, refs) == (best, scores.index(best))


def test_seed_vs_generated_family_in_open_interval():
    seed = parse_smiles(BY_ID["RC1_fm_0313"])
    analog = parse_smiles("Cc1ncnc(Nc2ccc3c(c2)c2c(c(=O)n3C)OC(F)(F)[C@H](C3CC3)N2)c1Cl")
    s = tanimoto(morgan_fingerprint(seed), morgan_fingerprint(analog))
    assert 0.0 < s < 1.0


@settings(max_examples=100, deadline=None)
@given(bitsets, bitsets)
def test_tanimoto_symmetric_and_bounded(a, b):
    fa, fb = Fingerprint.from_positions(a), Fingerprint.from_positions(b)
    assert tanimoto(fa, fb) == tanimoto(fb, fa)
    assert 0.0 <= tanimoto(fa, fb) <= 1.0
    assert tanimoto(fa, fa) == 1.0


@settings(max_examples=30, deadline=None)
@given(idx=st.integers(0, len(CORPUS) - 1), seed=st.integers(0, 2**32 - 1))
def test_permutation_invariance(idx, seed):
    m = parse_smiles(CORPUS[idx][1])
    order = list(range(m.num_atoms))
    random.Random(seed).shuffle(order)
    assert morgan_fingerprint(permute(m, order)) == morgan_fingerprint(m)


@pytest.mark.parametrize("cid,smiles,_mw,_t", CORPUS)
def test_folding_only_merges(cid, smiles, _mw, _t):
    m = parse_smiles(smiles)
    wide, narrow = morgan_fingerprint(m, width=4096), morgan_fingerprint(m, width=2048)
    assert {b % 2048 for b in wide.on_bits()} == set(narrow.on_bits())
    assert narrow.popcount <= wide.popcount
