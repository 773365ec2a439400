from __future__ import annotations

import json
import random
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corpus_data import CORPUS
from molforge.errors import ParseError, UnsupportedFeature
from molforge.molgraph import canonical_ranks, descriptors, permute
from molforge.molgraph.core import Chirality
from molforge.smiles import (
    SmilesDialect,
    canonicalize,
    iter_smiles_records,
    parse_smiles,
    read_smiles_file,
    write_canonical,
    write_smiles_file,
)

# Canonical strings produced by this writer for the corpus, frozen so that
# accidental changes to the ranking or traversal are caught.
GOLDEN_PATH = Path(__file__).parent / "data" / "canonical_corpus.json"


def test_ethanol_basics():
    m = parse_smiles("CCO")
    assert m.num_atoms == 3
    assert sum(a.element == 8 for a in m.atoms) == 1
    assert write_canonical(parse_smiles("OCC")) == write_canonical(m)
    assert write_canonical(parse_smiles("C")) == "C"


def test_unclosed_ring_reports_label():
    with pytest.raises(ParseError, match="unclosed ring closure 1"):
        parse_smiles("C1CC")


@pytest.mark.parametrize("text", ["", "C(", "C)", "[Xx]", "C%1", "C==C", "c1cccc1", "C1CC1C1", "[C@H"])
def test_malformed_inputs_raise_parse_error(text):
    with pytest.raises(ParseError):
        parse_smiles(text)


def test_wildcard_is_unsupported():
    with pytest.raises(UnsupportedFeature):
        parse_smiles("*C")


def test_dialect_drops_stereo_and_isotopes():
    m = parse_smiles("F[C@](Cl)(Br)I", SmilesDialect(accept_stereo=False))
    assert m.atoms[1].chirality is Chirality.NONE
    assert parse_smiles("[13CH4]", SmilesDialect(accept_isotopes=False)).atoms[0].isotope is None
    assert parse_smiles("[13CH4]").atoms[0].isotope == 13


@pytest.mark.parametrize("cid,smiles,_mw,_t", CORPUS)
def test_round_trip_preserves_graph(cid, smiles, _mw, _t):
    m = parse_smiles(smiles)
    text = write_canonical(m)
    again = parse_smiles(text)
    assert write_canonical(again) == text
    assert sorted(canonical_ranks(again)) == sorted(canonical_ranks(m))
    assert descriptors(again) == descriptors(m)


def test_canonical_strings_frozen():
    golden = json.loads(GOLDEN_PATH.read_text())
    assert {cid: canonicalize(smi) for cid, smi, _, _ in CORPUS} == golden


@pytest.mark.parametrize(
    "a,b",
    [
        ("N[C@@H](C)O", "C[C@H](N)O"),
        ("F[C@](Cl)(Br)I", "Cl[C@@](F)(Br)I"),
        ("C[C@H]1CC[C@@H](C)CC1", "C[C@@H]1CC[C@H](C)CC1"),
    ],
)
def test_equivalent_stereo_spellings_agree(a, b):
    assert canonicalize(a) == canonicalize(b)


def test_enantiomers_differ():
    assert canonicalize("N[C@@H](C)O") != canonicalize("N[C@H](C)O")


@settings(max_examples=60, deadline=None)
@given(idx=st.integers(0, len(CORPUS) - 1), seed=st.integers(0, 2**32 - 1))
def test_writer_independent_of_atom_order(idx, seed):
    m = parse_smiles(CORPUS[idx][1])
    order = list(range(m.num_atoms))
    random.Random(seed).shuffle(order)
    assert write_canonical(permute(m, order)) == write_canonical(m)


@settings(max_examples=300, deadline=None)
@given(st.binary(max_size=40))
def test_parser_total_on_arbitrary_bytes(data):
    try:
        parse_smiles(data)
    except ParseError:
        pass


@settings(max_examples=300, deadline=None)
@given(st.text(alphabet="CNOcnos()[]=#123%@+-HBrl.", max_size=25))
def test_parser_total_on_smiles_alphabet(text):
    try:
        m = parse_smiles(text)
    except ParseError:
        return
    assert write_canonical(parse_smiles(write_canonical(m))) == write_canonical(m)


def test_record_iteration_skips_comments():
    lines = ["# header\n", "CCO\tethanol\n", "\n", "c1ccccc1 benzene\n", "C\n"]
    assert list(iter_smiles_records(lines)) == [(2, "CCO", "ethanol"), (4, "c1ccccc1", "benzene"), (5, "C", "line5")]


def test_file_round_trip(tmp_path):
    path = tmp_path / "lib.smi"
    mols = [parse_smiles(s, name=cid) for cid, s, _, _ in CORPUS[:4]]
    write_smiles_file(path, mols)
    back = read_smiles_file(path)
    assert [m.name for m in back] == [m.name for m in mols]
    assert [write_canonical(m) for m in back] == [write_canonical(m) for m in mols]


def test_file_reader_skip_invalid(tmp_path):
    path = tmp_path / "bad.smi"
    path.write_text("CCO\ta\nC1CC\tb\nCN\tc\n", encoding="utf-8")
    with pytest.raises(ParseError, match="line 2"):
        read_smiles_file(path)
    assert [m.name for m in read_smiles_file(path, skip_invalid=True)] == ["a", "c"]
