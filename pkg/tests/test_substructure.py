from __future__ import annotations

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corpus_data import CORPUS, SMALL
from molforge.errors import ParseError, SchemaError, UnsupportedFeature
from molforge.smiles import SmilesDialect, parse_smiles, write_canonical
from molforge.substructure import (
    count_matches,
    default_catalog,
    find_matches,
    has_match,
    iter_mappings,
    load_catalog,
    match_alerts,
    parse_pattern,
)
from oracles import brute_force_mappings

# Literature structures that each alert must flag.
POSITIVE_CONTROLS = {
    "nitro": "O=[N+]([O-])c1ccccc1",
    "aldehyde": "CC=O",
    "epoxide": "C1CO1",
    "aziridine": "C1CN1",
    "azide": "CCN=[N+]=[N-]",
    "acyl_halide": "CC(=O)Cl",
    "sulfonyl_halide": "CS(=O)(=O)Cl",
    "hydrazine": "CNNC",
    "isocyanate": "CN=C=O",
    "anhydride": "CC(=O)OC(C)=O",
    "peroxide": "COOC",
    "disulfide": "CSSC",
    "alkyl_halide": "CCCBr",
    "azo": "c1ccccc1N=Nc1ccccc1",
    "tropane": "CN1C2CCC1CC(O)C2",
    "terminal_alkyne": "C#CCO",
    "aniline": "Nc1ccccc1",
    "phenol": "Oc1ccccc1",
    "thiol": "CCS",
    "michael_acceptor": "C=CC(C)=O",
    "acyl_hydrazine": "CC(=O)NN",
    "sulfonamide": "CS(N)(=O)=O",
    "enol_ether": "C=COC",
    "halopyridine": "Clc1ccccn1",
    "phosphonate": "CP(=O)(OC)OC",
    "diazo": "C=[N+]=[N-]",
}


def test_parse_examples():
    nitro = parse_pattern("[N+](=O)[O-]")
    assert nitro.num_atoms == 3 and len(nitro.bonds) == 2
    ald = parse_pattern("[CX3H1]=O")
    assert has_match(ald, parse_smiles("CC=O"))
    assert not has_match(ald, parse_smiles("CC(C)=O"))


@pytest.mark.parametrize("text", ["[$(cc)]", "C.C", "[C@H]"])
def test_declared_unsupported_features(text):
    with pytest.raises(UnsupportedFeature):
        parse_pattern(text)


@pytest.mark.parametrize("text", ["", "C(", "[C", "C1CC", "C>>C"])
def test_bad_patterns(text):
    with pytest.raises(ParseError):
        parse_pattern(text)


def test_find_matches_examples():
    assert len(find_matches("[N+](=O)[O-]", parse_smiles("O=[N+]([O-])c1ccccc1"))) == 1
    assert count_matches("c1ccccc1", parse_smiles("C1CCCCC1")) == 0
    assert count_matches("c", parse_smiles("c1ccccc1")) == 6
    assert has_match("C1OC1", parse_smiles("C1CO1"))
    assert not has_match("C1OC1", parse_smiles("C1COC1"))


def test_unique_flag_keeps_automorphisms():
    benzene = parse_smiles("c1ccccc1")
    assert len(find_matches("c1ccccc1", benzene)) == 1
    assert len(find_matches("c1ccccc1", benzene, unique=False)) == 12
    assert len(find_matches("c", benzene, limit=2)) == 2


@pytest.mark.parametrize("name", sorted(POSITIVE_CONTROLS))
def test_alert_positive_controls(name):
    m = parse_smiles(POSITIVE_CONTROLS[name])
    fired = {a.name for a, _ in match_alerts(m, default_catalog())}
    assert name in fired


def test_every_catalog_name_has_a_control():
    assert {a.name for a in default_catalog()} == set(POSITIVE_CONTROLS)


@pytest.mark.parametrize(
    "name,smiles",
    [("hydrazine", "CC(=O)NNC"), ("aniline", "CC(=O)Nc1ccccc1"), ("halopyridine", "Clc1cccnc1")],
)
def test_alert_exclusions(name, smiles):
    fired = {a.name for a, _ in match_alerts(parse_smiles(smiles), default_catalog())}
    assert name not in fired


@pytest.mark.parametrize("smiles", SMALL)
def test_matcher_equals_brute_force_oracle(smiles):
    m = parse_smiles(smiles)
    assert m.num_atoms <= 12
    for alert in default_catalog():
        p = alert.pattern
        assert set(iter_mappings(p, m)) == brute_force_mappings(p, m), alert.name


@pytest.mark.parametrize("cid,smiles,_mw,_t", CORPUS)
def test_self_match(cid, smiles, _mw, _t):
    # stereo SMARTS is outside the subset, so the query is the flat graph
    m = parse_smiles(smiles)
    flat = write_canonical(parse_smiles(smiles, SmilesDialect(accept_stereo=False)))
    assert has_match(flat, m)


@settings(max_examples=80, deadline=None)
@given(
    smiles=st.sampled_from(SMALL),
    base=st.sampled_from(["C", "c", "N", "O", "[#6]", "*", "[R]"]),
    extra=st.sampled_from(["H1", "H2", "X3", "X4", "R", "!R", "D1", "D2", "+0", "a", "A"]),
)
def test_adding_predicate_never_increases_matches(smiles, base, extra):
    m = parse_smiles(smiles)
    inner = base[1:-1] if base.startswith("[") else base
    narrowed = f"[{inner};{extra}]"
    assert count_matches(narrowed, m) <= count_matches(base, m)


def test_catalog_loading(tmp_path):
    good = tmp_path / "alerts.json"
    good.write_text(json.dumps([{"name": "x", "smarts": "C=O", "severity": "hard"}]))
    assert [a.name for a in load_catalog(good)] == ["x"]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps([{"name": "x", "smarts": "C=O", "severity": "medium"}]))
    with pytest.raises(SchemaError):
        load_catalog(bad)
    broken = tmp_path / "broken.json"
    broken.write_text(json.dumps([{"name": "x", "smarts": "C(", "severity": "hard"}]))
    with pytest.raises(ParseError):
        load_catalog(broken)
