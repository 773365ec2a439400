from __future__ import annotations

import dataclasses
import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corpus_data import CORPUS, SMALL
from molforge.errors import ConfigError, MissingParent
from molforge.filters import FilterPolicy, Verdict, apply_filters, batch_filter, summarize_reports
from molforge.smiles import parse_smiles
from molforge.substructure import find_matches

# EZH2-style T-shape aniline extended with a difluorophenol amide: 682.2 Da.
T_SHAPE_682 = "CSc1cc(C)[nH]c(=O)c1CNC(=O)c1cc(Cl)c(N(C)c2ccc(N3CCN(C(=O)c4cc(F)c(O)c(F)c4)CC3)cc2)cc1C"

DEFAULT = FilterPolicy()


def _verdict(smiles, parent=None, policy=DEFAULT):
    return apply_filters(parse_smiles(smiles), parse_smiles(parent) if parent else None, policy)


@pytest.mark.parametrize("cid,smiles,_mw,_t", CORPUS)
def test_portfolio_passes_default_policy(cid, smiles, _mw, _t):
    assert _verdict(smiles).passed


@pytest.mark.parametrize(
    "smiles,reason",
    [
        ("O=[N+]([O-])c1ccccc1", "nitro"),
        ("C1CCCCCCC1", "largest_ring"),
        ("CCCN=[N+]=[N-]", "azide"),
        ("C#CCCO", "terminal_alkyne"),
        ("CN1C2CCC1CC(O)C2", "tropane"),
        ("CC[Si](C)(C)C", None),
        ("C[Sn](C)(C)C", "element_Sn"),
        ("C[N+](C)(C)C.C[N+](C)(C)C", "formal_charge"),
    ],
)
def test_rejections(smiles, reason):
    rep = _verdict(smiles)
    if reason is None:
        assert rep.passed
    else:
        assert rep.verdict is Verdict.REJECT
        assert reason in rep.reject_reasons


def test_aniline_is_flagged_not_rejected():
    rep = _verdict("Nc1ccccc1")
    assert rep.verdict is Verdict.PASS_FLAGGED
    assert rep.soft_flags == ("aniline",)


def test_t_shape_fails_on_mw_only():
    rep = _verdict(T_SHAPE_682)
    assert rep.verdict is Verdict.REJECT
    assert [v[0] for v in rep.threshold_violations] == ["mw"]
    assert rep.descriptors.mw == pytest.approx(682.18, abs=0.01)


def test_stereocenter_cap_relative_to_parent():
    parent = "CC(O)CC"  # one stereocentre
    child_ok = "CC(O)C(O)C(O)C"  # three
    child_bad = "CC(O)C(O)C(O)C(O)CC"  # four = parent + 3
    assert _verdict(child_ok, parent).passed
    rep = _verdict(child_bad, parent)
    assert rep.verdict is Verdict.REJECT and "stereocenters" in rep.reject_reasons
    assert _verdict(child_bad).passed  # no parent: cap skipped
    with pytest.raises(MissingParent):
        _verdict(child_bad, policy=dataclasses.replace(DEFAULT, require_parent=True))


def test_clean_pass():
    assert _verdict("CCO").verdict is Verdict.PASS_CLEAN


def test_short_circuit_same_verdict():
    for smi in SMALL:
        m = parse_smiles(smi)
        assert apply_filters(m, full_report=False).verdict is apply_filters(m).verdict


def test_batch_three_nitro_in_ten():
    smiles = ["CCO", "CCN", "c1ccccc1O", "CC(=O)N", "CCOC", "CCCC", "C1CCCCC1"]
    smiles += ["O=[N+]([O-])c1ccccc1", "CC[N+](=O)[O-]", "O=[N+]([O-])c1ccc(C)cc1"]
    kept, stats, reports = batch_filter([parse_smiles(s) for s in smiles])
    assert stats.attrition == pytest.approx(0.3)
    assert stats.reasons == {"nitro": 3}
    assert len(kept) == 7 and len(reports) == 10


def test_batch_edge_cases():
    kept, stats, reports = batch_filter([])
    assert kept == [] and reports == [] and (stats.total, stats.retained, stats.attrition) == (0, 0, 0.0)
    kept, stats, _ = batch_filter([parse_smiles("CCO"), parse_smiles("CCC")])
    assert stats.attrition == 0.0 and stats.reasons == {}


def test_summary_fields():
    reps = [_verdict(s) for s in ["CCO", "Nc1ccccc1", "Nc1ccc(O)cc1", "O=[N+]([O-])c1ccccc1"]]
    assert summarize_reports(reps) == {
        "scored": 4,
        "pass_hard": 3,
        "pct_soft_flags": 66.7,
        "most_common_flag": {"flag": "aniline", "count": 2},
        "clean": 1,
    }


@pytest.mark.parametrize("smiles", SMALL)
def test_hard_hits_reproducible_with_patterns(smiles):
    m = parse_smiles(smiles)
    rep = apply_filters(m)
    by_name = {}
    for a in DEFAULT.hard_alerts:
        by_name.setdefault(a.name, []).append(a)
    for name, count in rep.hard_hits:
        if name in by_name:
            assert sum(len(a.sites(m)) for a in by_name[name]) == count
            assert any(find_matches(a.pattern, m) for a in by_name[name])


@settings(max_examples=60, deadline=None)
@given(smiles=st.sampled_from(SMALL + [s for _, s, _, _ in CORPUS]), drop=st.sets(st.integers(0, 16), max_size=8))
def test_removing_alerts_never_rejects_more(smiles, drop):
    m = parse_smiles(smiles)
    full = apply_filters(m)
    hard = tuple(a for i, a in enumerate(DEFAULT.hard_alerts) if i not in drop)
    reduced = apply_filters(m, policy=dataclasses.replace(DEFAULT, hard_alerts=hard))
    assert not (full.passed and not reduced.passed)
    assert apply_filters(m) == full  # deterministic


def test_policy_from_json(tmp_path):
    catalog = tmp_path / "alerts.json"
    catalog.write_text(json.dumps([{"name": "ketone", "smarts": "[#6][CX3](=O)[#6]", "severity": "hard"}]))
    path = tmp_path / "policy.json"
    path.write_text(json.dumps({"mw_max": 500, "catalog": "alerts.json", "allowed_elements": ["C", "H", "O"]}))
    policy = FilterPolicy.from_json(path)
    assert policy.mw_max == 500
    assert [a.name for a in policy.hard_alerts] == ["ketone"]
    assert "ketone" in apply_filters(parse_smiles("CC(C)=O"), policy=policy).reject_reasons
    assert "element_N" in apply_filters(parse_smiles("CCN"), policy=policy).reject_reasons


@pytest.mark.parametrize("data", [{"mw_max": -1}, {"bogus": 1}, {"allowed_elements": ["Qq"]}])
def test_policy_validation(data):
    with pytest.raises(ConfigError):
        FilterPolicy.from_dict(data)
