from __future__ import annotations

import csv
import filecmp
import json

import pytest

from molforge.analytics import HeatCell, ingest_benchmark, ingest_scores
from molforge.campaign import (
    CampaignConfig,
    CampaignState,
    SeriesSpec,
    allocate_series,
    diversity_order,
    emit_reports,
    run_campaign,
    run_wave,
    thread_count,
    topology_delta,
    validate_spec,
)
from molforge.cli import toy_dir
from molforge.errors import ConfigError
from molforge.filters import apply_filters
from molforge.genops import train_frequency_model
from molforge.smiles import parse_smiles, read_smiles_file, write_canonical

CLBENZ = "Clc1ccccc1"
CHEX_ETHYL = "C1CCCCC1CC"
CONTRACT = ({"op": "add_bond", "begin": 0, "end": 2}, {"op": "remove_atom", "atom": 1})


def _spec(tier, script, primitive="graph_edit"):
    return SeriesSpec("s", "seed", tier, primitive, {}, tuple(script))


# ---------------------------------------------------------------- topology


def test_topology_delta_examples():
    d = topology_delta(parse_smiles("C1CCCCC1"), parse_smiles("C1CCCC1"))
    assert d.d_ring_count == 0 and d.ring_size_changed and not d.is_trivial
    d = topology_delta(parse_smiles(CLBENZ), parse_smiles("Fc1ccccc1"))
    assert d.is_trivial and d.d_fsp3 == 0.0
    d = topology_delta(parse_smiles("c1ccccc1Cc1ccccc1"), parse_smiles("c1ccccc1CCc1ccccc1"))
    assert d.linker_topology_changed and not d.ring_size_changed
    d = topology_delta(parse_smiles("c1ccccc1"), parse_smiles("C1CCCCC1"))
    assert d.dimensionality_changed and d.d_fsp3 == 1.0


def test_validate_spec_tiers():
    clbenz = parse_smiles(CLBENZ)
    swap = [{"op": "set_element", "atom": 0, "element": "F"}]
    assert not validate_spec(_spec(2, swap), 2, clbenz).accepted
    assert validate_spec(_spec(1, swap), 1, clbenz).accepted
    chex = parse_smiles(CHEX_ETHYL)
    assert validate_spec(_spec(2, CONTRACT), 2, chex).accepted
    assert not validate_spec(_spec(1, CONTRACT), 1, chex).accepted
    assert not validate_spec(_spec(2, []), 2, chex).accepted
    assert validate_spec(_spec(3, [], "link_fragments"), 3, chex).accepted
    assert not validate_spec(_spec(9, []), 9, chex).accepted
    bad = [{"op": "remove_atom", "atom": 40}]
    assert "edit failed" in validate_spec(_spec(2, bad), 2, chex).reason


def test_series_spec_round_trip():
    spec = SeriesSpec("a", "b", 2, "fragment_mask", {"atoms": [1]}, tuple(CONTRACT), {"beam_width": 4}, wave=1)
    assert SeriesSpec.from_dict(json.loads(json.dumps(spec.to_dict()))) == spec
    with pytest.raises(ConfigError):
        SeriesSpec.from_dict({"seed_id": "x"})


# ---------------------------------------------------------------- planning


def test_allocation_sums_to_total_and_favours_best_seed():
    heat = {("t1", "A"): HeatCell(1, -5.0, -5.0), ("t1", "B"): HeatCell(1, -9.0, -9.0)}
    alloc = allocate_series(heat, ["A", "B", "C"], 7)
    assert sum(alloc.values()) == 7
    assert alloc["B"] >= alloc["A"] >= alloc["C"]
    assert allocate_series({}, [], 3) == {}


def test_diversity_order_starts_from_first_seed():
    seeds = [(s, parse_smiles(s)) for s in ["c1ccccc1C", "c1ccccc1CC", "C1CCNCC1"]]
    order = diversity_order(seeds)
    assert order[0] == "c1ccccc1C" and order[1] == "C1CCNCC1"


def test_config_validation():
    with pytest.raises(ConfigError):
        CampaignConfig.from_dict({"seeds": []})
    with pytest.raises(ConfigError):
        CampaignConfig.from_dict({"seeds": [{"id": "a", "smiles": "C1CC"}]})
    with pytest.raises(ConfigError):
        CampaignConfig.from_dict({"seeds": [{"id": "a", "smiles": "C"}], "waves": [[4]]})
    with pytest.raises(ConfigError):
        CampaignConfig.from_dict({"seeds": [{"id": "a", "smiles": "C"}], "convergence_min": 5, "convergence_max": 2})


def test_thread_count_env(monkeypatch):
    monkeypatch.setenv("MOLFORGE_THREADS", "1")
    assert thread_count() == 1
    monkeypatch.setenv("MOLFORGE_THREADS", "many")
    with pytest.raises(ConfigError):
        thread_count()


def test_wave_with_no_series_leaves_library_unchanged():
    config = CampaignConfig.from_dict({"seeds": [{"id": "a", "smiles": "CCO"}]})
    seeds = {"a": parse_smiles("CCO")}
    state = CampaignState()
    run_wave(state, config, 0, seeds=seeds, model=train_frequency_model(seeds.values()), excluded=set(), specs=[])
    assert state.library == {} and state.series_stats == [] and state.wave_index == 1


def test_explicit_series_run_and_exclude_seed():
    config = CampaignConfig.from_dict({
        "seeds": [{"id": "a", "smiles": "CCCCOc1ccccc1"}],
        "waves": [[1]],
        "series": [{"series_id": "m", "seed_id": "a", "primitive": "fragment_mask", "primitive_args": {"atoms": [0]}}],
    })
    state = run_campaign(config, [])
    assert state.library
    assert write_canonical(parse_smiles("CCCCOc1ccccc1")) not in state.library
    assert all(e.series_id == "m" for e in state.library.values())


# -------------------------------------------------------------- toy campaign


def _run_toy(out, monkeypatch, threads):
    monkeypatch.setenv("MOLFORGE_THREADS", threads)
    base = toy_dir()
    config = CampaignConfig.from_json(base / "campaign.json")
    bench, _ = ingest_benchmark(base / "benchmark.csv")
    scores, _ = ingest_scores(base / "scores.csv")
    state = run_campaign(config, bench, scores)
    emit_reports(state, bench, out, scores, config=config)
    return config, bench, state


@pytest.fixture(scope="module")
def toy_runs(tmp_path_factory):
    mp = pytest.MonkeyPatch()
    try:
        a, b = tmp_path_factory.mktemp("toy_a"), tmp_path_factory.mktemp("toy_b")
        config, bench, state = _run_toy(a, mp, "4")
        _run_toy(b, mp, "1")
    finally:
        mp.undo()
    return a, b, config, bench, state


def test_toy_outputs_byte_identical_across_thread_counts(toy_runs):
    a, b, *_ = toy_runs
    names = sorted(p.name for p in a.iterdir())
    assert names == sorted(p.name for p in b.iterdir())
    match, mismatch, errors = filecmp.cmpfiles(a, b, names, shallow=False)
    assert not mismatch and not errors


def test_toy_reports_exist_and_agree(toy_runs):
    out, _, config, _, state = toy_runs
    for name in ["library.smi", "portfolio.csv", "novelty.json", "filter_report.json", "heatmap.csv",
                 "series.json", "summary.json", "calibration.json"]:
        assert (out / name).is_file(), name
    with open(out / "portfolio.csv", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == len(state.library) == len(read_smiles_file(out / "library.smi"))
    calib = json.loads((out / "calibration.json").read_text())
    assert {"spearman_rho", "roc_auc_affinity", "roc_auc_probability", "n_scored", "excluded_band_count"} <= set(calib)
    summary = json.loads((out / "summary.json").read_text())
    assert summary["molecules"] == len(rows) and summary["seeds"] == len(config.seeds)
    assert config.convergence_min <= len(rows) <= config.convergence_max


def test_toy_library_disjoint_from_seeds_and_benchmark(toy_runs):
    *_, config, bench, state = toy_runs
    forbidden = {write_canonical(parse_smiles(s.smiles)) for s in config.seeds}
    forbidden |= {write_canonical(parse_smiles(r.smiles)) for r in bench}
    assert not forbidden & set(state.library)


def test_toy_library_tiers_and_filters(toy_runs):
    *_, config, _, state = toy_runs
    assert {e.tier for e in state.library.values()} == {1, 2, 3}
    seeds = {s.id: parse_smiles(s.smiles) for s in config.seeds}
    policy = config.policy()
    for e in state.library.values():
        assert apply_filters(parse_smiles(e.smiles), seeds[e.seed_id], policy).passed
