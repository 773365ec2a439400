"""Campaign orchestration: waves of generation series feeding a convergence library.

A campaign starts from seed molecules and runs waves of strategy tiers:

* tier 1 (conservative): peripheral masks and decoration of the seed's core;
* tier 2 (moderate): one topology-changing graph edit, then a mask;
* tier 3 (exploratory): two edits, or a chimera linking two seeds' cores.

Every series decodes, filters (parent = its seed), and merges survivors
into a library keyed by canonical SMILES that never contains a seed or a
benchmark structure. The "analyst", "evaluator" and "optimizer" roles are
plain deterministic rules: spec planning and validation, the filter
module, and heatmap-driven allocation of series to seeds.
"""

from __future__ import annotations

import concurrent.futures
import csv
import dataclasses
import json
import logging
import math
import os
import random
from collections import Counter
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path

from molforge.analytics import (
    BenchmarkRecord,
    HeatCell,
    ScoredRecord,
    calibrate,
    heatmap_csv,
    novelty_analysis,
    strategy_heatmap,
)
from molforge.errors import ConfigError, DecodeExhausted, MolforgeError
from molforge.filters import FilterPolicy, FilterReport, batch_filter, summarize_reports
from molforge.fingerprint import morgan_fingerprint, tanimoto
from molforge.genops import (
    DecodeParams,
    MaskedGraph,
    ProposalModel,
    decode,
    fragment_mask,
    graph_edit,
    link_fragments,
    scaffold_decorate,
    train_frequency_model,
)
from molforge.molgraph import Atom, Molecule, build_molecule
from molforge.molgraph.descriptors import DescriptorSet, descriptors, fsp3
from molforge.scaffold import generic_scaffold, murcko_atoms, murcko_scaffold
from molforge.smiles import parse_smiles, write_canonical

__all__ = [
    "StrategyTier",
    "TIERS",
    "TopologyDelta",
    "topology_delta",
    "SpecVerdict",
    "validate_spec",
    "SeriesSpec",
    "SeriesResult",
    "CampaignConfig",
    "CampaignState",
    "LibraryEntry",
    "run_series",
    "plan_wave",
    "run_wave",
    "run_campaign",
    "emit_reports",
    "diversity_order",
    "allocate_series",
    "thread_count",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class StrategyTier:
    tier: int
    description: str


TIERS = {
    1: StrategyTier(1, "conservative: peripheral masks and core decoration"),
    2: StrategyTier(2, "moderate: one topology-changing edit followed by a mask"),
    3: StrategyTier(3, "exploratory: multi-edit transformations or cross-seed chimeras"),
}


# ------------------------------------------------------------ topology delta


@dataclass(frozen=True, slots=True)
class TopologyDelta:
    d_ring_count: int
    ring_size_changed: bool
    d_fsp3: float
    linker_topology_changed: bool
    dimensionality_changed: bool = False

    @property
    def is_trivial(self) -> bool:
        """True when none of ring count, ring size, dimensionality or linker topology moved."""
        return not (
            self.d_ring_count or self.ring_size_changed or self.dimensionality_changed or self.linker_topology_changed
        )


_RING_NODE = 54  # placeholder element for a collapsed ring system (valence unchecked)


def _ring_systems(m: Molecule) -> list[set[int]]:
    systems: list[set[int]] = []
    for ring in m.rings:
        merged = set(ring)
        rest = []
        for s in systems:
            if s & merged:
                merged |= s
            else:
                rest.append(s)
        systems = rest + [merged]
    return systems


def linker_key(m: Molecule) -> str:
    """Canonical form of the Murcko framework with each ring system collapsed to one node.

    Ring count and ring sizes drop out; what remains is how ring systems are
    joined and how long the joining chains are.
    """
    g = generic_scaffold(m)
    if g.num_atoms == 0:
        return ""
    node_of = {}
    systems = sorted(_ring_systems(g), key=min)
    for s_idx, s in enumerate(systems):
        for a in s:
            node_of[a] = s_idx
    n = len(systems)
    for a in range(g.num_atoms):
        if a not in node_of:
            node_of[a] = n
            n += 1
    atoms = [Atom(element=_RING_NODE if k < len(systems) else 6, bracket=True) for k in range(n)]
    edges = set()
    for b in g.bonds:
        u, v = node_of[b.begin], node_of[b.end]
        if u != v:
            edges.add((min(u, v), max(u, v)))
    reduced = build_molecule(atoms, sorted(edges), strict=False)
    return write_canonical(reduced)


def _fsp3_bucket(value: float) -> int:
    return math.floor(round(value * 10, 9))


def topology_delta(parent: Molecule, child: Molecule) -> TopologyDelta:
    """Structural change from ``parent`` to ``child``.

    Ring sizes compare as sorted multisets; dimensionality counts as changed
    when fsp3 crosses a 0.1-wide bucket boundary; linker topology compares
    :func:`linker_key`.
    """
    f_p, f_c = fsp3(parent), fsp3(child)
    return TopologyDelta(
        d_ring_count=len(child.rings) - len(parent.rings),
        ring_size_changed=sorted(len(r) for r in parent.rings) != sorted(len(r) for r in child.rings),
        d_fsp3=f_c - f_p,
        linker_topology_changed=linker_key(parent) != linker_key(child),
        dimensionality_changed=_fsp3_bucket(f_p) != _fsp3_bucket(f_c),
    )


@dataclass(frozen=True, slots=True)
class SpecVerdict:
    accepted: bool
    reason: str = ""
    delta: TopologyDelta | None = None


# ------------------------------------------------------------------- series


@dataclass(frozen=True)
class SeriesSpec:
    """One generation series.

    ``primitive`` is ``fragment_mask``, ``scaffold_decorate``,
    ``link_fragments`` or ``graph_edit``. ``edit_script`` is applied to the
    seed first; primitive indices then refer to the edited molecule (or to
    its Murcko core for ``scaffold_decorate``/``link_fragments`` with
    ``"core": "murcko"``).
    """

    series_id: str
    seed_id: str
    tier: int
    primitive: str
    primitive_args: Mapping = field(default_factory=dict)
    edit_script: tuple[Mapping, ...] = ()
    decode_params: Mapping = field(default_factory=dict)
    partner_seed_id: str | None = None
    wave: int | None = None

    def to_dict(self) -> dict:
        d = {
            "series_id": self.series_id,
            "seed_id": self.seed_id,
            "tier": self.tier,
            "primitive": self.primitive,
            "primitive_args": dict(self.primitive_args),
            "edit_script": [dict(e) for e in self.edit_script],
            "decode_params": dict(self.decode_params),
        }
        if self.partner_seed_id:
            d["partner_seed_id"] = self.partner_seed_id
        if self.wave is not None:
            d["wave"] = self.wave
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> SeriesSpec:
        try:
            return cls(
                series_id=str(d["series_id"]),
                seed_id=str(d["seed_id"]),
                tier=int(d.get("tier", 1)),
                primitive=str(d["primitive"]),
                primitive_args=dict(d.get("primitive_args", {})),
                edit_script=tuple(d.get("edit_script", ())),
                decode_params=dict(d.get("decode_params", {})),
                partner_seed_id=d.get("partner_seed_id"),
                wave=None if d.get("wave") is None else int(d["wave"]),
            )
        except KeyError as exc:
            raise ConfigError(f"series spec missing key {exc.args[0]!r}") from None


def validate_spec(spec: SeriesSpec, tier: StrategyTier | int, parent: Molecule) -> SpecVerdict:
    """Check a spec's scripted edit against its tier.

    Tier 1 must leave topology alone (peripheral swaps are fine). Tiers 2
    and 3 must change at least one of ring count, ring size,
    dimensionality or linker topology; chimeras (``link_fragments``) pass
    by construction.
    """
    t = tier.tier if isinstance(tier, StrategyTier) else int(tier)
    if t not in TIERS:
        return SpecVerdict(False, f"unknown tier {t}")
    if t == 3 and spec.primitive == "link_fragments":
        return SpecVerdict(True, "chimera")
    if t >= 2 and not spec.edit_script:
        return SpecVerdict(False, "tier requires a topology-changing edit")
    if not spec.edit_script:
        return SpecVerdict(True)
    try:
        edited = graph_edit(parent, spec.edit_script)
    except (MolforgeError, IndexError) as exc:
        return SpecVerdict(False, f"edit failed: {exc}")
    delta = topology_delta(parent, edited)
    if t == 1 and not delta.is_trivial:
        return SpecVerdict(False, "tier 1 must preserve topology", delta)
    if t >= 2 and delta.is_trivial:
        return SpecVerdict(False, "trivial edit: no ring, ring-size, dimensionality or linker change", delta)
    return SpecVerdict(True, "", delta)


def _core_and_map(m: Molecule) -> tuple[Molecule, list[int]]:
    keep = sorted(murcko_atoms(m))
    return murcko_scaffold(m), keep


def build_masked(spec: SeriesSpec, seeds: Mapping[str, Molecule]) -> tuple[Molecule, list[MaskedGraph]]:
    """Parent molecule (the seed) and the masked graphs a spec asks for.

    A bare ``graph_edit`` series yields a graph with nothing masked, which
    decodes to the edited molecule itself.
    """
    if spec.seed_id not in seeds:
        raise ConfigError(f"series {spec.series_id}: unknown seed {spec.seed_id!r}")
    parent = seeds[spec.seed_id]
    mol = graph_edit(parent, spec.edit_script) if spec.edit_script else parent
    args = dict(spec.primitive_args)
    if spec.primitive == "fragment_mask":
        return parent, [fragment_mask(mol, args["atoms"])]
    if spec.primitive == "scaffold_decorate":
        core = murcko_scaffold(mol) if args.get("core", "murcko") == "murcko" else mol
        return parent, [scaffold_decorate(core, args["attachment_points"], int(args.get("growth_budget", 1)))]
    if spec.primitive == "link_fragments":
        partner_id = spec.partner_seed_id or args.get("partner")
        if partner_id not in seeds:
            raise ConfigError(f"series {spec.series_id}: unknown partner seed {partner_id!r}")
        a = murcko_scaffold(mol) if args.get("core", "murcko") == "murcko" else mol
        b = murcko_scaffold(seeds[partner_id]) if args.get("core", "murcko") == "murcko" else seeds[partner_id]
        lo, hi = args.get("linker_len_range", (1, 2))
        return parent, link_fragments(a, args["a_site"], b, args["b_site"], (int(lo), int(hi)))
    if spec.primitive == "graph_edit":
        return parent, [scaffold_decorate(mol, [], 0, allow_identity=True)]
    raise ConfigError(f"series {spec.series_id}: unknown primitive {spec.primitive!r}")


@dataclass(frozen=True, slots=True)
class SeriesResult:
    spec: SeriesSpec
    products: tuple[tuple[Molecule, float], ...] = ()
    failure: str = ""


def run_series(spec: SeriesSpec, seeds: Mapping[str, Molecule], model: ProposalModel, params: DecodeParams) -> SeriesResult:
    """Decode every masked graph of a series and pool the products (best logprob per structure)."""
    try:
        _, graphs = build_masked(spec, seeds)
        best: dict[str, tuple[Molecule, float]] = {}
        failures = 0
        for g in graphs:
            try:
                out = decode(g, model, params)
            except DecodeExhausted:
                failures += 1
                continue
            for m, lp in out:
                key = write_canonical(m)
                if key not in best or lp > best[key][1]:
                    best[key] = (m, lp)
        if not best:
            return SeriesResult(spec, (), "decode exhausted" if failures else "no products")
        ranked = sorted(best.items(), key=lambda kv: (-kv[1][1], kv[0]))
        return SeriesResult(spec, tuple(v for _, v in ranked))
    except (MolforgeError, IndexError, KeyError, ValueError) as exc:
        return SeriesResult(spec, (), f"{type(exc).__name__}: {exc}")


# ------------------------------------------------------------------ config


@dataclass(frozen=True)
class SeedEntry:
    id: str
    smiles: str
    family: str = ""


@dataclass(frozen=True)
class CampaignConfig:
    seeds: tuple[SeedEntry, ...]
    waves: tuple[tuple[int, ...], ...] = ((1,), (2,), (3,))
    convergence_min: int = 1000
    convergence_max: int = 2000
    filter_policy: str | None = None
    decode_params: Mapping[int, DecodeParams] = field(default_factory=dict)
    rng_seed: int = 0
    series_per_seed: int = 2
    max_molecules_per_wave: int | None = None
    series: tuple[SeriesSpec, ...] = ()
    name: str = "campaign"
    base_dir: str = "."

    def __post_init__(self) -> None:
        if not self.seeds:
            raise ConfigError("campaign needs at least one seed")
        if self.convergence_min > self.convergence_max:
            raise ConfigError("convergence_min must not exceed convergence_max")
        if self.convergence_max < 1:
            raise ConfigError("convergence_max must be >= 1")
        ids = [s.id for s in self.seeds]
        if len(set(ids)) != len(ids):
            raise ConfigError("seed ids must be unique")
        for wave in self.waves:
            for t in wave:
                if t not in TIERS:
                    raise ConfigError(f"unknown tier {t} in waves")
        for s in self.seeds:
            try:
                parse_smiles(s.smiles)
            except MolforgeError as exc:
                raise ConfigError(f"seed {s.id}: {exc}") from None

    def params_for(self, tier: int) -> DecodeParams:
        return self.decode_params.get(tier, DecodeParams())

    def policy(self) -> FilterPolicy:
        if not self.filter_policy:
            return FilterPolicy()
        path = Path(self.filter_policy)
        if not path.is_absolute():
            path = Path(self.base_dir) / path
        return FilterPolicy.from_json(path)

    @classmethod
    def from_dict(cls, data: Mapping, base_dir: str | Path = ".") -> CampaignConfig:
        try:
            seeds = tuple(SeedEntry(str(s["id"]), str(s["smiles"]), str(s.get("family", ""))) for s in data["seeds"])
            params = {}
            for tier, p in dict(data.get("decode_params", {})).items():
                params[int(tier)] = DecodeParams.from_dict(p)
            return cls(
                seeds=seeds,
                waves=tuple(tuple(int(t) for t in w) for w in data.get("waves", [[1], [2], [3]])),
                convergence_min=int(data.get("convergence_min", 1000)),
                convergence_max=int(data.get("convergence_max", 2000)),
                filter_policy=data.get("filter_policy"),
                decode_params=params,
                rng_seed=int(data.get("rng_seed", 0)),
                series_per_seed=int(data.get("series_per_seed", 2)),
                max_molecules_per_wave=data.get("max_molecules_per_wave"),
                series=tuple(SeriesSpec.from_dict(s) for s in data.get("series", [])),
                name=str(data.get("name", "campaign")),
                base_dir=str(base_dir),
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"bad campaign config: {exc}") from None

    @classmethod
    def from_json(cls, path: str | Path) -> CampaignConfig:
        with open(path, encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}: invalid JSON ({exc})") from None
        return cls.from_dict(data, Path(path).parent)


# -------------------------------------------------------------------- state


@dataclass(frozen=True, slots=True)
class LibraryEntry:
    smiles: str
    series_id: str
    seed_id: str
    tier: int
    wave: int
    logprob: float
    affinity: float | None = None

    @property
    def rank_score(self) -> float:
        """Lower is better: predicted affinity when known, else negative log probability."""
        return self.affinity if self.affinity is not None else -self.logprob


@dataclass
class CampaignState:
    wave_index: int = 0
    library: dict[str, LibraryEntry] = field(default_factory=dict)
    series_stats: list[dict] = field(default_factory=list)
    reports: list[FilterReport] = field(default_factory=list)
    reject_reasons: Counter = field(default_factory=Counter)
    n_filtered: int = 0
    n_retained: int = 0
    n_trimmed: int = 0

    def heatmap(self) -> dict[tuple[str, str], HeatCell]:
        return strategy_heatmap(
            ScoredRecord(e.series_id, e.smiles, e.rank_score, None, e.series_id, e.seed_id, f"tier{e.tier}")
            for _, e in sorted(self.library.items())
        )


def thread_count() -> int:
    """Worker threads for series execution; ``MOLFORGE_THREADS`` caps it."""
    n = os.cpu_count() or 1
    env = os.environ.get("MOLFORGE_THREADS")
    if env:
        try:
            n = max(1, min(n, int(env)))
        except ValueError:
            raise ConfigError(f"MOLFORGE_THREADS must be an integer, got {env!r}") from None
    return n


# ----------------------------------------------------------------- planning


def diversity_order(seeds: Sequence[tuple[str, Molecule]]) -> list[str]:
    """Max-min Tanimoto ordering of seeds, starting from the first listed."""
    if not seeds:
        return []
    fps = {sid: morgan_fingerprint(m) for sid, m in seeds}
    order = [seeds[0][0]]
    rest = [sid for sid, _ in seeds[1:]]
    while rest:
        best = min(rest, key=lambda s: (max(tanimoto(fps[s], fps[o]) for o in order), rest.index(s)))
        order.append(best)
        rest.remove(best)
    return order


def allocate_series(heat: Mapping[tuple[str, str], HeatCell], seed_ids: Sequence[str], total: int) -> dict[str, int]:
    """Split ``total`` series across seeds, weighting seeds by the rank of their best cell.

    The best-scoring seed gets weight ``len(seed_ids)``, the next one less,
    down to 1; seeds with no cell yet share the lowest ranks. Counts use
    largest remainders (ties by seed order), so they always sum to ``total``.
    """
    if not seed_ids:
        return {}
    best = {}
    for (_, seed), cell in heat.items():
        best[seed] = min(best.get(seed, math.inf), cell.best_affinity)
    ranked = sorted(seed_ids, key=lambda s: (best.get(s, math.inf), seed_ids.index(s)))
    n = len(seed_ids)
    weights = {s: n - r for r, s in enumerate(ranked)}
    wsum = sum(weights.values())
    exact = {s: total * weights[s] / wsum for s in seed_ids}
    alloc = {s: int(math.floor(exact[s])) for s in seed_ids}
    left = total - sum(alloc.values())
    for s in sorted(seed_ids, key=lambda s: (-(exact[s] - alloc[s]), seed_ids.index(s)))[:left]:
        alloc[s] += 1
    return alloc


def _terminal_atoms(m: Molecule) -> list[int]:
    return [i for i in range(m.num_atoms) if m.degree(i) == 1 and not m.is_ring_atom(i)]


def _edit_candidates(m: Molecule) -> list[tuple[str, list[dict]]]:
    """Topology-changing edit scripts applicable to ``m``."""
    out: list[tuple[str, list[dict]]] = []
    for k, b in enumerate(m.bonds):
        i, j = b.pair
        if m.kekule[k] != 1 or m.atoms[i].aromatic or m.atoms[j].aromatic:
            continue
        if m.is_ring_bond(k):
            if m.atom_ring_count[i] == 1 and m.atom_ring_count[j] == 1:
                out.append(("ring_open", [{"op": "remove_bond", "begin": i, "end": j}]))
                out.append(("ring_expand", [
                    {"op": "add_atom", "element": "C"},
                    {"op": "remove_bond", "begin": i, "end": j},
                    {"op": "add_bond", "begin": i, "end": m.num_atoms},
                    {"op": "add_bond", "begin": m.num_atoms, "end": j},
                ]))
        elif m.degree(i) >= 2 and m.degree(j) >= 2:
            out.append(("linker_extend", [
                {"op": "add_atom", "element": "C"},
                {"op": "remove_bond", "begin": i, "end": j},
                {"op": "add_bond", "begin": i, "end": m.num_atoms},
                {"op": "add_bond", "begin": m.num_atoms, "end": j},
            ]))
    for a in range(m.num_atoms):
        if m.atoms[a].aromatic or m.atom_ring_count[a] != 1 or m.degree(a) != 2:
            continue
        ring = next(r for r in m.rings if a in r)
        if len(ring) < 5:
            continue
        n1, n2 = m.neighbor_indices(a)
        if m.bond_index(n1, n2) is None:
            out.append(("ring_contract", [{"op": "add_bond", "begin": n1, "end": n2}, {"op": "remove_atom", "atom": a}]))
    return out


def _mask_after_edit(m: Molecule, rng: random.Random) -> list[int]:
    term = _terminal_atoms(m)
    if term:
        return [rng.choice(term)]
    return []


def _plan_tier1(sid: str, seed: Molecule, k: int, rng: random.Random, series_id: str) -> SeriesSpec | None:
    term = _terminal_atoms(seed)
    if k % 2 == 0 and term:
        atom = rng.choice(term)
        atoms = [atom]
        nb = seed.neighbor_indices(atom)[0]
        if not seed.is_ring_atom(nb) and seed.degree(nb) == 2 and rng.random() < 0.5:
            atoms.append(nb)
        return SeriesSpec(series_id, sid, 1, "fragment_mask", {"atoms": sorted(atoms)})
    core, keep = _core_and_map(seed)
    if core.num_atoms == 0:
        return None
    stripped = [p for p, old in enumerate(keep) if seed.degree(old) > core.degree(p) and core.total_h(p) >= 1]
    if not stripped:
        stripped = [p for p in range(core.num_atoms) if core.total_h(p) >= 1]
    if not stripped:
        return None
    return SeriesSpec(series_id, sid, 1, "scaffold_decorate",
                      {"core": "murcko", "attachment_points": [rng.choice(stripped)], "growth_budget": rng.randint(1, 3)})


def _plan_edit(sid: str, seed: Molecule, tier: int, n_edits: int, rng: random.Random, series_id: str) -> SeriesSpec | None:
    script: list[dict] = []
    mol = seed
    for _ in range(n_edits):
        cands = _edit_candidates(mol)
        rng.shuffle(cands)
        for _, edit in cands:
            trial = script + edit
            spec = SeriesSpec(series_id, sid, tier, "graph_edit", {}, tuple(trial))
            if validate_spec(spec, tier, seed).accepted:
                script = trial
                mol = graph_edit(seed, script)
                break
        else:
            break
    if not script:
        return None
    mask = _mask_after_edit(mol, rng)
    if mask:
        return SeriesSpec(series_id, sid, tier, "fragment_mask", {"atoms": mask}, tuple(script))
    return SeriesSpec(series_id, sid, tier, "graph_edit", {}, tuple(script))


def _plan_chimera(sid: str, seed: Molecule, partner_id: str, partner: Molecule, rng: random.Random, series_id: str) -> SeriesSpec | None:
    a_core, b_core = murcko_scaffold(seed), murcko_scaffold(partner)
    a_sites = [i for i in range(a_core.num_atoms) if a_core.total_h(i) >= 1 and a_core.is_ring_atom(i)]
    b_sites = [i for i in range(b_core.num_atoms) if b_core.total_h(i) >= 1 and b_core.is_ring_atom(i)]
    if not a_sites or not b_sites:
        return None
    return SeriesSpec(series_id, sid, 3, "link_fragments",
                      {"core": "murcko", "a_site": rng.choice(a_sites), "b_site": rng.choice(b_sites), "linker_len_range": [1, 2]},
                      partner_seed_id=partner_id)


def plan_wave(config: CampaignConfig, state: CampaignState, wave_index: int, seeds: Mapping[str, Molecule]) -> list[SeriesSpec]:
    """Series for one wave.

    When the config lists explicit series, a spec runs in its ``wave`` or,
    without one, in the first wave that contains its tier. Otherwise series
    are planned per tier and seed, with seeds in diversity order and counts
    from :func:`allocate_series`.
    """
    tiers = config.waves[wave_index]
    if config.series:
        return [
            s for s in config.series
            if (s.wave if s.wave is not None else _first_wave_with(config, s.tier)) == wave_index
        ]
    order = diversity_order([(s.id, seeds[s.id]) for s in config.seeds])
    alloc = allocate_series(state.heatmap(), order, config.series_per_seed * len(order))
    specs = []
    for tier in tiers:
        for sid in order:
            for k in range(alloc[sid]):
                series_id = f"w{wave_index}_t{tier}_{sid}_{k}"
                rng = random.Random(f"{config.rng_seed}:{series_id}")
                if tier == 1:
                    spec = _plan_tier1(sid, seeds[sid], k, rng, series_id)
                elif tier == 2:
                    spec = _plan_edit(sid, seeds[sid], 2, 1, rng, series_id)
                else:
                    partners = [o for o in order if o != sid]
                    spec = None
                    if k % 2 == 0 and partners:
                        pid = rng.choice(partners)
                        spec = _plan_chimera(sid, seeds[sid], pid, seeds[pid], rng, series_id)
                    if spec is None:
                        spec = _plan_edit(sid, seeds[sid], 3, 2, rng, series_id)
                if spec is None:
                    log.info("series %s: no applicable plan", series_id)
                    continue
                specs.append(spec)
    return specs


def _first_wave_with(config: CampaignConfig, tier: int) -> int:
    for i, w in enumerate(config.waves):
        if tier in w:
            return i
    return -1


# ------------------------------------------------------------------ running


def run_wave(
    state: CampaignState,
    config: CampaignConfig,
    wave_index: int,
    *,
    seeds: Mapping[str, Molecule],
    model: ProposalModel,
    excluded: set[str],
    policy: FilterPolicy | None = None,
    scores: Mapping[str, float] | None = None,
    specs: Sequence[SeriesSpec] | None = None,
) -> CampaignState:
    """Run one wave in place and return the state.

    ``excluded`` holds canonical SMILES (seeds and benchmark) that may
    never enter the library. Series run in a thread pool; their results
    merge in spec order, so the outcome does not depend on scheduling.
    """
    policy = policy or config.policy()
    if specs is None:
        specs = plan_wave(config, state, wave_index, seeds)
    scores = scores or {}

    def job(spec: SeriesSpec) -> SeriesResult:
        params = config.params_for(spec.tier)
        if spec.decode_params:
            params = DecodeParams.from_dict({**dataclasses.asdict(params), **spec.decode_params})
        verdict = validate_spec(spec, spec.tier, seeds[spec.seed_id]) if spec.seed_id in seeds else SpecVerdict(False, "unknown seed")
        if not verdict.accepted:
            return SeriesResult(spec, (), f"rejected spec: {verdict.reason}")
        return run_series(spec, seeds, model, params)

    workers = min(thread_count(), max(1, len(specs)))
    if workers > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(job, specs))
    else:
        results = [job(s) for s in specs]

    budget = config.max_molecules_per_wave
    added_this_wave = 0
    for res in results:
        spec = res.spec
        stat = {"series_id": spec.series_id, "seed_id": spec.seed_id, "tier": spec.tier, "wave": wave_index,
                "primitive": spec.primitive, "n_decoded": len(res.products), "n_passed": 0, "n_added": 0,
                "failure": res.failure}
        if res.failure:
            log.warning("series %s failed: %s", spec.series_id, res.failure)
        parent = seeds[spec.seed_id] if spec.seed_id in seeds else None
        candidates = []
        for m, lp in res.products:
            if spec.tier >= 2 and parent is not None and topology_delta(parent, m).is_trivial:
                state.reject_reasons["trivial_topology"] += 1
                state.n_filtered += 1
                continue
            candidates.append((m, lp))
        kept, stats, reports = batch_filter([m for m, _ in candidates], policy, [parent] * len(candidates))
        state.n_filtered += stats.total
        state.n_retained += stats.retained
        state.reject_reasons.update(stats.reasons)
        state.reports.extend(reports)
        for (m, lp), rep in zip(candidates, reports):
            if not rep.passed:
                continue
            stat["n_passed"] += 1
            key = write_canonical(m)
            if key in excluded or key in state.library:
                continue
            if budget is not None and added_this_wave >= budget:
                continue
            state.library[key] = LibraryEntry(key, spec.series_id, spec.seed_id, spec.tier, wave_index, lp, scores.get(key))
            stat["n_added"] += 1
            added_this_wave += 1
        state.series_stats.append(stat)

    if len(state.library) > config.convergence_max:
        ranked = sorted(state.library.values(), key=lambda e: (e.rank_score, e.smiles))
        drop = ranked[config.convergence_max:]
        for e in drop:
            del state.library[e.smiles]
        state.n_trimmed += len(drop)
    state.wave_index = wave_index + 1
    return state


def _seed_molecules(config: CampaignConfig) -> dict[str, Molecule]:
    return {s.id: parse_smiles(s.smiles, name=s.id) for s in config.seeds}


def run_campaign(
    config: CampaignConfig,
    benchmark: Sequence[BenchmarkRecord],
    scores: Sequence[ScoredRecord] = (),
    model: ProposalModel | None = None,
) -> CampaignState:
    """Run every wave. The default proposal model is trained on seeds plus benchmark."""
    seeds = _seed_molecules(config)
    bench_mols = [parse_smiles(r.smiles, name=r.id) for r in benchmark]
    if model is None:
        model = train_frequency_model(list(seeds.values()) + bench_mols)
    excluded = {write_canonical(m) for m in seeds.values()} | {write_canonical(m) for m in bench_mols}
    score_map = {}
    for s in scores:
        key = s.canonical or (write_canonical(parse_smiles(s.smiles)) if s.smiles else "")
        if key:
            score_map[key] = s.affinity_score
    policy = config.policy()
    state = CampaignState()
    for w in range(len(config.waves)):
        run_wave(state, config, w, seeds=seeds, model=model, excluded=excluded, policy=policy, scores=score_map)
    return state


# ------------------------------------------------------------------ reports


_PORTFOLIO_FIELDS = ("mw", "exact_mass", "clogp", "hbd", "hba", "rotatable_bonds", "tpsa", "fsp3",
                     "stereocenters", "ring_count", "largest_ring", "formal_charge_total", "heavy_atoms")


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.4f}"
    return str(v)


def _dump_json(path: Path, data) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")


def emit_reports(
    state: CampaignState,
    benchmark: Sequence[BenchmarkRecord],
    out_dir: str | Path,
    scores: Sequence[ScoredRecord] | None = None,
    *,
    config: CampaignConfig | None = None,
) -> list[Path]:
    """Write the campaign outputs to ``out_dir`` and return the paths.

    Files: ``library.smi``, ``portfolio.csv`` (descriptor columns),
    ``novelty.json``, ``filter_report.json``, ``heatmap.csv``,
    ``series.json``, ``summary.json`` and, with scores, ``calibration.json``.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    entries = sorted(state.library.values(), key=lambda e: (e.rank_score, e.smiles))
    mols = [parse_smiles(e.smiles) for e in entries]
    written = []

    p = out / "library.smi"
    with open(p, "w", encoding="utf-8", newline="\n") as fh:
        for n, e in enumerate(entries):
            fh.write(f"{e.smiles}\t{e.series_id}_{n:04d}\n")
    written.append(p)

    p = out / "portfolio.csv"
    with open(p, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "smiles", "series_id", "seed_id", "tier", "wave", "logprob", "affinity", *_PORTFOLIO_FIELDS])
        for n, (e, m) in enumerate(zip(entries, mols)):
            d: DescriptorSet = descriptors(m)
            row = [f"{e.series_id}_{n:04d}", e.smiles, e.series_id, e.seed_id, e.tier, e.wave, _fmt(e.logprob),
                   "" if e.affinity is None else _fmt(e.affinity)]
            row += [_fmt(getattr(d, f)) for f in _PORTFOLIO_FIELDS]
            w.writerow(row)
    written.append(p)

    bench_mols = [parse_smiles(r.smiles) for r in benchmark]
    if bench_mols:
        p = out / "novelty.json"
        _dump_json(p, novelty_analysis(mols, bench_mols).to_dict())
        written.append(p)

    p = out / "filter_report.json"
    _dump_json(p, {
        "summary": summarize_reports(state.reports),
        "attrition": {
            "total": state.n_filtered,
            "retained": state.n_retained,
            "attrition": (1 - state.n_retained / state.n_filtered) if state.n_filtered else 0.0,
            "reasons": dict(sorted(state.reject_reasons.items())),
            "trimmed": state.n_trimmed,
        },
    })
    written.append(p)

    heat = state.heatmap()
    p = out / "heatmap.csv"
    p.write_text(heatmap_csv(heat), encoding="utf-8")
    written.append(p)

    p = out / "series.json"
    _dump_json(p, state.series_stats)
    written.append(p)

    calib = None
    if scores:
        calib = calibrate(benchmark, scores).to_dict()
        p = out / "calibration.json"
        _dump_json(p, calib)
        written.append(p)

    p = out / "summary.json"
    summary = {
        "seeds": len(config.seeds) if config else None,
        "molecules": len(entries),
        "calibration_n": calib["n_scored"] if calib else None,
        "waves": state.wave_index,
        "series": len(state.series_stats),
        "failed_series": sum(1 for s in state.series_stats if s["failure"]),
    }
    if config is not None:
        summary["converged"] = len(entries) >= config.convergence_min
    _dump_json(p, summary)
    written.append(p)
    return written
