"""Benchmark ingestion, calibration metrics, novelty and strategy heatmaps.

Affinity scores follow the log10 IC50 convention (lower is stronger), while
pChEMBL is higher-is-stronger; :func:`calibrate` negates affinity scores
before computing ROC AUC so that a good predictor scores near 1.
"""

from __future__ import annotations

import csv
import io
import math
import statistics
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import TextIO

import numpy as np
from scipy.stats import rankdata

from molforge.errors import (
    DegenerateInput,
    EmptyBenchmark,
    JoinEmpty,
    LengthMismatch,
    MolforgeError,
    SchemaError,
    SingleClass,
)
from molforge.fingerprint import Fingerprint, max_similarity, morgan_fingerprint
from molforge.molgraph import Molecule
from molforge.scaffold import generic_scaffold_key
from molforge.smiles import parse_smiles, write_canonical

__all__ = [
    "BenchmarkRecord",
    "ScoredRecord",
    "SkippedRow",
    "CalibrationReport",
    "NoveltyReport",
    "HeatCell",
    "PriorArtIndex",
    "ingest_benchmark",
    "ingest_scores",
    "spearman",
    "roc_auc",
    "calibrate",
    "novelty_analysis",
    "strategy_heatmap",
    "heatmap_csv",
    "HIGH_VARIANCE_STDDEV",
    "UNASSIGNED",
]

HIGH_VARIANCE_STDDEV = 1.0
UNASSIGNED = "unassigned"
_AUC_GRID = 2**53  # AUC is reported on this grid so that 1 - AUC is exact


@dataclass(frozen=True, slots=True)
class BenchmarkRecord:
    id: str
    smiles: str
    pchembl: float
    pchembl_stddev: float | None = None
    canonical: str = ""

    @property
    def high_variance(self) -> bool:
        return self.pchembl_stddev is not None and self.pchembl_stddev > HIGH_VARIANCE_STDDEV


@dataclass(frozen=True, slots=True)
class ScoredRecord:
    id: str
    smiles: str
    affinity_score: float
    binding_probability: float | None = None
    series_id: str = ""
    seed_id: str = ""
    strategy_tier: str = ""
    canonical: str = ""

    def __post_init__(self) -> None:
        p = self.binding_probability
        if p is not None and not 0.0 <= p <= 1.0:
            raise ValueError(f"binding_probability {p} outside [0, 1]")


@dataclass(frozen=True, slots=True)
class SkippedRow:
    line: int
    reason: str


# ---------------------------------------------------------------- ingestion


def _open_csv(source: str | Path | TextIO) -> tuple[csv.DictReader, TextIO | None]:
    if isinstance(source, (str, Path)):
        fh = open(source, encoding="utf-8", newline="")
        return csv.DictReader(fh), fh
    return csv.DictReader(source), None


def _require(reader: csv.DictReader, required: Sequence[str], what: str) -> list[str]:
    header = [h.strip() for h in (reader.fieldnames or [])]
    missing = [c for c in required if c not in header]
    if missing:
        raise SchemaError(f"{what} CSV is missing column(s): {', '.join(missing)}")
    return header


def _opt_float(text: str | None) -> float | None:
    text = (text or "").strip()
    return float(text) if text else None


def _canonical_or_none(smiles: str) -> str | None:
    try:
        return write_canonical(parse_smiles(smiles))
    except MolforgeError:
        return None


def ingest_benchmark(source: str | Path | TextIO) -> tuple[list[BenchmarkRecord], list[SkippedRow]]:
    """Read ``id,smiles,pchembl[,pchembl_stddev]`` rows.

    Rows whose SMILES fail to parse or whose pChEMBL is not a number are
    skipped and returned with their line number and reason.

    Raises:
        SchemaError: a required column is missing.
    """
    reader, fh = _open_csv(source)
    try:
        _require(reader, ("id", "smiles", "pchembl"), "benchmark")
        records, skipped = [], []
        for row in reader:
            line = reader.line_num
            row = {k.strip(): (v or "").strip() for k, v in row.items() if k}
            canon = _canonical_or_none(row["smiles"])
            if canon is None:
                skipped.append(SkippedRow(line, f"unparseable SMILES {row['smiles']!r}"))
                continue
            try:
                p = float(row["pchembl"])
                sd = _opt_float(row.get("pchembl_stddev"))
            except ValueError:
                skipped.append(SkippedRow(line, "non-numeric pChEMBL value"))
                continue
            records.append(BenchmarkRecord(row["id"], row["smiles"], p, sd, canon))
        return records, skipped
    finally:
        if fh is not None:
            fh.close()


def ingest_scores(source: str | Path | TextIO) -> tuple[list[ScoredRecord], list[SkippedRow]]:
    """Read a scores CSV (``id,smiles,affinity_score,binding_probability,series_id,seed_id,strategy_tier``).

    Only ``affinity_score`` and one of ``id``/``smiles`` are required.

    Raises:
        SchemaError: required columns are missing.
    """
    reader, fh = _open_csv(source)
    try:
        header = _require(reader, ("affinity_score",), "scores")
        if "id" not in header and "smiles" not in header:
            raise SchemaError("scores CSV needs an id or a smiles column")
        records, skipped = [], []
        for row in reader:
            line = reader.line_num
            row = {k.strip(): (v or "").strip() for k, v in row.items() if k}
            smi = row.get("smiles", "")
            canon = ""
            if smi:
                canon = _canonical_or_none(smi)
                if canon is None:
                    skipped.append(SkippedRow(line, f"unparseable SMILES {smi!r}"))
                    continue
            try:
                rec = ScoredRecord(
                    id=row.get("id", ""),
                    smiles=smi,
                    affinity_score=float(row["affinity_score"]),
                    binding_probability=_opt_float(row.get("binding_probability")),
                    series_id=row.get("series_id", ""),
                    seed_id=row.get("seed_id", ""),
                    strategy_tier=row.get("strategy_tier", ""),
                    canonical=canon,
                )
            except ValueError as exc:
                skipped.append(SkippedRow(line, str(exc)))
                continue
            records.append(rec)
        return records, skipped
    finally:
        if fh is not None:
            fh.close()


# ------------------------------------------------------------------ metrics


def spearman(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Spearman rank correlation with average ranks for ties.

    Raises:
        LengthMismatch: lengths differ.
        DegenerateInput: fewer than two points or a constant vector.
    """
    if len(xs) != len(ys):
        raise LengthMismatch(f"lengths differ: {len(xs)} vs {len(ys)}")
    if len(xs) < 2:
        raise DegenerateInput("need at least two points")
    rx = rankdata(np.asarray(xs, dtype=float))
    ry = rankdata(np.asarray(ys, dtype=float))
    dx = rx - rx.mean()
    dy = ry - ry.mean()
    sxx = float(np.dot(dx, dx))
    syy = float(np.dot(dy, dy))
    if sxx == 0 or syy == 0:
        raise DegenerateInput("rank correlation undefined for a constant vector")
    rho = float(np.dot(dx, dy)) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, rho))


def _auc_statistic(scores: Sequence[float], labels: Sequence[bool]) -> tuple[int, int]:
    """Twice the Mann-Whitney U of the positives and ``2 * n_pos * n_neg``."""
    if len(scores) != len(labels):
        raise LengthMismatch(f"lengths differ: {len(scores)} vs {len(labels)}")
    lab = np.asarray(labels, dtype=bool)
    n_pos = int(lab.sum())
    n_neg = len(lab) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise SingleClass("ROC AUC needs both positive and negative labels")
    ranks = rankdata(np.asarray(scores, dtype=float))  # average ranks are multiples of 1/2
    r2 = int(round(2 * float(ranks[lab].sum())))
    u2 = r2 - n_pos * (n_pos + 1)
    return u2, 2 * n_pos * n_neg


def roc_auc(scores: Sequence[float], labels: Sequence[bool]) -> float:
    """Area under the ROC curve via the Mann-Whitney U statistic.

    Higher scores mean "more positive"; ties count one half. Callers whose
    scores run the other way (affinity on a log IC50 scale) negate them.
    The value is rounded half-to-even onto a 2**-53 grid, so
    ``roc_auc(-s, y) == 1 - roc_auc(s, y)`` holds exactly.

    Raises:
        LengthMismatch: lengths differ.
        SingleClass: only one class present.
    """
    u2, total = _auc_statistic(scores, labels)
    return round(Fraction(u2 * _AUC_GRID, total)) / _AUC_GRID


# -------------------------------------------------------------- calibration


@dataclass(frozen=True, slots=True)
class CalibrationReport:
    n_scored: int
    spearman_rho: float
    roc_auc_affinity: float | None
    roc_auc_probability: float | None
    active_threshold: float
    excluded_band_count: int
    n_auc: int = 0
    n_active: int = 0
    n_high_variance: int = 0

    def to_dict(self) -> dict:
        return {
            "n_scored": self.n_scored,
            "spearman_rho": self.spearman_rho,
            "roc_auc_affinity": self.roc_auc_affinity,
            "roc_auc_probability": self.roc_auc_probability,
            "active_threshold": self.active_threshold,
            "excluded_band_count": self.excluded_band_count,
            "n_auc": self.n_auc,
            "n_active": self.n_active,
            "n_high_variance": self.n_high_variance,
        }


def _join(benchmark: Sequence[BenchmarkRecord], scores: Sequence[ScoredRecord]) -> list[tuple[BenchmarkRecord, ScoredRecord]]:
    by_id = {b.id: b for b in benchmark if b.id}
    by_smiles = {b.canonical or _canonical_or_none(b.smiles): b for b in benchmark}
    pairs = []
    for s in scores:
        b = by_id.get(s.id) if s.id else None
        if b is None:
            key = s.canonical or (_canonical_or_none(s.smiles) if s.smiles else None)
            b = by_smiles.get(key) if key else None
        if b is not None:
            pairs.append((b, s))
    return pairs


def calibrate(
    benchmark: Sequence[BenchmarkRecord],
    scores: Sequence[ScoredRecord],
    threshold: float = 6.5,
    exclusion_halfwidth: float = 0.5,
    *,
    exclude_high_variance: bool = False,
) -> CalibrationReport:
    """Compare predicted scores with measured pChEMBL.

    Records join by id, falling back to canonical SMILES. Spearman's rho
    uses every joined row (affinity score against pChEMBL, so a good
    predictor is strongly negative). ROC AUC labels rows active at
    ``pchembl >= threshold`` and leaves out rows in
    ``[threshold - exclusion_halfwidth, threshold)``. AUCs that cannot be
    computed (one class, or no probabilities) are ``None``.

    Raises:
        JoinEmpty: no score matched a benchmark record.
    """
    pairs = _join(benchmark, scores)
    if exclude_high_variance:
        pairs = [(b, s) for b, s in pairs if not b.high_variance]
    if not pairs:
        raise JoinEmpty("no scored record matched the benchmark")
    rho = spearman([s.affinity_score for _, s in pairs], [b.pchembl for b, _ in pairs])
    lo = threshold - exclusion_halfwidth
    kept = [(b, s) for b, s in pairs if not lo <= b.pchembl < threshold]
    labels = [b.pchembl >= threshold for b, _ in kept]
    try:
        auc_aff = roc_auc([-s.affinity_score for _, s in kept], labels)
    except SingleClass:
        auc_aff = None
    auc_prob = None
    if kept and all(s.binding_probability is not None for _, s in kept):
        try:
            auc_prob = roc_auc([s.binding_probability for _, s in kept], labels)
        except SingleClass:
            pass
    return CalibrationReport(
        n_scored=len(pairs),
        spearman_rho=rho,
        roc_auc_affinity=auc_aff,
        roc_auc_probability=auc_prob,
        active_threshold=threshold,
        excluded_band_count=len(pairs) - len(kept),
        n_auc=len(kept),
        n_active=sum(labels),
        n_high_variance=sum(1 for b, _ in pairs if b.high_variance),
    )


# ------------------------------------------------------------------ novelty


@dataclass(frozen=True, slots=True)
class NoveltyReport:
    """Novelty of a generated set against a reference set.

    Counts: ``n_input`` molecules were given, ``n_internal_duplicates``
    repeated an earlier one, ``n_benchmark_duplicates`` exactly matched a
    benchmark structure; the remaining ``n_generated`` are scored. Acyclic
    molecules have no scaffold and are left out of the scaffold counts.
    """

    n_input: int
    n_internal_duplicates: int
    n_benchmark_duplicates: int
    n_generated: int
    n_scaffolds: int
    n_novel_scaffolds: int
    novelty_pct: float
    median_max_tanimoto: float | None
    max_tanimoto: tuple[float, ...]
    retained: tuple[str, ...] = ()
    nearest: tuple[int, ...] = ()
    novel_scaffolds: tuple[str, ...] = field(default=(), repr=False)

    def to_dict(self) -> dict:
        return {
            "n_input": self.n_input,
            "n_internal_duplicates": self.n_internal_duplicates,
            "n_benchmark_duplicates": self.n_benchmark_duplicates,
            "n_generated": self.n_generated,
            "n_scaffolds": self.n_scaffolds,
            "n_novel_scaffolds": self.n_novel_scaffolds,
            "novelty_pct": self.novelty_pct,
            "median_max_tanimoto": self.median_max_tanimoto,
            "molecules": [
                {"smiles": s, "max_tanimoto": t, "nearest": n}
                for s, t, n in zip(self.retained, self.max_tanimoto, self.nearest)
            ],
        }


def novelty_analysis(
    generated: Iterable[Molecule],
    benchmark: Iterable[Molecule],
    *,
    radius: int = 2,
    width: int = 2048,
) -> NoveltyReport:
    """Nearest-neighbour similarity and generic-scaffold novelty.

    Generated molecules are canonicalised and deduplicated, then exact
    matches to the benchmark are removed before any metric is computed.
    Each survivor gets its maximum Morgan Tanimoto similarity to the
    benchmark; scaffold novelty is the share of distinct generic scaffolds
    absent from the benchmark's.

    Raises:
        EmptyBenchmark: the benchmark is empty.
    """
    bench = list(benchmark)
    if not bench:
        raise EmptyBenchmark("benchmark set is empty")
    bench_keys = {write_canonical(b) for b in bench}
    bench_fps: list[Fingerprint] = [morgan_fingerprint(b, radius, width) for b in bench]
    bench_scaffolds = {generic_scaffold_key(b) for b in bench}

    n_input = internal = external = 0
    seen: set[str] = set()
    kept: list[tuple[str, Molecule]] = []
    for m in generated:
        n_input += 1
        key = write_canonical(m)
        if key in seen:
            internal += 1
            continue
        seen.add(key)
        if key in bench_keys:
            external += 1
            continue
        kept.append((key, m))

    sims, nearest = [], []
    scaffolds: set[str] = set()
    for _, m in kept:
        s, idx = max_similarity(morgan_fingerprint(m, radius, width), bench_fps)
        sims.append(s)
        nearest.append(idx)
        sk = generic_scaffold_key(m)
        if sk:
            scaffolds.add(sk)
    novel = sorted(scaffolds - bench_scaffolds)
    return NoveltyReport(
        n_input=n_input,
        n_internal_duplicates=internal,
        n_benchmark_duplicates=external,
        n_generated=len(kept),
        n_scaffolds=len(scaffolds),
        n_novel_scaffolds=len(novel),
        novelty_pct=100.0 * len(novel) / len(scaffolds) if scaffolds else 0.0,
        median_max_tanimoto=statistics.median(sims) if sims else None,
        max_tanimoto=tuple(sims),
        retained=tuple(k for k, _ in kept),
        nearest=tuple(nearest),
        novel_scaffolds=tuple(novel),
    )


# ------------------------------------------------------------------ heatmap


@dataclass(frozen=True, slots=True)
class HeatCell:
    n: int
    mean_affinity: float
    best_affinity: float  # lowest score (strongest predicted binder)


def strategy_heatmap(scores: Iterable[ScoredRecord]) -> dict[tuple[str, str], HeatCell]:
    """Group scores by (strategy tier, seed). Missing labels go to ``"unassigned"``.

    Cells with no records are absent rather than zero.
    """
    groups: dict[tuple[str, str], list[float]] = {}
    for r in scores:
        key = (r.strategy_tier or UNASSIGNED, r.seed_id or UNASSIGNED)
        groups.setdefault(key, []).append(r.affinity_score)
    return {
        k: HeatCell(len(v), math.fsum(v) / len(v), min(v))
        for k, v in sorted(groups.items())
    }


def heatmap_csv(table: Mapping[tuple[str, str], HeatCell], metric: str = "mean_affinity") -> str:
    """Tier x seed matrix of one cell metric as CSV text; empty cells stay blank."""
    tiers = sorted({t for t, _ in table})
    seeds = sorted({s for _, s in table})
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["strategy_tier", *seeds])
    for t in tiers:
        row = [t]
        for s in seeds:
            cell = table.get((t, s))
            row.append("" if cell is None else repr(round(getattr(cell, metric), 6)))
        w.writerow(row)
    return buf.getvalue()


# ---------------------------------------------------------------- prior art


class PriorArtIndex:
    """Exact-structure lookup over a local list of known compounds."""

    def __init__(self, molecules: Iterable[Molecule] = ()) -> None:
        self._keys: set[str] = {write_canonical(m) for m in molecules}

    @classmethod
    def from_smiles_file(cls, path: str | Path) -> PriorArtIndex:
        from molforge.smiles import read_smiles_file

        return cls(read_smiles_file(path, skip_invalid=True))

    def add(self, m: Molecule) -> None:
        self._keys.add(write_canonical(m))

    def __contains__(self, m: Molecule | str) -> bool:
        key = m if isinstance(m, str) else write_canonical(m)
        return key in self._keys

    def __len__(self) -> int:
        return len(self._keys)
