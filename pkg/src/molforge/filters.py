"""Post-generation filtering.

Stages run in order: (1) structural rejects (disallowed elements, formal
charge, hard alerts, oversized rings), (2) drug-likeness thresholds and the
stereocenter cap relative to the parent, (3) soft flags. A molecule is
rejected when stage 1 or 2 reports anything; soft flags only annotate.
"""

from __future__ import annotations

import json
from collections import Counter
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from molforge import elements
from molforge.errors import ConfigError, MissingParent
from molforge.molgraph import Molecule
from molforge.molgraph.descriptors import DescriptorSet, descriptors
from molforge.substructure import Alert, default_catalog, load_catalog, match_alerts

__all__ = [
    "Verdict",
    "FilterPolicy",
    "FilterReport",
    "AttritionStats",
    "apply_filters",
    "batch_filter",
    "summarize_reports",
    "DEFAULT_ALLOWED_ELEMENTS",
]

DEFAULT_ALLOWED_ELEMENTS = frozenset(
    elements.atomic_number(s) for s in ("H", "B", "C", "N", "O", "F", "Si", "P", "S", "Cl", "Br", "Se", "I")
)


class Verdict(str, Enum):
    PASS_CLEAN = "pass_clean"
    PASS_FLAGGED = "pass_flagged"
    REJECT = "reject"


def _split_catalog(alerts: Sequence[Alert]) -> tuple[tuple[Alert, ...], tuple[Alert, ...]]:
    return (tuple(a for a in alerts if a.severity == "hard"), tuple(a for a in alerts if a.severity == "soft"))


@dataclass(frozen=True, slots=True)
class FilterPolicy:
    """Thresholds and alert catalogs for :func:`apply_filters`.

    ``max_formal_charge_abs`` bounds both the net charge and every atomic
    charge. ``stereocenter_cap_delta`` (None disables) allows a child at
    most that many stereocenters above its parent; the cap is skipped for
    molecules without a parent unless ``require_parent`` is set.
    ``soft_mw_max`` raises the ``high_mw`` soft flag without rejecting.
    """

    allowed_elements: frozenset[int] = DEFAULT_ALLOWED_ELEMENTS
    max_formal_charge_abs: int = 1
    max_ring_size: int = 7
    mw_max: float = 650.0
    clogp_max: float = 6.5
    rotb_max: int = 12
    stereocenter_cap_delta: int | None = 2
    require_parent: bool = False
    soft_mw_max: float | None = 600.0
    hard_alerts: tuple[Alert, ...] = field(default_factory=lambda: _split_catalog(default_catalog())[0])
    soft_alerts: tuple[Alert, ...] = field(default_factory=lambda: _split_catalog(default_catalog())[1])

    def __post_init__(self) -> None:
        for name in ("max_ring_size", "mw_max", "clogp_max", "rotb_max"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if self.max_formal_charge_abs < 0:
            raise ConfigError("max_formal_charge_abs must be >= 0")
        if self.stereocenter_cap_delta is not None and self.stereocenter_cap_delta < 0:
            raise ConfigError("stereocenter_cap_delta must be >= 0")
        for a in self.hard_alerts + self.soft_alerts:
            a.pattern  # parse eagerly so a bad catalog fails at load

    @classmethod
    def from_dict(cls, data: dict, base_dir: str | Path | None = None) -> FilterPolicy:
        """Build from a JSON-style mapping.

        Recognised keys are the field names, plus ``catalog`` (path to an
        alert catalog replacing the shipped one) and ``allowed_elements`` as
        element symbols.
        """
        data = dict(data)
        kwargs: dict = {}
        catalog = data.pop("catalog", None)
        if catalog is not None:
            path = Path(catalog)
            if base_dir is not None and not path.is_absolute():
                path = Path(base_dir) / path
            kwargs["hard_alerts"], kwargs["soft_alerts"] = _split_catalog(load_catalog(path))
        if "allowed_elements" in data:
            try:
                kwargs["allowed_elements"] = frozenset(elements.atomic_number(s) for s in data.pop("allowed_elements"))
            except KeyError as exc:
                raise ConfigError(f"unknown element symbol {exc.args[0]!r} in allowed_elements") from None
        known = {"max_formal_charge_abs", "max_ring_size", "mw_max", "clogp_max", "rotb_max",
                 "stereocenter_cap_delta", "require_parent", "soft_mw_max"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown policy keys: {sorted(unknown)}")
        kwargs.update(data)
        return cls(**kwargs)

    @classmethod
    def from_json(cls, path: str | Path) -> FilterPolicy:
        with open(path, encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}: invalid JSON ({exc})") from None
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: policy must be a JSON object")
        return cls.from_dict(data, base_dir=Path(path).parent)


@dataclass(frozen=True, slots=True)
class FilterReport:
    verdict: Verdict
    hard_hits: tuple[tuple[str, int], ...] = ()
    soft_flags: tuple[str, ...] = ()
    threshold_violations: tuple[tuple[str, float, float], ...] = ()
    descriptors: DescriptorSet | None = None

    @property
    def passed(self) -> bool:
        return self.verdict is not Verdict.REJECT

    @property
    def reject_reasons(self) -> list[str]:
        return [name for name, _ in self.hard_hits] + [name for name, _, _ in self.threshold_violations]

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "hard_hits": [list(h) for h in self.hard_hits],
            "soft_flags": list(self.soft_flags),
            "threshold_violations": [list(v) for v in self.threshold_violations],
        }


def _merge_counts(hits: Iterable[tuple[str, int]]) -> tuple[tuple[str, int], ...]:
    merged: dict[str, int] = {}
    for name, n in hits:
        merged[name] = merged.get(name, 0) + n
    return tuple(merged.items())


def apply_filters(
    m: Molecule,
    parent: Molecule | None = None,
    policy: FilterPolicy | None = None,
    *,
    full_report: bool = True,
    parent_stereocenters: int | None = None,
) -> FilterReport:
    """Run the three filter stages on ``m``.

    With ``full_report=False`` evaluation stops at the first rejecting
    stage; the verdict is the same either way.

    Raises:
        MissingParent: ``policy.require_parent`` is set and no parent given.
    """
    policy = policy or FilterPolicy()
    if policy.stereocenter_cap_delta is not None and policy.require_parent and parent is None and parent_stereocenters is None:
        raise MissingParent("stereocenter cap requires the parent molecule")

    # stage 1: structure
    hard: list[tuple[str, int]] = []
    bad_el = sorted({a.element for a in m.atoms if a.element not in policy.allowed_elements})
    if any(m.total_h(i) for i in range(m.num_atoms)) and elements.H not in policy.allowed_elements:
        bad_el.append(elements.H)
    for z in bad_el:
        hard.append((f"element_{elements.symbol(z)}", sum(1 for a in m.atoms if a.element == z) or 1))
    net = sum(a.charge for a in m.atoms)
    charged = sum(1 for a in m.atoms if abs(a.charge) > policy.max_formal_charge_abs)
    if abs(net) > policy.max_formal_charge_abs or charged:
        hard.append(("formal_charge", max(1, charged)))
    for alert, n in match_alerts(m, policy.hard_alerts):
        hard.append((alert.name, n))
    hard_hits = _merge_counts(hard)
    violations: list[tuple[str, float, float]] = []
    largest = max((len(r) for r in m.rings), default=0)
    if largest > policy.max_ring_size:
        violations.append(("largest_ring", float(largest), float(policy.max_ring_size)))
    if not full_report and (hard_hits or violations):
        return FilterReport(Verdict.REJECT, hard_hits, (), tuple(violations))

    # stage 2: descriptor thresholds
    d = descriptors(m)
    if d.mw > policy.mw_max:
        violations.append(("mw", d.mw, policy.mw_max))
    if d.clogp > policy.clogp_max:
        violations.append(("clogp", d.clogp, policy.clogp_max))
    if d.rotatable_bonds > policy.rotb_max:
        violations.append(("rotatable_bonds", float(d.rotatable_bonds), float(policy.rotb_max)))
    if policy.stereocenter_cap_delta is not None:
        base = parent_stereocenters
        if base is None and parent is not None:
            base = descriptors(parent).stereocenters
        if base is not None and d.stereocenters > base + policy.stereocenter_cap_delta:
            violations.append(("stereocenters", float(d.stereocenters), float(base + policy.stereocenter_cap_delta)))
    if not full_report and (hard_hits or violations):
        return FilterReport(Verdict.REJECT, hard_hits, (), tuple(violations), d)

    # stage 3: soft flags
    soft: list[str] = []
    for alert, _ in match_alerts(m, policy.soft_alerts):
        if alert.name not in soft:
            soft.append(alert.name)
    if policy.soft_mw_max is not None and d.mw > policy.soft_mw_max:
        soft.append("high_mw")

    if hard_hits or violations:
        verdict = Verdict.REJECT
    elif soft:
        verdict = Verdict.PASS_FLAGGED
    else:
        verdict = Verdict.PASS_CLEAN
    return FilterReport(verdict, hard_hits, tuple(soft), tuple(violations), d)


@dataclass(frozen=True, slots=True)
class AttritionStats:
    total: int
    retained: int
    reasons: dict[str, int]

    @property
    def rejected(self) -> int:
        return self.total - self.retained

    @property
    def attrition(self) -> float:
        return self.rejected / self.total if self.total else 0.0

    def to_dict(self) -> dict:
        return {"total": self.total, "retained": self.retained, "rejected": self.rejected,
                "attrition": self.attrition, "reasons": dict(sorted(self.reasons.items()))}


def batch_filter(
    molecules: Iterable[Molecule],
    policy: FilterPolicy | None = None,
    parents: Sequence[Molecule | None] | None = None,
) -> tuple[list[Molecule], AttritionStats, list[FilterReport]]:
    """Filter a batch, preserving order.

    Returns the retained molecules, attrition statistics (each reject
    reason counted once per molecule) and the per-molecule reports.
    """
    policy = policy or FilterPolicy()
    kept: list[Molecule] = []
    reports: list[FilterReport] = []
    reasons: Counter[str] = Counter()
    total = 0
    for i, m in enumerate(molecules):
        total += 1
        parent = parents[i] if parents is not None else None
        rep = apply_filters(m, parent, policy)
        reports.append(rep)
        if rep.passed:
            kept.append(m)
        else:
            reasons.update(set(rep.reject_reasons))
    return kept, AttritionStats(total, len(kept), dict(reasons)), reports


def summarize_reports(reports: Sequence[FilterReport]) -> dict:
    """Campaign-level summary: scored, pass hard, % soft flags, most common flag, clean."""
    scored = len(reports)
    passed = [r for r in reports if r.passed]
    flagged = [r for r in passed if r.soft_flags]
    counts: Counter[str] = Counter(f for r in passed for f in r.soft_flags)
    most = None
    if counts:
        name, n = min(counts.items(), key=lambda kv: (-kv[1], kv[0]))
        most = {"flag": name, "count": n}
    return {
        "scored": scored,
        "pass_hard": len(passed),
        "pct_soft_flags": round(100.0 * len(flagged) / len(passed), 1) if passed else 0.0,
        "most_common_flag": most,
        "clean": len(passed) - len(flagged),
    }
