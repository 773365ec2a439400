"""Structural alerts and the three-stage filter on a handful of molecules.

Run: python demos/02_alerts_and_filters.py
"""

from __future__ import annotations

from molforge.filters import FilterPolicy, apply_filters, batch_filter
from molforge.smiles import parse_smiles
from molforge.substructure import default_catalog, find_matches, match_alerts

catalog = default_catalog()
print(f"{len(catalog)} alerts in the shipped catalog")

# a SMARTS query returns atom mappings into the molecule
nitrobenzene = parse_smiles("O=[N+]([O-])c1ccccc1")
print("nitro mappings:", find_matches("[N+](=O)[O-]", nitrobenzene))

candidates = {
    "nitrobenzene": "O=[N+]([O-])c1ccccc1",
    "cyclooctane": "C1CCCCCCC1",
    "propyl azide": "CCCN=[N+]=[N-]",
    "butynol": "C#CCCO",
    "aniline amide": "CC(=O)Nc1ccc(N)cc1",
    "paracetamol": "CC(=O)Nc1ccc(O)cc1",
}
policy = FilterPolicy()
for name, smi in candidates.items():
    m = parse_smiles(smi)
    alerts = sorted({a.name for a, _ in match_alerts(m, catalog)})
    report = apply_filters(m, None, policy)
    print(f"{name:14s} {report.verdict.name:7s} alerts={alerts} reasons={report.reject_reasons}")

mols = [parse_smiles(s, name=n) for n, s in candidates.items()]
kept, stats, _ = batch_filter(mols, policy)
print(f"kept {[m.name for m in kept]}; attrition {stats.attrition:.2f}; reasons {dict(stats.reasons)}")
