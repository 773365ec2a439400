"""Score calibration against pChEMBL and novelty of a generated set.

Run: python demos/05_calibration_and_novelty.py
"""

from __future__ import annotations

from molforge.analytics import calibrate, ingest_benchmark, ingest_scores, novelty_analysis
from molforge.cli import toy_dir
from molforge.smiles import parse_smiles

base = toy_dir()
bench, skipped = ingest_benchmark(base / "benchmark.csv")
scores, _ = ingest_scores(base / "scores.csv")
print(f"{len(bench)} benchmark rows ({len(skipped)} skipped), {len(scores)} scored rows")

# rows with pChEMBL in [6.0, 6.5) are dropped from the AUC only
rep = calibrate(bench, scores)
print(f"Spearman rho {rep.spearman_rho:.3f} over {rep.n_scored} rows")
print(f"ROC AUC (affinity) {rep.roc_auc_affinity:.3f}; (probability) {rep.roc_auc_probability:.3f}; "
      f"{rep.excluded_band_count} rows in the exclusion band")

generated = [parse_smiles(s) for s in [
    "Cc1ncnc(Nc2ccc3c(c2)c2c(c(=O)n3C)OC(F)(F)[C@H](C3CCC3)N2)c1Br",
    "Cn1c(=O)c2c(c3cc(Nc4ncncc4Cl)ccc31)NCCCO2",
    "c1ccc2ccccc2c1",
]]
nov = novelty_analysis(generated, [parse_smiles(r.smiles) for r in bench])
print(f"\nnovelty: median max Tanimoto {nov.median_max_tanimoto:.3f}, "
      f"{nov.n_novel_scaffolds}/{nov.n_scaffolds} scaffolds absent from the benchmark ({nov.novelty_pct:.0f}%)")
