"""Run the shipped three-seed toy campaign and summarise its outputs.

Equivalent to ``molforge campaign --toy --out <dir>``.

Run: python demos/06_toy_campaign.py [out_dir]
"""

from __future__ import annotations

import sys
from collections import Counter

from molforge.analytics import ingest_benchmark, ingest_scores
from molforge.campaign import CampaignConfig, emit_reports, run_campaign
from molforge.cli import toy_dir

out = sys.argv[1] if len(sys.argv) > 1 else "toy_campaign_out"
base = toy_dir()
config = CampaignConfig.from_json(base / "campaign.json")
bench, _ = ingest_benchmark(base / "benchmark.csv")
scores, _ = ingest_scores(base / "scores.csv")

state = run_campaign(config, bench, scores)
paths = emit_reports(state, bench, out, scores, config=config)

print(f"{len(state.series_stats)} series over {state.wave_index} waves; library of {len(state.library)}")
print("by tier:", dict(sorted(Counter(e.tier for e in state.library.values()).items())))
print("by seed:", dict(sorted(Counter(e.seed_id for e in state.library.values()).items())))
print("top reject reasons:", state.reject_reasons.most_common(4))
for p in paths:
    print("wrote", p)
