"""Mask part of a seed and let the beam decoder propose completions.

A frequency model trained on the toy seeds and benchmark stands in for a
learned proposal model.

Run: python demos/04_generation.py
"""

from __future__ import annotations

from molforge.analytics import ingest_benchmark
from molforge.cli import toy_dir
from molforge.genops import DecodeParams, decode, fragment_mask, link_fragments, scaffold_decorate, train_frequency_model
from molforge.scaffold import murcko_scaffold
from molforge.smiles import parse_smiles, write_canonical

bench, _ = ingest_benchmark(toy_dir() / "benchmark.csv")
model = train_frequency_model(parse_smiles(r.smiles) for r in bench)

seed = parse_smiles("CSc1cc(C)[nH]c(=O)c1CNC(=O)c1ccccc1")
print("seed:", write_canonical(seed))

# fragment masking: re-decode the S-methyl group
g = fragment_mask(seed, {0, 1})
print(f"\nfragment_mask: {len(g.masked_atoms)} atoms and {len(g.masked_bonds)} bonds masked")
for m, lp in decode(g, model, DecodeParams(beam_width=8, max_outputs=5)):
    print(f"  {lp:8.3f}  {write_canonical(m)}")

# scaffold decoration: grow up to two atoms on the phenyl ring of the core
core = murcko_scaffold(seed)
site = max(i for i in range(core.num_atoms) if core.total_h(i) >= 1)
g = scaffold_decorate(core, [site], growth_budget=2)
print("\nscaffold_decorate on", write_canonical(core))
for m, lp in decode(g, model, DecodeParams(beam_width=8, max_outputs=5)):
    print(f"  {lp:8.3f}  {write_canonical(m)}")

# linker design: join a pyridine and a benzene with one or two masked atoms
a, b = parse_smiles("c1ccncc1"), parse_smiles("c1ccccc1")
print("\nlink_fragments:")
for lg in link_fragments(a, 0, b, 0, (1, 2)):
    for m, lp in decode(lg, model, DecodeParams(beam_width=6, max_outputs=2)):
        print(f"  {lp:8.3f}  {write_canonical(m)}")
