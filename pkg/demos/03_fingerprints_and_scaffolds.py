"""Morgan fingerprints, Tanimoto similarity and Murcko scaffolds.

Run: python demos/03_fingerprints_and_scaffolds.py
"""

from __future__ import annotations

from molforge.fingerprint import morgan_fingerprint, tanimoto
from molforge.scaffold import generic_scaffold_key, murcko_scaffold
from molforge.smiles import parse_smiles, write_canonical

series = {
    "toluene": "Cc1ccccc1",
    "benzyl alcohol": "OCc1ccccc1",
    "diphenylmethane": "c1ccccc1Cc1ccccc1",
    "benzylpyridine": "c1ccccc1Cc1ccncc1",
    "cyclohexylmethane": "CC1CCCCC1",
}
mols = {k: parse_smiles(v) for k, v in series.items()}
fps = {k: morgan_fingerprint(m) for k, m in mols.items()}

print("Tanimoto to diphenylmethane (radius 2, 2048 bits):")
for k, fp in fps.items():
    print(f"  {k:18s} {tanimoto(fps['diphenylmethane'], fp):.3f}  ({fp.popcount} bits set)")

print("\nscaffolds:")
for k, m in mols.items():
    print(f"  {k:18s} murcko={write_canonical(murcko_scaffold(m)) or '-':22s} generic={generic_scaffold_key(m) or '-'}")
