"""Parse the toy campaign seeds, canonicalize them and print their descriptors.

Run: python demos/01_parse_and_describe.py
"""

from __future__ import annotations

import json
import random

from molforge.cli import toy_dir
from molforge.molgraph import descriptors, permute
from molforge.smiles import parse_smiles, write_canonical

config = json.loads((toy_dir() / "campaign.json").read_text())

for seed in config["seeds"]:
    m = parse_smiles(seed["smiles"], name=seed["id"])
    canon = write_canonical(m)

    # shuffling atom order must not change the canonical string
    order = list(range(m.num_atoms))
    random.Random(0).shuffle(order)
    assert write_canonical(permute(m, order)) == canon

    d = descriptors(m)
    print(f"{seed['id']} ({seed['family']})")
    print(f"  canonical  {canon}")
    print(f"  MW {d.mw:.2f}  exact {d.exact_mass:.4f}  cLogP {d.clogp:.2f}  TPSA {d.tpsa:.1f}")
    print(f"  HBD {d.hbd}  HBA {d.hba}  rotb {d.rotatable_bonds}  fsp3 {d.fsp3:.2f}  "
          f"stereocentres {d.stereocenters}  rings {d.ring_count} (largest {d.largest_ring})")
