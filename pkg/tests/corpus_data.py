"""Portfolio corpus shared by the test modules.

Each entry is ``(id, smiles, table_mw, table)`` where ``table_mw`` is the
integer molecular weight listed in the published portfolio tables.
"""

from __future__ import annotations

CORPUS = [
    ("SP1_fm_0599", "CCC(C)(C)CNc1cc(NC(=O)Cn2cc(-c3cc(C)c(O)c(C#N)c3)c3c(=O)n(C)cnc32)c(Cl)cn1", 547, "BCL6"),
    ("TR1_fm_0648", "Cc1cc(-c2cn(CC(=O)Nc3cc(C4CCCCC4)ncc3Cl)c3ncn(C)c(=O)c23)cc(C#N)c1O", 530, "BCL6"),
    ("div_BM_5_1782", "Nc1cc(Cl)c(Nc2cc(C[C@@]34CC[C@@H]3C4)c3[nH]c(=O)[nH]c3c2)cc1NCCCO", 427, "BCL6"),
    ("ben_sd6_1122", "CNc1nc(Nc2ccc3c(c2)c2c(c(=O)n3C)OCC(F)(F)[C@H](C3CC3)N2)c(Cl)c(C2CC(C)(C)C2)n1", 544, "BCL6"),
    ("LR6_fm_0306", "Cn1cnc2c(c(-c3ccc(O)c(C#N)c3)cn2CNC(=O)NC2=C(Br)CCCC2)c1=O", 496, "BCL6"),
    ("div_BM_5_1773", "Nc1cc(Cl)c(Nc2cc(OC3(F)CCC3)c3[nH]c(=O)[nH]c3c2)cc1NCCCO", 435, "BCL6"),
    ("pyr_2_2170", "O=C(Cn1c(-c2ccc(Br)s2)cc2c(=O)[nH]c(NCC3CC3)nc21)Nc1ccncc1Cl", 532, "BCL6"),
    ("chi8_fm_1296", "Cn1c(=O)c2c(c3cc(Nc4c(F)cncc4C4=CCCCC4)ccc31)N[C@@H](C1CC1)C(F)(F)CO2", 496, "BCL6"),
    ("RC1_fm_0313", "Cc1ncnc(Nc2ccc3c(c2)c2c(c(=O)n3C)OC(F)(F)[C@H](C3CC3)N2)c1Br", 477, "BCL6"),
    ("1b_azaindole_mol16", "CCSCCNC(=O)C1CCC([C@H](C)n2c(C)c(C(=O)NCc3c(SC)cc(C)[nH]c3=O)c3ncccc32)CC1", 584, "EZH2"),
    ("chimera_bcp_mol828", "CSCCCNC(=O)C12CC([C@@H](C)n3c(C)c(C(=O)NCc4c(SC)cc(C)[nH]c4=O)c4ccccc43)(C1)C2", 567, "EZH2"),
    ("7d_mol1628", "Cc1cc(C)c(CN2CCc3c(Br)c(OC(C)(C)C45CCC(N(C)C)(CC4)CC5)nc(C)c3C2=O)c(=O)[nH]1", 586, "EZH2"),
    ("2c_mol1428", "CSc1cc(C)[nH]c(=O)c1CNC(=O)c1cc(Cl)c(OC(C)(C)[C@H]2CC[C@H](N(C)C)CC2)cc1C", 520, "EZH2"),
    ("6e_mol804", "CCCc1cc(C)[nH]c(=O)c1CNC(=O)c1cc(-c2ccc(N(CC)CCO)nc2)c2cnn(C(C)C)c2c1C", 545, "EZH2"),
    ("3c_mol353", "CSc1cc(C)[nH]c(=O)c1CN1CN(C)c2c(Cl)cc(N3C(=O)NC[C@@H]3C)c(Cl)c2C1=O", 496, "EZH2"),
    ("4c_mol507", "C=C(C[C@H](C)C(=O)NC(C)(C)C)[C@@H](C)n1c(C)c(C(=O)NCc2c(SC)cc(C)[nH]c2=O)c2ncncc21", 539, "EZH2"),
]

BY_ID = {cid: smi for cid, smi, _, _ in CORPUS}

# Small molecules (<= 12 heavy atoms) used where brute-force oracles are
# exponential in molecule size.
SMALL = [
    "CCO", "c1ccccc1", "Cc1ccccc1", "O=[N+]([O-])c1ccccc1", "CC=O", "CC(C)=O",
    "C1CO1", "C1COC1", "Nc1ccccc1", "Oc1ccccc1", "CCS", "C=CC(=O)C",
    "C#CCO", "CCN=[N+]=[N-]", "C1CCCCCCC1", "c1ccncc1", "NN", "CC(=O)Cl",
    "OC(=O)c1ccccc1", "Clc1ccccn1", "C1CC2CCC1N2", "CN1C2CCC1CC2", "O=CC=O",
    "CC(C)(C)c1ccc(O)cc1", "c1ccc2ccccc2c1", "C1=CC=CC=C1C=O", "CSC", "NC(=O)N",
    "CCOC(=O)C", "FC(F)(F)c1ccccc1",
]
