"""Element table: symbols, IUPAC 2021 standard atomic weights, valence model."""

from __future__ import annotations

from functools import lru_cache

# fmt: off
SYMBOLS: tuple[str, ...] = (
    "*",
    "H", "He", "Li", "Be", "B", "C", "N", "O", "F", "Ne",
    "Na", "Mg", "Al", "Si", "P", "S", "Cl", "Ar", "K", "Ca",
    "Sc", "Ti", "V", "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn",
    "Ga", "Ge", "As", "Se", "Br", "Kr", "Rb", "Sr", "Y", "Zr",
    "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag", "Cd", "In", "Sn",
    "Sb", "Te", "I", "Xe", "Cs", "Ba", "La", "Ce", "Pr", "Nd",
    "Pm", "Sm", "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb",
    "Lu", "Hf", "Ta", "W", "Re", "Os", "Ir", "Pt", "Au", "Hg",
    "Tl", "Pb", "Bi", "Po", "At", "Rn", "Fr", "Ra", "Ac", "Th",
    "Pa", "U", "Np", "Pu", "Am", "Cm", "Bk", "Cf", "Es", "Fm",
    "Md", "No", "Lr", "Rf", "Db", "Sg", "Bh", "Hs", "Mt", "Ds",
    "Rg", "Cn", "Nh", "Fl", "Mc", "Lv", "Ts", "Og",
)

# IUPAC 2021 abridged standard atomic weights (conventional values for
# interval elements); mass number of the longest-lived isotope where no
# standard weight exists.
AVERAGE_WEIGHTS: tuple[float, ...] = (
    0.0,
    1.008, 4.0026, 6.94, 9.0122, 10.81, 12.011, 14.007, 15.999, 18.998, 20.180,
    22.990, 24.305, 26.982, 28.085, 30.974, 32.06, 35.45, 39.95, 39.098, 40.078,
    44.956, 47.867, 50.942, 51.996, 54.938, 55.845, 58.933, 58.693, 63.546, 65.38,
    69.723, 72.630, 74.922, 78.971, 79.904, 83.798, 85.468, 87.62, 88.906, 91.224,
    92.906, 95.95, 97.0, 101.07, 102.91, 106.42, 107.87, 112.41, 114.82, 118.71,
    121.76, 127.60, 126.90, 131.29, 132.91, 137.33, 138.91, 140.12, 140.91, 144.24,
    145.0, 150.36, 151.96, 157.25, 158.93, 162.50, 164.93, 167.26, 168.93, 173.05,
    174.97, 178.49, 180.95, 183.84, 186.21, 190.23, 192.22, 195.08, 196.97, 200.59,
    204.38, 207.2, 208.98, 209.0, 210.0, 222.0, 223.0, 226.0, 227.0, 232.04,
    231.04, 238.03, 237.0, 244.0, 243.0, 247.0, 247.0, 251.0, 252.0, 257.0,
    258.0, 259.0, 262.0, 267.0, 268.0, 269.0, 270.0, 269.0, 278.0, 281.0,
    282.0, 285.0, 286.0, 289.0, 290.0, 293.0, 294.0, 294.0,
)

# Mass of the most abundant isotope, for monoisotopic (exact) masses.
MONOISOTOPIC_MASSES: tuple[float, ...] = (
    0.0,
    1.007825, 4.002603, 7.016005, 9.012182, 11.009305, 12.000000, 14.003074, 15.994915, 18.998403, 19.992440,
    22.989769, 23.985042, 26.981539, 27.976927, 30.973762, 31.972071, 34.968853, 39.962383, 38.963707, 39.962591,
    44.955912, 47.947946, 50.943959, 51.940508, 54.938045, 55.934937, 58.933195, 57.935343, 62.929597, 63.929142,
    68.925574, 73.921178, 74.921597, 79.916521, 78.918337, 83.911507, 84.911790, 87.905612, 88.905848, 89.904704,
    92.906378, 97.905408, 96.906365, 101.904349, 102.905504, 105.903486, 106.905097, 113.903358, 114.903878, 119.902195,
    120.903816, 129.906224, 126.904473, 131.904154, 132.905452, 137.905247, 138.906353, 139.905439, 140.907653, 141.907723,
    144.912749, 151.919732, 152.921230, 157.924104, 158.925347, 163.929175, 164.930322, 165.930293, 168.934213, 173.938862,
    174.940772, 179.946550, 180.947996, 183.950931, 186.955753, 191.961481, 192.962926, 194.964791, 196.966569, 201.970643,
    204.974427, 207.976652, 208.980399, 208.982430, 209.987148, 222.017571, 223.019736, 226.025403, 227.027752, 232.038055,
    231.035884, 238.050788, 236.046570, 238.049560, 241.056829, 243.061389, 247.070307, 249.074853, 252.082980, 257.095105,
    258.098431, 259.101030, 262.109630, 267.121530, 268.125450, 271.133470, 270.133620, 269.134060, 278.154810, 281.162060,
    281.165370, 285.174110, 284.178730, 289.190420, 288.192740, 293.204490, 292.207460, 294.213920,
)
# fmt: on

ATOMIC_NUMBERS: dict[str, int] = {s: z for z, s in enumerate(SYMBOLS) if z}

H, B, C, N, O, F, SI, P, S, CL, SE, BR, I = 1, 5, 6, 7, 8, 9, 14, 15, 16, 17, 34, 35, 53

# Uncharged allowed valences. Elements absent here are unchecked.
_BASE_VALENCES: dict[int, tuple[int, ...]] = {
    1: (1,),
    3: (1,), 11: (1,), 19: (1,), 37: (1,), 55: (1,),
    4: (2,), 12: (2,), 20: (2,), 30: (2,),
    5: (3,), 13: (3,),
    6: (4,), 14: (4,), 32: (4,),
    7: (3,), 15: (3, 5), 33: (3, 5),
    8: (2,), 16: (2, 4, 6), 34: (2, 4, 6), 52: (2, 4, 6),
    9: (1,), 17: (1,), 35: (1,), 53: (1,),
}
_ELECTROPOSITIVE = {3, 11, 19, 37, 55, 4, 12, 20, 30, 5, 13}
_GROUP14 = {6, 14, 32}

# Symbols allowed without brackets, and those that may be written lowercase.
ORGANIC_SUBSET = frozenset({B, C, N, O, P, S, F, CL, BR, I})
AROMATIC_CAPABLE = frozenset({B, C, N, O, P, S, SE, 33, 52})


def symbol(z: int) -> str:
    return SYMBOLS[z]


def atomic_number(sym: str) -> int:
    """Atomic number for a case-sensitive symbol; KeyError if unknown."""
    return ATOMIC_NUMBERS[sym]


@lru_cache(maxsize=None)
def allowed_valences(z: int, charge: int = 0) -> tuple[int, ...] | None:
    """Allowed valences for an element at a given formal charge.

    Charge shifts valence by its sign: electron-rich main-group atoms gain a
    bond per positive charge (N+ -> 4, O+ -> 3), group-14 atoms lose one per
    unit of charge either way (C+ and C- -> 3), electropositive atoms gain a
    bond per negative charge (B- -> 4). Returns None for unchecked elements.
    """
    base = _BASE_VALENCES.get(z)
    if base is None:
        return None
    if z == 1 or z in _GROUP14:
        shifted = [v - abs(charge) for v in base]
    elif z in _ELECTROPOSITIVE:
        shifted = [v - charge for v in base]
    else:
        shifted = [v + charge for v in base]
    return tuple(v for v in shifted if v >= 0)


def average_weight(z: int) -> float:
    return AVERAGE_WEIGHTS[z]


def monoisotopic_mass(z: int) -> float:
    return MONOISOTOPIC_MASSES[z]
