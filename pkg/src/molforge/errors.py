"""Exception hierarchy shared across molforge."""

from __future__ import annotations


class MolforgeError(Exception):
    """Base class for every error raised by molforge."""


class MoleculeError(MolforgeError):
    """A molecular graph could not be constructed."""


class GraphError(MoleculeError):
    """Malformed connectivity: self-loop, duplicate bond or bad atom index."""


class ValenceError(MoleculeError):
    """An atom exceeds (or cannot reach) an allowed valence."""

    def __init__(self, message: str, atom_index: int | None = None, step: int | None = None):
        super().__init__(message)
        self.atom_index = atom_index
        self.step = step


class KekulizeError(ValenceError):
    """Aromatic bonds admit no consistent alternating single/double assignment."""


class ParseError(MolforgeError):
    """Text could not be parsed. ``position`` is a 0-based byte offset."""

    def __init__(self, reason: str, position: int = 0, text: str | None = None):
        self.reason = reason
        self.position = position
        self.text = text
        super().__init__(f"{reason} (at offset {position})")


class UnsupportedFeature(ParseError):
    """Syntactically valid input that uses a construct outside the supported subset."""


class WidthMismatch(MolforgeError, ValueError):
    pass


class EmptyReferenceSet(MolforgeError, ValueError):
    pass


class MissingParent(MolforgeError, ValueError):
    pass


class FullMask(MolforgeError, ValueError):
    pass


class RangeError(MolforgeError, ValueError):
    pass


class DecodeExhausted(MolforgeError):
    """No valence-valid completion survived beam search."""


class EmptyCorpus(MolforgeError, ValueError):
    pass


class SchemaError(MolforgeError, ValueError):
    pass


class LengthMismatch(MolforgeError, ValueError):
    pass


class DegenerateInput(MolforgeError, ValueError):
    pass


class SingleClass(MolforgeError, ValueError):
    pass


class JoinEmpty(MolforgeError, ValueError):
    pass


class EmptyBenchmark(MolforgeError, ValueError):
    pass


class ConfigError(MolforgeError, ValueError):
    pass
