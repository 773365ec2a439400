"""molforge: a small cheminformatics and generative-campaign toolkit."""

from __future__ import annotations

__version__ = "0.1.0"
