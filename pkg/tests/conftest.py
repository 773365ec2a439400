from __future__ import annotations

import pytest

from corpus_data import CORPUS
from molforge.smiles import parse_smiles


@pytest.fixture(scope="session")
def corpus_molecules():
    """Parsed portfolio molecules keyed by id."""
    return {cid: parse_smiles(smi, name=cid) for cid, smi, _, _ in CORPUS}


def pytest_terminal_summary(terminalreporter):
    """Print the acceptance lines collected during the run."""
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        ok, detail = results[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
