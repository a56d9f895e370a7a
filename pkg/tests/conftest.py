from __future__ import annotations

import pytest

from actol.pipeline import corpus_entry


def corpus_text(name: str, suffix: str = ".acp") -> str:
    entry = corpus_entry(name)
    path = {".acp": entry.program, ".preds": entry.predicates, ".rank": entry.ranking}[suffix]
    return path.read_text()


@pytest.fixture(scope="session")
def analyses():
    """Pipeline results for every shipped corpus program, computed once."""
    from actol.pipeline import discover

    return {e.name: e.analyze() for e in discover()}
