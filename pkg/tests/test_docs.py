"""The schema copies shipped in docs/ must match the packaged ones."""

from importlib import resources
from pathlib import Path

import pytest

DOCS = Path(__file__).parent.parent / "docs" / "schemas"
NAMES = sorted(p.name for p in DOCS.glob("*.json"))


def test_docs_ship_every_schema():
    packaged = sorted(
        entry.name
        for entry in resources.files("bsmix.schemas").iterdir()
        if entry.name.endswith(".json")
    )
    assert NAMES == packaged


@pytest.mark.parametrize("name", NAMES)
def test_no_drift(name):
    packaged = resources.files("bsmix.schemas").joinpath(name).read_text()
    assert (DOCS / name).read_text() == packaged
