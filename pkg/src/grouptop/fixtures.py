"""Shipped data files: finite-group tables used by tests and the CLI.

The fixture directory can be overridden with the GROUPTOP_FIXTURES
environment variable; by default files ship inside the package.
"""

from __future__ import annotations

import json
import os
from importlib import resources
from pathlib import Path

from .groups import CayleyGroup, load_cayley

_ENV_VAR = "GROUPTOP_FIXTURES"


def fixture_text(name: str) -> str:
    override = os.environ.get(_ENV_VAR)
    if override:
        return (Path(override) / name).read_text()
    return resources.files("grouptop.data").joinpath(name).read_text()


def load_fixture_group(name: str) -> CayleyGroup:
    return load_cayley(json.loads(fixture_text(f"{name}.json")))


def dihedral8() -> CayleyGroup:
    """The dihedral group of order 8 from the shipped table."""
    return load_fixture_group("d4")
