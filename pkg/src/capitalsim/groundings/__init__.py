"""Concrete environments for the capital model, built in code and shipped as files."""

from __future__ import annotations

from pathlib import Path

from .base import PROPOSITIONS, STATUSES, GroundingSpec
from .fileformat import dump_grounding, load_grounding, parse_grounding, validate_grounding_text
from .fixtures import (
    BUILDERS,
    make_coupled_pair,
    make_epoch,
    make_market_grid,
    make_memory,
    make_proportional,
    make_random_coupled,
    make_static,
    make_trapdoor,
)

DATA_DIR = Path(__file__).resolve().parent.parent / "data"


def shipped_path(name: str) -> Path:
    return DATA_DIR / f"{name}.grounding"


def builtin(name: str) -> GroundingSpec:
    """Load a shipped fixture from its file."""
    if name not in BUILDERS:
        raise KeyError(f"unknown builtin grounding {name!r}; choose from {', '.join(BUILDERS)}")
    return load_grounding(shipped_path(name))


def resolve(name_or_path: str) -> GroundingSpec:
    """A builtin name, or a path to a grounding file."""
    if name_or_path in BUILDERS:
        return builtin(name_or_path)
    return load_grounding(name_or_path)


def write_shipped() -> list[Path]:
    """Regenerate the data directory from the builders."""
    DATA_DIR.mkdir(exist_ok=True)
    paths = []
    for name, build in BUILDERS.items():
        path = shipped_path(name)
        path.write_text(dump_grounding(build()))
        paths.append(path)
    return paths


__all__ = [
    "BUILDERS",
    "DATA_DIR",
    "PROPOSITIONS",
    "STATUSES",
    "GroundingSpec",
    "builtin",
    "dump_grounding",
    "load_grounding",
    "make_coupled_pair",
    "make_epoch",
    "make_market_grid",
    "make_memory",
    "make_proportional",
    "make_random_coupled",
    "make_static",
    "make_trapdoor",
    "parse_grounding",
    "resolve",
    "shipped_path",
    "validate_grounding_text",
    "write_shipped",
]
