"""Bundled analysis-ready models shipped with the package."""
from __future__ import annotations

from importlib import resources
from pathlib import Path

CBN_FILES = (
    "confounding.cbn.json",
    "confounding_measure_corr.cbn.json",
    "confounding_measure_causal.cbn.json",
    "perception.cbn.json",
)
FT_FILES = ("perception.ft.json",)
ANALYSIS_FILES = ("perception-analysis.json",)

ALL_FILES = CBN_FILES + FT_FILES + ANALYSIS_FILES


def bundled_path(name: str) -> Path:
    """Filesystem path of a bundled model file by bare name."""
    if name not in ALL_FILES:
        raise KeyError(f"no bundled model named {name!r}; available: {', '.join(ALL_FILES)}")
    return Path(str(resources.files(__name__).joinpath(name)))


def read_bundled(name: str) -> str:
    return bundled_path(name).read_text(encoding="utf-8")


def load_cbn(name: str):
    """Parse a bundled network by bare file name."""
    from causalsafety.network import parse_network

    return parse_network(read_bundled(name))


def load_ft(name: str = "perception.ft.json"):
    """Parse the bundled fault tree."""
    from causalsafety.faulttree import parse_fault_tree

    return parse_fault_tree(read_bundled(name))
