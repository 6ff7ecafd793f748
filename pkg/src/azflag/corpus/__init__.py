"""Flag-case files, the bundled corpus, and the numeric oracle."""

from __future__ import annotations

import os
from pathlib import Path

from .oracle import ErrorRow, OracleReport, compare_oracle, numeric_oracle, oracle_ok
from .runner import CaseReport, Comparison, RegionBound, regional_summary, run_case, run_path
from .schema import SCHEMA, Expected, FlagCase, dump_case, dumps_case, load_flag, parse_case

ENV_VAR = "AZFLAG_CORPUS_DIR"


def bundled_dir() -> Path:
    return Path(__file__).parent / "data"


def corpus_dir() -> Path:
    """The corpus location: ``$AZFLAG_CORPUS_DIR`` if set, else the bundled data."""
    env = os.environ.get(ENV_VAR)
    return Path(env) if env else bundled_dir()


def case_files(directory=None) -> list[Path]:
    return sorted(Path(directory or corpus_dir()).glob("*.json"))


def resolve_case(name_or_path, directory=None) -> Path:
    """A file path as given, or a bare case name looked up in the corpus directory."""
    p = Path(name_or_path)
    if p.exists() or p.suffix == ".json" and p.parent != Path("."):
        return p
    d = Path(directory or corpus_dir())
    cand = d / (p.name if p.suffix == ".json" else p.name + ".json")
    return cand if cand.exists() else p


__all__ = [
    "SCHEMA", "CaseReport", "Comparison", "ErrorRow", "Expected", "FlagCase", "OracleReport", "RegionBound",
    "bundled_dir", "case_files", "compare_oracle", "corpus_dir", "dump_case", "dumps_case", "load_flag",
    "numeric_oracle", "oracle_ok", "parse_case", "regional_summary", "resolve_case", "run_case", "run_path",
]
