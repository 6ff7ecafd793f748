import sys
from fractions import Fraction

import pytest
from hypothesis import strategies as st

from azflag.corpus import bundled_dir, load_flag


@pytest.fixture(scope="session")
def cases():
    return {p.stem: load_flag(p) for p in sorted(bundled_dir().glob("*.json"))}


def small_fractions(max_num=12, max_den=6):
    return st.builds(Fraction, st.integers(-max_num, max_num), st.integers(1, max_den))


def positive_fractions(max_num=12, max_den=6):
    return st.builds(Fraction, st.integers(1, max_num), st.integers(1, max_den))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(mod.RESULTS):
            terminalreporter.write_line(line)
