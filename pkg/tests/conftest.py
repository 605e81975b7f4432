import random
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings, strategies as st

from anglers.census import random_triangulation

settings.register_profile(
    "repo", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow], derandomize=True
)
settings.load_profile("repo")

DATA = Path(__file__).resolve().parent.parent / "data"


@pytest.fixture
def data_dir() -> Path:
    return DATA


@st.composite
def triangulations(draw, min_tets=1, max_tets=6):
    n = draw(st.integers(min_tets, max_tets))
    seed = draw(st.integers(0, 2**32 - 1))
    return random_triangulation(n, random.Random(seed))


# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}")
