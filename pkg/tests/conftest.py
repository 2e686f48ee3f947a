from __future__ import annotations

import json
from pathlib import Path

import pytest

from twistzero import DELTA, THETA_ETA6, TwistedL

ORACLES = json.loads((Path(__file__).parent / "oracles" / "oracles.json").read_text())


@pytest.fixture(scope="session")
def oracles():
    return ORACLES


@pytest.fixture(scope="session")
def L_delta():
    """Delta twisted by 1/5, table large enough for |t| <= 60."""
    return TwistedL.from_form(DELTA, 1, 5, t_max=60)


@pytest.fixture(scope="session")
def L_g():
    """theta(z) eta(4z)^6 (weight 7/2, level 16) twisted by 1/16."""
    return TwistedL.from_form(THETA_ETA6, 1, 16, t_max=60)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
