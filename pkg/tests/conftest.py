import os
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from timed_learn.core import load_automaton

FIXTURES = Path(__file__).parent / "fixtures"

settings.register_profile(
    "suite", max_examples=200, deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("suite")


def pytest_configure(config):
    seed = os.environ.get("TIMED_LEARN_SEED")
    if seed and getattr(config.option, "hypothesis_seed", None) is None:
        config.option.hypothesis_seed = int(seed)


def fixture(name):
    return load_automaton(str(FIXTURES / f"{name}.json"))


@pytest.fixture
def load():
    return fixture


# criterion number -> (title, passed); filled by test_acceptance
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        title, passed = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if passed else 'FAIL'}  {title}")
