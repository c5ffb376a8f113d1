import warnings

import pytest

from atlkf import fixtures
from atlkf.random_models import random_model


@pytest.fixture(scope="session")
def m1():
    return fixtures.load("m1")


@pytest.fixture(scope="session")
def m2():
    return fixtures.load("m2")


@pytest.fixture(scope="session")
def cg1():
    return fixtures.load("cg_oneround")


@pytest.fixture(scope="session")
def cg():
    return fixtures.load("cg_repeat")


@pytest.fixture(scope="session")
def cg_fair():
    return fixtures.load("cg_repeat_fair")


@pytest.fixture(scope="session")
def all_fixtures():
    return {name: fixtures.load(name) for name in fixtures.NAMES}


def names(m, states):
    return {m.state_name(s) for s in states}


def random_models(count, start=0, **kwargs):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return [random_model(seed, **kwargs) for seed in range(start, start + count)]


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
