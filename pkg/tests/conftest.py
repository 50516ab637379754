import numpy as np
import pytest

from stavskaya.patterns import build_forbidden_set
from stavskaya.statespace import (TransitionTable, build_state_space,
                                  build_transitions, pred_from_succ)


def make_table(succ_rows, last_digit, n=1):
    """Hand-built transition table for toy operators in tests."""
    succ = np.asarray(succ_rows, dtype=np.int32)
    return TransitionTable(n=n, succ=succ, pred=pred_from_succ(succ),
                           last_digit=np.asarray(last_digit, dtype=np.uint8))


def pytest_addoption(parser):
    parser.addoption("--run-deep", action="store_true", default=False,
                     help="run the hours-scale level-7 headline check")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--run-deep"):
        return
    skip = pytest.mark.skip(reason="needs --run-deep")
    for item in items:
        if "deep" in item.keywords:
            item.add_marker(skip)


@pytest.fixture(scope="session")
def fset5():
    return build_forbidden_set(5)


@pytest.fixture(scope="session")
def small_levels(fset5):
    """(space, table) for levels 1..3, shared across the suite."""
    levels = {}
    for n in (1, 2, 3):
        space = build_state_space(n, fset5.restrict(n - 1))
        table = build_transitions(space, fset5.restrict(n))
        levels[n] = (space, table)
    return levels
