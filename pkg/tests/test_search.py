import math

import pytest

from stavskaya.patterns import Parameters
from stavskaya.search import alpha_sup, optimize_p
from stavskaya.spectral import is_subcritical


def test_bisection_iteration_count(small_levels):
    _, table = small_levels[1]
    res = alpha_sup(table, 1.464, 1.0, 1e-10)
    assert res.iterations == math.ceil(math.log2(1e10)) == 34
    assert res.alpha_high - res.alpha_low <= 1e-10
    assert 0.0 <= res.alpha_low < res.alpha_high <= 1.0


def test_level_one_published_point(small_levels):
    _, table = small_levels[1]
    res = alpha_sup(table, 1.464, 1.0, 1e-10)
    assert res.certified
    assert res.alpha_low == pytest.approx(0.125, abs=5e-4)
    assert res.certificate < 1.0


def test_level_three_published_point(small_levels):
    _, table = small_levels[3]
    res = alpha_sup(table, 1.43, 1.0, 1e-10)
    assert res.certified
    assert res.alpha_low == pytest.approx(0.13358660, abs=1e-6)


def test_degenerate_bracket(small_levels):
    # p = q = 1 keeps weight-1 runs alive at alpha = 0: nothing to certify
    _, table = small_levels[1]
    res = alpha_sup(table, 1.0, 1.0, 1e-10)
    assert res.degenerate
    assert not res.certified
    assert res.alpha_low == 0.0
    assert res.iterations == 0


def test_returned_endpoint_recertifies(small_levels):
    for n in (1, 2):
        _, table = small_levels[n]
        res = alpha_sup(table, 1.45, 1.0, 1e-8)
        assert is_subcritical(table, Parameters(1.45, 1.0, res.alpha_low))
        assert not is_subcritical(table, Parameters(1.45, 1.0, res.alpha_high))


def test_bound_is_conservative(small_levels):
    # coarse and fine tolerances certify nested values
    _, table = small_levels[2]
    coarse = alpha_sup(table, 1.44, 1.0, 1e-4)
    fine = alpha_sup(table, 1.44, 1.0, 1e-10)
    assert coarse.alpha_low <= fine.alpha_low + 1e-4
    assert fine.alpha_low >= coarse.alpha_low - 1e-12


def test_optimizer_level_two(small_levels):
    _, table = small_levels[2]
    best = optimize_p(2, 1.40, 1.50, 0.005, 0.001, table=table)
    pinned = alpha_sup(table, 1.44, 1.0, 1e-10)
    assert best.p_opt == pytest.approx(1.44, abs=0.01)
    assert best.bound >= pinned.alpha_low - 1e-8
    assert (best.p_opt, best.bound) in [(p, b) for p, b in best.grid]
    assert best.bound == max(b for _, b in best.grid)


def test_optimizer_grid_is_deterministic(small_levels):
    _, table = small_levels[1]
    a = optimize_p(1, 1.44, 1.49, 0.01, 0.005, table=table, threads=1)
    b = optimize_p(1, 1.44, 1.49, 0.01, 0.005, table=table, threads=2)
    assert a.grid == b.grid
    assert a.p_opt == b.p_opt and a.bound == b.bound


def test_optimizer_handles_degenerate_points(small_levels):
    # p = 1 is degenerate and must surface as a zero-bound grid point
    _, table = small_levels[1]
    best = optimize_p(1, 1.0, 1.02, 0.01, 0.01, table=table)
    assert (1.0, 0.0) in best.grid
    assert best.bound > 0.0


def test_optimizer_validation(small_levels):
    _, table = small_levels[1]
    with pytest.raises(ValueError):
        optimize_p(1, 1.5, 1.4, 0.01, 0.001, table=table)
    with pytest.raises(ValueError):
        optimize_p(1, 1.4, 1.5, -0.01, 0.001, table=table)


def test_level_monotonicity(small_levels):
    # deeper memory never weakens the bound at its own optimum
    bounds = []
    for n in (1, 2, 3):
        _, table = small_levels[n]
        best = optimize_p(n, 1.40, 1.50, 0.01, 0.002, table=table)
        bounds.append(best.bound)
    for lo, hi in zip(bounds, bounds[1:]):
        assert hi >= lo - 1e-9
