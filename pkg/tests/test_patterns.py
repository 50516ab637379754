import numpy as np
import pytest

from stavskaya.errors import ResourceLimitError
from stavskaya.patterns import (ForbiddenSet, Parameters, Step, SuffixTrie,
                                build_forbidden_set, enumerate_primitive_loops,
                                pattern_code, pattern_displacement,
                                pattern_text, step_weight, swap_pattern,
                                text_to_pattern)


def test_parameter_validation():
    Parameters(1.0, 1.0, 0.0)
    Parameters(2.5, 1.1, 1.0)
    with pytest.raises(ValueError):
        Parameters(0.99, 1.0, 0.5)
    with pytest.raises(ValueError):
        Parameters(1.0, 0.5, 0.5)
    with pytest.raises(ValueError):
        Parameters(1.0, 1.0, 1.5)
    with pytest.raises(ValueError):
        Parameters(1.0, 1.0, -0.1)


@pytest.mark.parametrize("kind,params,want", [
    (2, Parameters(1, 1, 0.5), 0.5),
    (1, Parameters(2, 1, 0.7), 0.5),
    (3, Parameters(2, 3, 0.2), 1.5),
])
def test_step_weight_examples(kind, params, want):
    assert step_weight(kind, params) == pytest.approx(want, abs=1e-15)


def test_step_weight_formulas():
    params = Parameters(1.7, 1.3, 0.42)
    assert step_weight(1, params) == pytest.approx(1 / (1.7 * 1.3), rel=1e-15)
    assert step_weight(2, params) == pytest.approx(0.42 * 1.7**2, rel=1e-15)
    assert step_weight(3, params) == pytest.approx(1.3 / 1.7, rel=1e-15)
    with pytest.raises(ValueError):
        step_weight(4, params)


def test_step_displacements():
    assert Step(1).displacement == (-1, -1)
    assert Step(2).displacement == (2, 0)
    assert Step(3).displacement == (-1, 1)
    with pytest.raises(ValueError):
        Step(0)


def test_pattern_text_roundtrip():
    assert pattern_text((1, 2, 3)) == "123"
    assert text_to_pattern("321") == (3, 2, 1)
    with pytest.raises(ValueError):
        text_to_pattern("104")


def test_order_one_loops():
    lower = build_forbidden_set(0)
    assert set(enumerate_primitive_loops(1, lower)) == {(1, 2, 3), (3, 2, 1)}


def test_order_two_loops():
    lower = build_forbidden_set(1)
    assert set(enumerate_primitive_loops(2, lower)) == {
        (1, 1, 2, 2, 3, 3), (3, 3, 2, 2, 1, 1)}


def test_order_three_count():
    lower = build_forbidden_set(2)
    assert len(enumerate_primitive_loops(3, lower)) == 6


def test_primitivity_needs_matching_level():
    with pytest.raises(ValueError):
        enumerate_primitive_loops(3, build_forbidden_set(1))


EXPECTED_TOTALS = {0: 2, 1: 4, 2: 6, 3: 12, 4: 36, 5: 146}
EXPECTED_PER_ORDER = {1: 2, 2: 2, 3: 6, 4: 24, 5: 110}


@pytest.mark.parametrize("n,total", sorted(EXPECTED_TOTALS.items()))
def test_forbidden_set_sizes(n, total):
    assert len(build_forbidden_set(n)) == total


def test_per_order_counts(fset5):
    for k, want in EXPECTED_PER_ORDER.items():
        assert fset5.count_of_order(k) == want


def test_degenerate_pair_always_present(fset5):
    for n in range(0, 6):
        fset = fset5.restrict(n)
        assert (1, 3) in fset
        assert (3, 1) in fset


def test_loops_are_balanced_and_closed(fset5):
    for pat in fset5:
        if len(pat) == 2:
            continue
        k = len(pat) // 3
        assert len(pat) == 3 * k
        assert all(pat.count(kind) == k for kind in (1, 2, 3))
        assert pattern_displacement(pat) == (0, 0)


def test_swap_and_reversal_closure(fset5):
    for n in range(0, 6):
        patterns = set(fset5.restrict(n).patterns)
        assert {swap_pattern(p) for p in patterns} == patterns
        assert {tuple(reversed(p)) for p in patterns} == patterns


def test_mutual_primitivity(fset5):
    # no member is a contiguous factor of another
    pats = fset5.patterns
    for a in pats:
        for b in pats:
            if a is b or len(a) > len(b):
                continue
            m = len(a)
            hits = sum(b[s:s + m] == a for s in range(len(b) - m + 1))
            assert hits == (1 if a == b else 0), (a, b)


def test_canonical_order(fset5):
    keys = [(len(p), pattern_code(p)) for p in fset5.patterns]
    assert keys == sorted(keys)
    assert len(set(keys)) == len(keys)


def test_level_cap():
    with pytest.raises(ResourceLimitError):
        build_forbidden_set(14)
    with pytest.raises(ValueError):
        build_forbidden_set(-1)


def test_restrict_matches_direct_build(fset5):
    for n in range(0, 5):
        assert fset5.restrict(n).patterns == build_forbidden_set(n).patterns


def test_forbidden_set_validation():
    with pytest.raises(ValueError):
        ForbiddenSet(0, [(1,)])
    with pytest.raises(ValueError):
        ForbiddenSet(0, [(1, 4)])


def test_suffix_trie_blocks_known_suffixes():
    trie = SuffixTrie(build_forbidden_set(1).patterns)
    # prefix "22" + digit: appending 1 or 2 fine, pattern-free
    codes = np.array([4], dtype=np.uint64)  # "22"
    assert not trie.blocked_on_append(codes, 2, 0)[0]
    # prefix "12" + step 3 completes "123"
    codes = np.array([1], dtype=np.uint64)  # "12"
    assert trie.blocked_on_append(codes, 2, 2)[0]
    # prefix "21" + step 3 completes the degenerate "13"
    codes = np.array([3], dtype=np.uint64)  # "21"
    assert trie.blocked_on_append(codes, 2, 2)[0]
