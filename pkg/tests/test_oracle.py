from functools import lru_cache

import pytest
from hypothesis import given, settings, strategies as st

from mbl.adversaries import Insertion, ThresholdMaximin
from mbl.engine import Protocol
from mbl.families import (
    FunctionFamily, SizeError, build_permutation_family, build_threshold_family, spread_thresholds,
)
from mbl.learners import EliminateOneLearner, HalvingLearner
from mbl.oracle import (
    Solver, adversary_forced, enumerate_queries, exact_opt, learner_worst_case, query_space_size,
)


def small_families(max_f=6, max_x=4, labels=2):
    row = lambda X: st.tuples(*[st.integers(0, labels - 1)] * X)
    return st.integers(1, max_x).flatmap(
        lambda X: st.sets(row(X), min_size=1, max_size=max_f).map(
            lambda rows: FunctionFamily(X, labels, tuple(sorted(rows)))))


def standard_value(fam):
    """Mistake-tree depth, computed by direct recursion over hypothesis subsets."""
    @lru_cache(maxsize=None)
    def depth(V):
        best = 0
        for x in range(1, fam.domain_size + 1):
            cls = {}
            for i in V:
                cls.setdefault(fam.table[i][x - 1], []).append(i)
            if len(cls) < 2:
                continue
            sizes = sorted((depth(frozenset(c)) for c in cls.values()), reverse=True)
            best = max(best, sizes[1] + 1)
        return best
    return depth(frozenset(range(len(fam))))


def bandit_value(fam):
    """Yes/no feedback on a single-label guess, by direct recursion."""
    @lru_cache(maxsize=None)
    def val(V):
        best = 0
        for x in range(1, fam.domain_size + 1):
            cls = {}
            for i in V:
                cls.setdefault(fam.table[i][x - 1], set()).add(i)
            if len(cls) < 2:
                continue
            best = max(best, min(max(val(frozenset(c)), 1 + val(V - c)) for c in cls.values()))
        return best
    return val(frozenset(range(len(fam))))


@settings(max_examples=60, deadline=None)
@given(small_families())
def test_standard_value_matches_independent_recursion(fam):
    assert exact_opt(Protocol("standard"), fam) == standard_value(fam)


@settings(max_examples=60, deadline=None)
@given(small_families(labels=3))
def test_bandit_value_matches_independent_recursion(fam):
    assert exact_opt(Protocol("bandit"), fam) == bandit_value(fam)


@settings(max_examples=30, deadline=None)
@given(small_families(max_f=5, max_x=3))
def test_value_ordering(fam):
    weak = exact_opt(Protocol("bandit"), fam)
    strong = exact_opt(Protocol("standard"), fam)
    assert strong <= weak <= len(fam) - 1
    assert learner_worst_case(Protocol("bandit"), fam, HalvingLearner) >= weak
    assert learner_worst_case(Protocol("bandit"), fam, EliminateOneLearner) <= len(fam) - 1


# frozen from the independent recursions above and the p(n) sum
@pytest.mark.parametrize("protocol, family, value", [
    (Protocol("cart_weak", 1), ("threshold", 4), 2),
    (Protocol("cart_weak", 1), ("threshold", 8), 3),
    (Protocol("amb", 2), ("threshold", 4), 3),
    (Protocol("order", 2), ("perm", 3), 2),
    (Protocol("order", 2), ("perm", 4), 4),
    (Protocol("delayed_relpos", 1), ("perm", 4), 4),
])
def test_frozen_values(protocol, family, value):
    kind, size = family
    fam = (build_threshold_family(2 * size, spread_thresholds(size, 2 * size)) if kind == "threshold"
           else build_permutation_family(size))
    assert exact_opt(protocol, fam, max_hypotheses=24) == value


def test_query_enumeration_sizes():
    for model, r, n in [("order", 2, 4), ("comparison", 2, 3), ("selection", 2, 4), ("relpos", 2, 4)]:
        proto = Protocol(model, r)
        assert len(enumerate_queries(proto, n)) == query_space_size(proto, n)


def test_caps_raise_size_error():
    with pytest.raises(SizeError):
        exact_opt(Protocol("order", 2), build_permutation_family(4))
    with pytest.raises(SizeError):
        exact_opt(Protocol("order", 2), build_permutation_family(12, implicit=True))


def test_tree_lines_are_indented():
    fam = build_threshold_family(8, spread_thresholds(4, 8))
    lines = Solver(Protocol("cart_weak", 1), fam).tree()
    assert lines[0].startswith("|V|=4 value=2")
    assert any(line.startswith("  ") for line in lines[1:])


def test_sandwich_on_threshold():
    fam = build_threshold_family(12, spread_thresholds(6, 12))
    proto = Protocol("cart_weak", 1)
    assert adversary_forced(proto, fam, ThresholdMaximin) <= exact_opt(proto, fam) \
        <= learner_worst_case(proto, fam, HalvingLearner)


def test_adversary_forced_counts_the_best_learner():
    fam = build_permutation_family(4)
    assert adversary_forced(Protocol("order", 2), fam, Insertion) == 4
