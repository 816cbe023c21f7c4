import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from mbl.adversaries import AmbMedian, RandomAdversary, ThresholdMaximin
from mbl.engine import Protocol, ProtocolError, run_game
from mbl.engine.spaces import initial_space
from mbl.families import FunctionFamily, build_threshold_family, spread_thresholds
from mbl.learners import (
    EliminateOneLearner, ExpertPoolLearner, GreedySubroundLearner, HalvingLearner,
    RandomLearner, StandardFirst, StandardHalving, halving_guess, make_learner,
)
from mbl.verify import mistake_cap


def threshold(F):
    return build_threshold_family(2 * F, spread_thresholds(F, 2 * F))


def test_halving_picks_plurality_with_small_tiebreak():
    proto = Protocol("cart_weak", 1)
    vs = initial_space(proto, build_threshold_family(4, [1, 2, 3, 4]))
    assert halving_guess(vs, (2,)) == (0,)
    assert halving_guess(vs, (3,)) == (1,)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 40), st.integers(1, 3), st.integers(0, 10**6))
def test_halving_within_cap_against_random(F, r, seed):
    fam = threshold(F)
    tr = run_game(Protocol("cart_weak", r), fam, HalvingLearner(), RandomAdversary(), seed=seed)
    assert tr.mistakes <= mistake_cap("cart_weak", r, F)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 40), st.integers(1, 3), st.integers(0, 10**6))
def test_greedy_within_cap_against_random(F, r, seed):
    fam = threshold(F)
    tr = run_game(Protocol("amb", r), fam, GreedySubroundLearner(), RandomAdversary(), seed=seed)
    assert tr.mistakes <= mistake_cap("amb", r, F)


def test_greedy_refuses_whole_round_protocols():
    with pytest.raises(ProtocolError):
        run_game(Protocol("cart_weak", 1), threshold(4), GreedySubroundLearner(), ThresholdMaximin())


@pytest.mark.parametrize("F", [2, 5, 9])
def test_eliminate_one_removes_a_hypothesis_per_mistake(F):
    tr = run_game(Protocol("cart_weak", 1), threshold(F), EliminateOneLearner(), ThresholdMaximin(),
                  round_budget=4 * F)
    assert tr.mistakes <= F - 1
    assert all(rec.size_after < rec.size_before for rec in tr.rounds if rec.mistake)


@given(st.integers(0, 10**6))
def test_random_learner_guesses_are_legal(seed):
    tr = run_game(Protocol("cart_weak", 2), threshold(8), RandomLearner(), RandomAdversary(), seed=seed)
    assert tr.fault is None


def test_standard_bases():
    fam = FunctionFamily(3, 2, ((0, 0, 0), (0, 1, 1), (1, 1, 0), (1, 0, 1)))
    h = StandardHalving(fam)
    assert h.mistake_bound() == 2
    st0 = h.initial_state()
    assert h.predict(st0, 1) == 0
    assert h.learn(st0, 1, 1) == 0b1100
    first = StandardFirst(fam)
    assert first.mistake_bound() == 3
    assert first.predict(0b1100, 2) == 1


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([4, 8, 16]), st.integers(1, 2), st.integers(0, 10**6))
def test_expert_pool_bookkeeping(F, r, seed):
    learner = ExpertPoolLearner()
    tr = run_game(Protocol("amb", r), threshold(F), learner, RandomAdversary(), seed=seed)
    assert tr.fault is None
    assert learner.mistakes == tr.mistakes
    assert all(c.state for c in learner.copies)
    assert learner.max_exponent() <= learner.mistakes
    assert learner.alpha == pytest.approx(1 / (2**r * math.log(2)))
    assert len(learner.history) == len(tr.rounds) + 1


def test_expert_pool_clone_count():
    # one wrong round: each winner becomes k^r - 1 clones, minus those with no consistent row
    learner = ExpertPoolLearner()
    fam = threshold(8)
    learner.bind(Protocol("amb", 2), fam, random.Random(0))
    vs = initial_space(Protocol("amb", 2), fam)
    so_far = []
    for x in (5, 11):
        so_far.append((x, learner.subround_guess(vs, 0, tuple(so_far), x)))
    q, g = tuple(x for x, _ in so_far), tuple(y for _, y in so_far)
    learner.update(vs, q, g, False, vs)
    assert learner.mistakes == 1
    assert all(c.exponent == 1 for c in learner.copies)
    assert 1 <= learner.copy_count() <= 2**2 - 1


def test_expert_pool_only_plays_amb():
    with pytest.raises(ProtocolError):
        run_game(Protocol("cart_weak", 1), threshold(4), ExpertPoolLearner(), ThresholdMaximin())
    with pytest.raises(ValueError):
        ExpertPoolLearner(base="nope")


def test_make_learner():
    assert isinstance(make_learner("expert-pool", base="eliminate-one"), ExpertPoolLearner)
    with pytest.raises(KeyError):
        make_learner("nope")
