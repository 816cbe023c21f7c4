import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from mbl.adversaries import Adversary, RandomAdversary, ThresholdMaximin
from mbl.engine import (
    AdversaryFault, IllegalFeedback, Protocol, ProtocolError, QueryError, filter_consistent, run_game,
)
from mbl.engine.protocols import (
    all_answers, answer_of, answer_space_size, check_guess, graded, normalize_query,
    single_comparison,
)
from mbl.engine.spaces import BitsetSpace, PosetSpace, count_linear_extensions, initial_space
from mbl.families import build_permutation_family, build_threshold_family, spread_thresholds
from mbl.learners import HalvingLearner


def test_protocol_validation():
    assert Protocol("standard").strong
    with pytest.raises(ProtocolError):
        Protocol("amb", 2, "strong")
    with pytest.raises(ProtocolError):
        Protocol("bandit", 2)
    with pytest.raises(ProtocolError):
        Protocol("nope")


def test_answers_per_model():
    f = {1: 3, 2: 1, 3: 2}.__getitem__
    assert answer_of("order", f, (1, 2, 3)) == (3, 1, 2)
    assert answer_of("comparison", f, ((1, 2), (2, 3))) == (False, True)
    assert answer_of("selection", f, (2, 3, 3)) == 3
    assert answer_of("relpos", f, (3, (1, 2))) == 2


def test_normalize_query():
    p = Protocol("order", 2)
    assert normalize_query(p, (3, 1), 4) == (1, 3)
    with pytest.raises(QueryError):
        normalize_query(p, (1, 1), 4)
    with pytest.raises(QueryError):
        normalize_query(Protocol("cart_weak", 2), (1, 9), 4)
    with pytest.raises(QueryError):
        normalize_query(Protocol("relpos", 1), (2, (2,)), 4)


@pytest.mark.parametrize("model, r", [("standard", 1), ("cart_weak", 2), ("order", 3), ("comparison", 2),
                                      ("selection", 3), ("relpos", 2), ("delayed_relpos", 2)])
def test_all_answers_are_well_formed(model, r):
    proto = Protocol(model, r)
    q = {"standard": 1, "cart_weak": (1, 2), "order": (1, 2, 3), "comparison": ((1, 2), (2, 3)),
         "selection": (1, 2, 3), "relpos": (1, (2, 3)), "delayed_relpos": (1, (2, 3))}[model]
    answers = all_answers(proto, q, 2)
    if model == "delayed_relpos":
        # guesses are token tuples, graded by how many tokens say "higher"
        assert len(answers) == 2**r
        assert len({graded(proto, a) for a in answers}) == answer_space_size(proto, 2)
    else:
        assert len(answers) == answer_space_size(proto, 2)
    assert all(check_guess(proto, q, a, 2) for a in answers)


def _brute_extensions(n, relations):
    return sum(all(p[a] < p[b] for a, b in relations) for p in itertools.permutations(range(n)))


@settings(max_examples=60)
@given(st.integers(2, 6), st.data())
def test_linear_extension_count(n, data):
    pairs = data.draw(st.lists(st.tuples(st.integers(1, n), st.integers(1, n)), max_size=6))
    space = PosetSpace(n, protocol=Protocol("order", 2))
    rels = []
    for a, b in pairs:
        if a == b or space.less(b, a):
            continue
        space = space.with_relation(a, b)
        rels.append((a - 1, b - 1))
    assert len(space) == _brute_extensions(n, rels)
    f = space.linear_extension()
    assert all(f[a] < f[b] for a, b in rels)


def test_poset_matches_bitset_on_comparisons():
    proto = Protocol("comparison", 1)
    fam = build_permutation_family(5)
    bs, ps = BitsetSpace.full(proto, fam), PosetSpace.full(proto, fam)
    rng = random.Random(3)
    for _ in range(6):
        a, b = rng.sample(range(1, 6), 2)
        q = ((a, b),)
        pb, pp = bs.partition(q), ps.partition(q)
        assert {k: len(v) for k, v in pb.items()} == {k: len(v) for k, v in pp.items()}
        ans = rng.choice(sorted(pb))
        bs, ps = pb[ans], pp[ans]


def test_filter_consistent_rejects_empty():
    proto = Protocol("cart_weak", 1)
    fam = build_threshold_family(4, [1, 3])
    vs = initial_space(proto, fam)
    assert len(filter_consistent(vs, proto, (2,), (0,), False)) == 1
    with pytest.raises(IllegalFeedback):
        filter_consistent(vs.with_bits(0b10), proto, (2,), (0,), False)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 24), st.integers(1, 3), st.integers(0, 10**6))
def test_random_games_keep_invariants(F, r, seed):
    fam = build_threshold_family(2 * F, spread_thresholds(F, 2 * F))
    tr = run_game(Protocol("cart_weak", r), fam, HalvingLearner(), RandomAdversary(), seed=seed)
    assert tr.fault is None
    sizes = [F] + [rec.size_after for rec in tr.rounds]
    assert all(1 <= b <= a for a, b in zip(sizes, sizes[1:]))
    assert all(rec.mistake == (not rec.feedback) for rec in tr.rounds)


def test_transcript_csv():
    fam = build_threshold_family(8, spread_thresholds(4, 8))
    tr = run_game(Protocol("cart_weak", 1), fam, HalvingLearner(), ThresholdMaximin())
    lines = tr.to_csv().splitlines()
    assert lines[0] == "# mbl-csv v1"
    assert lines[1] == "round,query,guess,feedback,mistake,version_space_size"
    assert len(lines) == 2 + len(tr.rounds)


def test_untruthful_adversary_is_recorded():
    class Liar(Adversary):
        def query(self, vs):
            return (1,)

        def feedback(self, vs, query, guess):
            return False

    fam = build_threshold_family(8, spread_thresholds(4, 8))
    tr = run_game(Protocol("cart_weak", 1), fam, HalvingLearner(), Liar(), round_budget=20)
    assert tr.fault.startswith("adversary: untruthful")
    with pytest.raises(AdversaryFault):
        tr.raise_for_fault()


def test_single_comparison_reductions():
    assert single_comparison(Protocol("order", 2), (1, 2)) == (1, 2, (1, 2), (2, 1))
    assert single_comparison(Protocol("order", 3), (1, 2, 3)) is None
