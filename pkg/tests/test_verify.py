import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from mbl.verify import (
    PreconditionError, SearchFailure, bound_table, bucket_counts, cap_base, ceil_identity_grid,
    check_conditional, check_pn, check_uniformity, draw_admissible, exhaustive_best_u,
    expert_pool_alpha, expert_pool_cap, find_good_u, is_scalar_multiple, log_cap, mistake_cap,
    nonzero_points, p_closed, p_direct, protocol_upper_bound, threshold_lower_count,
    within_bucket_bound,
)


@pytest.mark.parametrize("n, value", [(1, 0), (2, 1), (4, 4), (8, 13), (16, 38)])
def test_pn_values(n, value):
    assert p_direct(n) == p_closed(n) == value


@given(st.integers(2, 10**9))
def test_pn_increments(n):
    # p(n) - p(n-1) = floor(log2 n)
    assert p_closed(n) - p_closed(n - 1) == n.bit_length() - 1


def test_check_pn_small_range():
    assert check_pn(5000) is None


@given(st.integers(1, 10**6), st.fractions(min_value=Fraction(11, 10), max_value=Fraction(8)))
def test_log_cap_brackets(size, base):
    c = log_cap(size, base)
    assert base**c <= size < base ** (c + 1)


@pytest.mark.parametrize("model, r, base", [
    ("cart_weak", 2, Fraction(3, 2)), ("amb", 2, Fraction(4, 3)), ("order", 3, Fraction(6, 5)),
    ("selection", 4, Fraction(4, 3)), ("relpos", 1, Fraction(2)), ("comparison", 1, Fraction(2)),
    ("delayed_relpos", 3, Fraction(8, 7)), ("standard", 1, Fraction(2)),
])
def test_cap_bases(model, r, base):
    assert cap_base(model, r) == base


def test_degenerate_answer_space_caps_at_zero():
    assert mistake_cap("order", 1, 100) == 0
    assert mistake_cap("selection", 1, 100) == 0


def test_threshold_lower_count():
    assert threshold_lower_count(64, 1) == 5
    assert threshold_lower_count(64, 3) == 9
    assert threshold_lower_count(2, 3) == 0


@given(st.sampled_from(["cart_weak", "amb", "order", "comparison", "selection", "relpos"]),
       st.integers(1, 4), st.integers(1, 5000))
def test_protocol_upper_bound_within_trivial(model, r, F):
    assert 0 <= protocol_upper_bound(model, r, F, 2) <= F - 1


@settings(max_examples=20, deadline=None)
@given(st.sampled_from([3, 5]), st.integers(2, 3), st.integers(1, 2), st.integers(0, 10**6))
def test_uniformity_is_exact(p, n, r, seed):
    s, t, z = draw_admissible(p, n, r, random.Random(seed))
    assert check_uniformity(p, n, r, s, z) == Fraction(1, p**r)
    assert check_conditional(p, n, r, s, t, z) == Fraction(1, p**r)


def test_lemma_preconditions():
    with pytest.raises(PreconditionError):
        check_uniformity(3, 2, 1, (0, 1), (0,))
    with pytest.raises(PreconditionError):
        check_conditional(3, 2, 1, (1, 2), (2, 1), (0,))
    assert is_scalar_multiple((1, 2), (2, 1), 3)
    assert draw_admissible(2, 3, 1, random.Random(0)) is None


@given(st.integers(0, 10**4), st.integers(1, 300), st.sampled_from([2, 3, 5]), st.integers(1, 2))
def test_bucket_bound_check_matches_floats(largest, size, p, r):
    exact = within_bucket_bound(largest, size, p, r)
    approx = largest - (size / p**r + 2 * math.sqrt(size))
    if abs(approx) > 1e-9:
        assert exact == (approx < 0)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6))
def test_bucket_counts_partition_S(seed):
    rng = random.Random(seed)
    u = [tuple(rng.randrange(5) for _ in range(3))]
    table = bucket_counts(5, 3, 1, u)
    assert sum(table.counts.values()) == 64 == table.size


def test_find_good_u_and_failure():
    u, table = find_good_u(5, 3, 1, rng=random.Random(1))
    assert table.within_bound()
    with pytest.raises(SearchFailure) as info:
        find_good_u(3, 2, 1, S=[(1, 1)] * 30, rng=random.Random(0), budget=3)
    assert info.value.best.largest == 30
    assert exhaustive_best_u(3, 2, 1).largest == 2


def test_ceil_grid_shape():
    grid = list(ceil_identity_grid(300))
    assert len(grid) == 300
    assert all(x > 0 and 1 <= n <= 5 for x, n in grid)


@given(st.fractions(min_value=Fraction(1, 1000), max_value=Fraction(10**6)), st.integers(1, 50))
def test_ceiling_identity_property(x, n):
    assert math.ceil(Fraction(math.ceil(x), n)) == math.ceil(x / n)


def test_bound_table_order_row():
    rep = bound_table(6, r=2, model="order")
    row = rep.get("order_log")
    assert row.cap == 2 and row.value == pytest.approx(math.log(6) / math.log(2))
    lines = rep.to_csv().splitlines()
    assert lines[0] == "# mbl-csv v1"
    assert lines[1] == "name,value,cap,F,k,r,n,M"


def test_expert_pool_expressions():
    assert expert_pool_alpha(2, 1) == pytest.approx(1 / math.log(4))
    # with k = 2 the pool constant has 1/k^r < alpha, so the expression is negative
    assert expert_pool_cap(2, 1, 4) < 0 and expert_pool_cap(2, 2, 4) < 0
    assert expert_pool_cap(3, 1, 4) > 0
    with pytest.raises(ValueError):
        expert_pool_alpha(1, 1)
    rep = bound_table(16, r=1, k=2)
    assert rep.get("expert_pool").value < 0
    assert rep.get("expert_pool_simple").value > 0
