import itertools

import pytest
from hypothesis import given, settings, strategies as st

from mbl.families import (
    FunctionFamily, InvalidFamily, InvalidModulus, SizeError, build_avoiding_family,
    build_linear_family, build_permutation_family, build_threshold_family, cart_product_eval,
    check_permutation, contains_pattern, dump_family, index_of, load_family, pattern_of,
    point_of, spread_thresholds, thresholds_of,
)


def test_threshold_labels():
    fam = build_threshold_family(5, [1, 3, 6])
    assert [fam.label(1, x) for x in range(1, 6)] == [0, 0, 1, 1, 1]
    assert [fam.label(2, x) for x in range(1, 6)] == [0] * 5
    assert thresholds_of(fam.materialize()) == [1, 3, 6]


@pytest.mark.parametrize("X, th", [(4, []), (4, [2, 2]), (4, [0, 2]), (4, [3, 6]), (0, [1])])
def test_threshold_rejects(X, th):
    with pytest.raises(InvalidFamily):
        build_threshold_family(X, th)


@given(st.integers(1, 40), st.integers(0, 40))
def test_spread_thresholds_fit(F, extra):
    X = max(F - 1, 1) + extra
    th = spread_thresholds(F, X)
    assert len(th) == F
    build_threshold_family(X, th)


def test_function_family_validation():
    with pytest.raises(InvalidFamily):
        FunctionFamily(2, 2, ((0, 1), (0, 1)))
    with pytest.raises(InvalidFamily):
        FunctionFamily(2, 2, ((0, 2),))
    with pytest.raises(InvalidFamily):
        FunctionFamily(2, 2, ())


def test_linear_family():
    fam = build_linear_family(3, 2)
    assert len(fam) == 9 and fam.domain_size == 9 and fam.label_count == 3
    assert len(build_linear_family(3, 2, True)) == 4
    with pytest.raises(InvalidModulus):
        build_linear_family(4, 2)


@given(st.sampled_from([2, 3, 5, 7]), st.integers(1, 3), st.data())
def test_point_index_roundtrip(p, n, data):
    i = data.draw(st.integers(1, p**n))
    assert index_of(point_of(i, p, n), p) == i


@given(st.permutations(list(range(1, 7))))
def test_pattern_of_permutation_is_itself(perm):
    assert pattern_of(perm) == tuple(perm)
    assert contains_pattern(perm, pattern_of(perm[:3]))


def test_pattern_containment():
    assert contains_pattern((2, 4, 1, 3), (1, 2))
    assert not contains_pattern((3, 2, 1), (1, 2))
    with pytest.raises(ValueError):
        check_permutation((1, 1, 2))


def test_avoiding_family_counts():
    # permutations avoiding a length-3 pattern are counted by the Catalan numbers
    for n, catalan in zip(range(1, 7), (1, 2, 5, 14, 42, 132)):
        fam = build_avoiding_family(n, (1, 2, 3))
        assert len(fam) == catalan
        assert all(not contains_pattern(p, (1, 2, 3)) for p in fam.perms)


def test_permutation_family_caps():
    assert len(build_permutation_family(4)) == 24
    with pytest.raises(SizeError):
        build_permutation_family(11)
    fam = build_permutation_family(16, implicit=True)
    assert fam.implicit and len(fam) == 20922789888000


def test_cart_product_eval():
    fam = build_threshold_family(3, [1, 2, 4])
    assert cart_product_eval(fam, [1, 3]) == [(1, 1), (0, 1), (0, 0)]


@pytest.mark.parametrize("fam", [
    build_threshold_family(6, [1, 3, 7]),
    build_linear_family(3, 2, True),
    build_permutation_family(3),
    build_avoiding_family(4, (2, 1, 3)),
    FunctionFamily(2, 3, ((0, 2), (1, 1))),
])
def test_dump_load_roundtrip(fam):
    back = load_family(dump_family(fam))
    assert back.table == fam.materialize().table


def test_load_rejects_tampered_rows():
    text = dump_family(build_threshold_family(3, [1, 2])).replace("1 1 1", "0 1 1")
    with pytest.raises(InvalidFamily):
        load_family(text)
