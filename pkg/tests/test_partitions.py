import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from logconcave import (Partition, dim_syt, enumerate_partitions, lis_counts, partition_count,
                        schur_eval, ssyt_count, word_lis_counts)
from logconcave._errors import DomainError, ResourceError
from logconcave.partitions import max_dim_bound_holds

from oracles import (lis_census, partition_number, partitions_brute, schur_brute, ssyt_brute,
                     syt_brute, word_census)

partitions_st = st.lists(st.integers(1, 6), max_size=5).map(
    lambda xs: Partition(sorted(xs, reverse=True)))


def test_empty_partition():
    assert list(enumerate_partitions(0)) == [Partition(())]
    assert Partition(()).size == 0


def test_enumerate_four_in_descending_lex_order():
    got = list(enumerate_partitions(4))
    assert got == [(4,), (3, 1), (2, 2), (2, 1, 1), (1, 1, 1, 1)]
    assert set(got) == partitions_brute(4)


@pytest.mark.parametrize("n", range(0, 9))
def test_enumeration_matches_brute_force(n):
    got = list(enumerate_partitions(n))
    assert len(got) == len(set(got))
    assert set(got) == partitions_brute(n)


def test_count_fifty():
    assert partition_number(50) == 204226
    assert sum(1 for _ in enumerate_partitions(50)) == 204226
    assert partition_count(50) == 204226


def test_constraints():
    got = set(enumerate_partitions(7, max_length=3, max_part=3))
    assert got == {p for p in partitions_brute(7) if len(p) <= 3 and p[0] <= 3}
    assert list(enumerate_partitions(5, max_length=1, max_part=2)) == []


def test_partition_validation():
    with pytest.raises(DomainError):
        Partition([1, 2])
    assert Partition([2, 1, 0, 0]) == (2, 1)
    assert Partition([3, 1]).conjugate() == (2, 1, 1)


@pytest.mark.parametrize("lam,d", [((1,), 1), ((2, 1), 2), ((3, 2), 5)])
def test_dim_syt_examples(lam, d):
    assert syt_brute(lam) == d
    assert dim_syt(lam, "hook") == d
    assert dim_syt(lam, "frobenius") == d


@pytest.mark.parametrize("lam", [(2, 2), (3, 1, 1), (2, 2, 1), (4, 2, 1)])
def test_dim_syt_brute(lam):
    assert dim_syt(lam) == syt_brute(lam)


def test_hook_equals_frobenius_up_to_25():
    for n in range(26):
        for lam in enumerate_partitions(n):
            assert dim_syt(lam, "hook") == dim_syt(lam, "frobenius")


def test_rsk_identity():
    for n in range(31):
        assert sum(dim_syt(lam) ** 2 for lam in enumerate_partitions(n)) == math.factorial(n)


def test_max_dimension_bound():
    assert all(max_dim_bound_holds(k) for k in range(21))


@pytest.mark.parametrize("lam,m,count", [((1,), 3, 3), ((2,), 2, 3), ((2, 1), 3, 8)])
def test_ssyt_examples(lam, m, count):
    assert ssyt_brute(lam, m) == count
    assert ssyt_count(lam, m) == count


def test_ssyt_too_long():
    assert ssyt_count((1, 1, 1), 2) == 0


@given(partitions_st.filter(lambda p: p.size <= 6), st.integers(1, 3))
def test_ssyt_against_brute(lam, m):
    assert ssyt_count(lam, m) == ssyt_brute(lam, m)


def test_schur_examples():
    assert schur_eval((1,), [1, 2]) == 3
    assert schur_eval((2,), [1, 2]) == 7
    assert schur_eval((2, 1), [1, 1, 1]) == 8
    assert schur_eval((1, 1, 1), [1, 2]) == 0


@given(partitions_st.filter(lambda p: p.size <= 5),
       st.lists(st.fractions(0, 3, max_denominator=4), min_size=1, max_size=3))
def test_schur_against_monomial_expansion(lam, x):
    assert schur_eval(lam, x) == schur_brute(lam, x)


@given(partitions_st.filter(lambda p: p.size <= 6),
       st.lists(st.fractions(0, 2, max_denominator=5), min_size=1, max_size=3))
def test_schur_float_branch_agrees(lam, x):
    exact = schur_eval(lam, x)
    approx = schur_eval(lam, [float(v) for v in x])
    assert approx == pytest.approx(float(exact), rel=1e-12, abs=1e-300)


@given(partitions_st, st.integers(1, 5))
def test_schur_at_ones_counts_tableaux(lam, m):
    assert schur_eval(lam, [1] * m) == ssyt_count(lam, m)


def test_schur_negative_argument():
    with pytest.raises(DomainError):
        schur_eval((1,), [Fraction(-1)])


def test_lis_counts_small():
    assert lis_counts(1).as_dict() == {1: 1}
    assert lis_counts(3).as_dict() == {1: 1, 2: 4, 3: 1}
    assert lis_counts(4).as_dict() == {1: 1, 2: 13, 3: 9, 4: 1}


@pytest.mark.parametrize("n", range(1, 8))
def test_lis_counts_against_census(n):
    assert lis_counts(n).as_dict() == lis_census(n)


def test_lis_budget():
    with pytest.raises(ResourceError):
        lis_counts(30, budget=1000)


def test_word_lis_small():
    assert word_lis_counts(1, 5).as_dict() == {5: 1}
    assert word_lis_counts(2, 2).as_dict() == {1: 1, 2: 3}
    t = word_lis_counts(3, 3)
    assert t.total == 27
    assert t.as_dict() == word_census(3, 3)


@given(st.integers(1, 4), st.integers(1, 5))
def test_word_lis_against_census(m, n):
    assert word_lis_counts(m, n).as_dict() == word_census(m, n)
