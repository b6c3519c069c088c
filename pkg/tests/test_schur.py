import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from logconcave import (Partition, Specialization, check_logconcave, enumerate_partitions,
                        exact_g2_pmf_small, okounkov_check, schur_eval, schur_marginal_pmf)
from logconcave._errors import DomainError
from logconcave.schur import midpoint_partitions

partitions_st = st.lists(st.integers(1, 7), max_size=5).map(lambda xs: sorted(xs, reverse=True))


def test_zero_specialization_point_mass():
    p = schur_marginal_pmf(Specialization((0,), (0,)), 1)
    assert p.mass(0) == 1 and p.residual == 0


def test_single_variable_is_geometric():
    alpha = Fraction(2, 5)
    p = schur_marginal_pmf(Specialization.symmetric_sqrt([alpha]), 1, eps=1e-14)
    for k in range(10):
        assert p.mass(k) == (1 - alpha) * alpha ** k


def test_two_variables_match_passage_time():
    q = Fraction(1, 3)
    p = schur_marginal_pmf(Specialization.symmetric_sqrt([q, q]), 1, eps=1e-14)
    g = exact_g2_pmf_small(2, q, eps=1e-14)
    for k in range(10):
        assert abs(p.mass(k) - g.mass(k)) < 1e-13


def test_normalizer_matches_partial_sums():
    s = Specialization((Fraction(1, 2), Fraction(1, 3)), (Fraction(1, 4), Fraction(1, 2)))
    acc = sum(s.weight(lam) for n in range(40) for lam in enumerate_partitions(n, max_length=2))
    assert 0 < s.normalizer() - acc < Fraction(1, 10 ** 10)


def test_residual_decreases_with_cutoff():
    s = Specialization((Fraction(1, 2), Fraction(1, 2)), (Fraction(1, 2), Fraction(1, 3)))
    res = [schur_marginal_pmf(s, 1, cutoff=c).residual for c in range(0, 12)]
    assert all(0 <= b <= a <= 1 for a, b in zip(res, res[1:]))


def test_float_specialization():
    s = Specialization((0.5, 0.25), (0.5, 0.5))
    p = schur_marginal_pmf(s, 2, eps=1e-12)
    assert not p.exact
    ref = schur_marginal_pmf(Specialization((Fraction(1, 2), Fraction(1, 4)),
                                            (Fraction(1, 2), Fraction(1, 2))), 2, eps=1e-12)
    for k in range(6):
        assert float(p.mass(k)) == pytest.approx(float(ref.mass(k)), rel=1e-11, abs=1e-15)


def test_invalid_specialization():
    with pytest.raises(DomainError):
        Specialization((1,), (1,))
    with pytest.raises(DomainError):
        Specialization((-1,), (Fraction(1, 2),))


def test_random_marginals_logconcave():
    rng = random.Random(3)
    for _ in range(5):
        p, r = rng.randint(1, 3), rng.randint(1, 3)
        a = tuple(Fraction(rng.randint(1, 6), 10) for _ in range(p))
        b = tuple(Fraction(rng.randint(1, 6), 10) for _ in range(r))
        pmf = schur_marginal_pmf(Specialization(a, b), 1, eps=1e-10)
        assert check_logconcave(pmf).verdict == "pass"


def test_okounkov_equal_partitions():
    r = okounkov_check((3, 1), (3, 1), [1, 2])
    assert r.ok and r.lhs == r.rhs and r.theta == r.phi == (3, 1)


def test_okounkov_anchor_two_variables():
    r = okounkov_check((2,), (), [1, 1])
    assert (r.lhs, r.rhs) == (3, 4)


def test_okounkov_anchor_three_ones():
    r = okounkov_check((2,), (1, 1), [1, 1, 1])
    assert (r.lhs, r.rhs, r.ok) == (18, 24, True)
    assert (r.theta, r.phi) == ((1,), (2, 1))
    assert schur_eval(r.theta, [1, 1, 1]) * schur_eval(r.phi, [1, 1, 1]) == 24


@given(partitions_st, partitions_st)
def test_midpoints_are_partitions(lam, mu):
    theta, phi = midpoint_partitions(lam, mu)
    assert isinstance(theta, Partition) and isinstance(phi, Partition)
    assert theta.size + phi.size == sum(lam) + sum(mu)


@given(partitions_st.filter(lambda p: sum(p) <= 6), partitions_st.filter(lambda p: sum(p) <= 6),
       st.lists(st.fractions(0, 3, max_denominator=5), min_size=1, max_size=4))
def test_midpoint_inequality(lam, mu, a):
    assert okounkov_check(lam, mu, a).ok
