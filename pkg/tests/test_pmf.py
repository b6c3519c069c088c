import json
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, strategies as st

from logconcave import LogConcavityReport, Pmf, check_logconcave, check_ultra_logconcave
from logconcave.pmf import binomial_pmf, geometric_pmf, poisson_pmf, total_variation

from oracles import is_logconcave


def test_symmetric_triple_passes():
    rep = check_logconcave([2, 3, 2])
    assert rep.verdict == "pass"
    assert rep.min_margin == 5


def test_increasing_triple_fails_in_middle():
    rep = check_logconcave([1, 1, 2])
    assert rep.verdict == "fail"
    assert rep.first_violation == 1


def test_internal_zero():
    rep = check_logconcave([1, 0, 1])
    assert rep.verdict == "fail"
    assert rep.internal_zero == 1


def test_boundary_zeros_allowed():
    assert check_logconcave([0, 0, 1, 2, 1, 0]).passed


def test_poisson_ultra_equality():
    p = poisson_pmf(Fraction(3, 2))
    rep = check_ultra_logconcave(p)
    assert rep.verdict == "pass"
    assert rep.min_margin == 0


def test_scaled_mode():
    # 1/k! times k! is constant
    import math
    p = Pmf.from_masses([Fraction(1, math.factorial(k)) for k in range(6)])
    rep = check_logconcave(p, mode=lambda k: math.factorial(k))
    assert rep.verdict == "pass" and rep.min_margin == 0
    with pytest.raises(ValueError):
        check_logconcave(p, mode=lambda k: 0)


def test_report_consistency_enforced():
    with pytest.raises(ValueError):
        LogConcavityReport("fail")
    with pytest.raises(ValueError):
        LogConcavityReport("pass", first_violation=3)


def test_float_verdicts():
    # a violation far beyond the error bound fails; one inside it is inconclusive
    bad = Pmf(0, (1.0, 1.0, 2.0), exact=False, rel_err=1e-12)
    assert check_logconcave(bad).verdict == "fail"
    close = Pmf(0, (1.0, 1.0, 1.0 + 1e-14), exact=False, rel_err=1e-12)
    assert check_logconcave(close).verdict == "inconclusive"
    good = Pmf(0, (1.0, 2.0, 1.0), exact=False, rel_err=1e-12)
    assert check_logconcave(good).verdict == "pass"


def test_exact_never_inconclusive():
    p = Pmf.from_masses([1, 1, 1])
    assert check_logconcave(p).verdict == "pass"


@given(st.lists(st.integers(0, 20), min_size=1, max_size=12))
def test_verdict_matches_definition(xs):
    rep = check_logconcave(xs)
    assert rep.passed == is_logconcave(xs)
    assert rep.verdict != "inconclusive"


@given(st.lists(st.integers(1, 30), min_size=3, max_size=10))
def test_product_of_logconcave_is_logconcave(xs):
    # squares of a log-concave positive sequence stay log-concave
    if is_logconcave(xs):
        assert check_logconcave([x * x for x in xs]).passed


def test_standard_laws_normalize():
    b = binomial_pmf(10, Fraction(1, 3))
    assert sum(b.masses) == 1 and b.residual == 0
    g = geometric_pmf(Fraction(1, 2))
    assert sum(g.masses) + g.residual == 1
    p = poisson_pmf(2)
    assert 0 <= p.normalization_gap() < 1e-14


def test_moments():
    mean, var = binomial_pmf(10, Fraction(1, 3)).moments()
    assert mean == Fraction(10, 3) and var == Fraction(20, 9)


def test_dict_round_trip_exact():
    p = Pmf(2, (Fraction(1), Fraction(2), Fraction(1)), meta={"x": 1})
    d = p.to_dict()
    assert d["masses"] == ["1/4", "1/2", "1/4"]
    q = Pmf.from_dict(json.loads(json.dumps(d)))
    assert q.masses == p.masses and q.offset == 2 and q.exact


def test_dict_round_trip_float():
    p = Pmf(0, (mpmath.mpf(1), mpmath.mpf(3)), exact=False, rel_err=1e-20)
    q = Pmf.from_dict(p.to_dict())
    assert not q.exact
    assert abs(float(q.masses[1]) - 0.75) < 1e-25


def test_shift_and_trim():
    p = Pmf.from_masses([0, 1, 2, 0], offset=3)
    t = p.trimmed()
    assert t.offset == 4 and t.weights == (1, 2)
    assert p.shifted(-3).mass(2) == Fraction(2, 3)


def test_total_variation():
    p = Pmf.from_masses([1, 1])
    q = Pmf.from_masses([1], offset=1)
    assert total_variation(p, q) == pytest.approx(0.5)


def test_negative_weight_rejected():
    with pytest.raises(ValueError):
        Pmf.from_masses([1, -1])
