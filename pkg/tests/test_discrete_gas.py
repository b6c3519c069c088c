import itertools
import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from logconcave import (Charlier, CustomWeights, EnsembleSpec, GeometricPower, Hahn, Krawtchouk,
                        Meixner, Power, QTheta, all_marginals, build_proof_functions,
                        check_logconcave, discrete_beta_lambda1_pmf, ensemble_weight,
                        hks_verify, marginal_pmf, poisson_concentration_check)
from logconcave._errors import DomainError, ResourceError
from logconcave.discrete_gas import BoxTable, level_mass, qtheta
from logconcave.pmf import binomial_pmf, poisson_pmf

Q = Fraction(1, 2)


def brute_marginal(weight, n, i, lo, hi):
    """Exact law of h_i from all increasing tuples in [lo, hi]."""
    acc = {}
    for h in itertools.combinations(range(lo, hi + 1), n):
        w = weight(h)
        acc[h[i - 1]] = acc.get(h[i - 1], 0) + w
    z = sum(acc.values())
    return {k: Fraction(v) / z for k, v in acc.items()}


def vandermonde_sq(h):
    return math.prod((b - a) ** 2 for a, b in itertools.combinations(h, 2))


def test_meixner_weight_example():
    spec = EnsembleSpec(2, Meixner(2, Q))
    assert ensemble_weight(spec, (0, 1)) == Fraction(1, 2)


def test_weight_rejects_bad_tuples():
    spec = EnsembleSpec(2, Meixner(2, Q))
    with pytest.raises(DomainError):
        ensemble_weight(spec, (1, 1))
    with pytest.raises(DomainError):
        ensemble_weight(EnsembleSpec(1, Meixner(1, Q)), (-1,))


def test_charlier_single_weight():
    spec = EnsembleSpec(1, Charlier(2))
    v = ensemble_weight(spec, (3,))
    assert float(v) == pytest.approx(math.exp(-2) * 8 / 6, rel=1e-14)


def test_meixner_anchor_one_sixteenth():
    # Z = sum_h1 sum_d d^2 q^(2 h1 + d) = (1/(1-q^2)) * q(1+q)/(1-q)^3 = 8 at q = 1/2
    z = sum(Fraction(1, 4) ** h1 for h1 in range(200)) * 6
    assert abs(z - 8) < Fraction(1, 10 ** 50)
    p = marginal_pmf(EnsembleSpec(2, Meixner(2, Q)), 2)
    assert p.mass(1) == Fraction(1, 16)


def test_meixner_against_brute_force():
    spec = EnsembleSpec(3, Meixner(4, Fraction(1, 3)))
    p = marginal_pmf(spec, 2, eps=1e-14)
    fam = spec.weights

    def weight(h):
        return vandermonde_sq(h) * math.prod(fam.kernel(x, 3, j) for j, x in enumerate(h, 1))

    ref = brute_marginal(weight, 3, 2, 0, 45)
    for k in range(6):
        assert abs(float(p.mass(k)) - float(ref.get(k, 0))) < 1e-12


def test_charlier_single_particle_is_poisson():
    p = marginal_pmf(EnsembleSpec(1, Charlier(Fraction(3, 2))), 1, eps=1e-14)
    ref = poisson_pmf(Fraction(3, 2))
    for k in range(10):
        assert abs(float(p.mass(k)) - float(ref.mass(k))) < 1e-14


def test_krawtchouk_single_particle_is_binomial():
    p = marginal_pmf(EnsembleSpec(1, Krawtchouk(7, Fraction(2, 5))), 1)
    ref = binomial_pmf(7, Fraction(2, 5))
    assert p.masses == ref.masses and p.residual == 0


def test_hahn_against_brute_force():
    spec = EnsembleSpec(2, Hahn(3, 4))
    p = marginal_pmf(spec, 1)
    fam = spec.weights

    def weight(h):
        return vandermonde_sq(h) * math.prod(fam.kernel(x, 2, j) for j, x in enumerate(h, 1))

    ref = brute_marginal(weight, 2, 1, 0, 4)
    assert {k: p.mass(k) for k in p.support if p.mass(k)} == ref


def test_custom_weights_per_site():
    w = CustomWeights(((1, 2, 3), (3, 2, 1)))
    spec = EnsembleSpec(2, w)
    ref = brute_marginal(lambda h: vandermonde_sq(h) * (1, 2, 3)[h[0]] * (3, 2, 1)[h[1]], 2, 2, 0, 2)
    p = marginal_pmf(spec, 2)
    assert {k: p.mass(k) for k in p.support if p.mass(k)} == ref


def test_residual_is_certified():
    spec = EnsembleSpec(2, Meixner(3, Fraction(3, 4)))
    p = marginal_pmf(spec, 1, eps=1e-10)
    assert 0 <= p.residual < 1e-10
    assert abs(sum(p.masses) + p.residual - 1) < 1e-30


def test_budget():
    with pytest.raises(ResourceError):
        marginal_pmf(EnsembleSpec(4, Meixner(4, Fraction(9, 10))), 1, budget=1000)


@pytest.mark.parametrize("spec", [
    EnsembleSpec(3, Meixner(3, Q)),
    EnsembleSpec(2, Charlier(Fraction(5, 2))),
    EnsembleSpec(3, Krawtchouk(8, Fraction(1, 3))),
    EnsembleSpec(3, Hahn(4, 6)),
])
def test_named_marginals_logconcave(spec):
    for p in all_marginals(spec):
        assert check_logconcave(p).verdict == "pass"


@pytest.mark.parametrize("spec", [EnsembleSpec(2, Charlier(1)),
                                  EnsembleSpec(3, Krawtchouk(6, Fraction(3, 5)))])
def test_charlier_krawtchouk_ultra(spec):
    for p in all_marginals(spec):
        assert check_logconcave(p, "ultra").verdict == "pass"


@given(st.integers(1, 3), st.lists(st.integers(1, 9), min_size=4, max_size=7))
@settings(max_examples=40)
def test_logconcave_site_weights_give_logconcave_marginals(n, raw):
    # log-concave weights with a squared Vandermonde satisfy the hypotheses
    # ratios must be nonincreasing for log-concavity
    ratios = sorted((Fraction(r, 10) for r in raw), reverse=True)
    w = [Fraction(1)]
    for r in ratios:
        w.append(w[-1] * r)
    if len(w) < n:
        return
    spec = EnsembleSpec(n, CustomWeights(tuple(w)))
    for p in all_marginals(spec):
        assert check_logconcave(p).passed


def test_hks_trivial_examples():
    one = BoxTable.from_points({(0,): 1})
    assert hks_verify(one, one, one, one)[:2] == (True, True)
    f = BoxTable.from_points({(0,): 1}, lower=(0,), upper=(1,))
    g = BoxTable.from_points({(1,): 1}, lower=(0,), upper=(1,))
    h = BoxTable.from_points({(0,): 1, (1,): 1})
    assert hks_verify(f, g, h, h)[:2] == (True, True)


def test_hks_witness():
    f = BoxTable.from_points({(0,): 1, (2,): 1}, lower=(0,), upper=(2,))
    zero_mid = BoxTable.from_points({(0,): 1, (2,): 1}, lower=(0,), upper=(2,))
    ok, _, witness = hks_verify(f, f, zero_mid, zero_mid)
    assert not ok and witness == ((0,), (2,))


def test_proof_functions_meixner():
    spec = EnsembleSpec(2, Meixner(2, Q))
    f, g, h = build_proof_functions(spec, 2, 3, (0, 12))
    assert hks_verify(f, g, h, h)[:2] == (True, True)
    # independent sum of t(3) over the box
    t3 = sum(vandermonde_sq(x) * Q ** sum(x) for x in itertools.combinations(range(13), 2)
             if x[1] == 3)
    assert h.total() == t3 == level_mass(spec, 2, 3, (0, 12))
    p = marginal_pmf(spec, 2)
    # inside the box the level masses reproduce the marginal ratios
    assert f.total() * p.mass(3) == h.total() * p.mass(2)


def test_proof_functions_single_charlier():
    spec = EnsembleSpec(1, Charlier(2))
    f, g, h = build_proof_functions(spec, 1, 4, (0, 10))
    assert f.total() == Fraction(2 ** 3, 6)
    assert g.total() == Fraction(2 ** 5, 120)
    assert h.total() == Fraction(2 ** 4, 24)


def test_proof_functions_empty_lower_level():
    spec = EnsembleSpec(2, Meixner(2, Q))
    f, g, h = build_proof_functions(spec, 2, 1, (0, 8))
    assert f.total() == 0
    assert hks_verify(f, g, h, h)[:2] == (True, True)


@pytest.mark.parametrize("x", range(1, 11))
def test_qtheta_special_values(x):
    assert qtheta(x, 1) == pytest.approx(x * x, rel=1e-12)
    assert qtheta(x, Fraction(1, 2)) == pytest.approx(x, rel=1e-12)


def test_qtheta_two():
    assert qtheta(3, 2) == pytest.approx(math.factorial(3) * math.factorial(4) / 2, rel=1e-12)


def test_qtheta_domain():
    with pytest.raises(DomainError):
        qtheta(0.5, 2)


def test_beta_lambda1_single_particle():
    p = discrete_beta_lambda1_pmf(1, math.inf, 1, GeometricPower(Q), eps=1e-13)
    for k in range(10):
        assert float(p.mass(k)) == pytest.approx(0.5 ** (k + 1), rel=1e-12)


def test_beta_lambda1_matches_geometric_power_gas():
    q = Fraction(1, 3)
    p = discrete_beta_lambda1_pmf(3, math.inf, 1, GeometricPower(q), eps=1e-13)
    ref = marginal_pmf(EnsembleSpec(3, GeometricPower(q), Power(2)), 3, eps=1e-14).shifted(-2)
    for k in range(12):
        assert float(p.mass(k)) == pytest.approx(float(ref.mass(k)), rel=1e-9, abs=1e-15)


def test_beta_lambda1_half_theta_logconcave():
    p = discrete_beta_lambda1_pmf(2, 12, Fraction(1, 2), GeometricPower(Fraction(1, 2)))
    assert p.residual == 0
    assert check_logconcave(p).verdict == "pass"


def test_beta_lambda1_qtheta_spec_matches():
    # theta = 1/2 ensemble written as an h-gas with Q_theta interaction on integers
    q = Fraction(2, 5)
    p = discrete_beta_lambda1_pmf(2, math.inf, 1, GeometricPower(q), eps=1e-13)
    ref = marginal_pmf(EnsembleSpec(2, GeometricPower(q), QTheta(1)), 2, eps=1e-13).shifted(-1)
    for k in range(10):
        assert float(p.mass(k)) == pytest.approx(float(ref.mass(k)), rel=1e-9, abs=1e-15)


def test_poisson_concentration_boundary():
    rep = poisson_concentration_check(poisson_pmf(2))
    assert rep.holds
    assert abs(rep.mean - rep.variance) < 1e-12


def test_binomial_concentration():
    rep = poisson_concentration_check(binomial_pmf(10, Fraction(1, 3)))
    assert rep.holds
    assert rep.mean == Fraction(10, 3) and rep.variance == Fraction(20, 9)


def test_charlier_marginal_concentration():
    p = marginal_pmf(EnsembleSpec(2, Charlier(1)), 2, eps=1e-14)
    rep = poisson_concentration_check(p)
    assert rep.holds


def test_concentration_reports_overdispersion():
    # a geometric law has variance above its mean and is not ULC
    from logconcave.pmf import geometric_pmf
    rep = poisson_concentration_check(geometric_pmf(Fraction(1, 2)))
    assert not rep.variance_ok and not rep.holds
