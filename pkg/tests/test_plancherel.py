import itertools
import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, strategies as st

from logconcave import (EnsembleSpec, Meixner, MixtureSpec, chen_check, check_logconcave,
                        enumerate_partitions, gamma_lambda1_pmf, limiting_ratio_check,
                        lis_counts, marginal_pmf, mixture_lambda_pmf, nu_mixture,
                        plancherel_lambda_pmf, poissonization_condition, poissonize, rho_check,
                        total_variation, word_chen_check)
from logconcave import plancherel
from logconcave._errors import DomainError, ResourceError
from logconcave.plancherel import (edge_lis_counts, h_to_partition, partition_to_h,
                                   plancherel_family, rho_pmf)
from logconcave.pmf import geometric_pmf, poisson_pmf

from oracles import syt_brute


def test_point_mass_at_one():
    for beta in (1, 2, Fraction(1, 2)):
        p = plancherel_lambda_pmf(1, beta, 1)
        assert float(p.mass(1)) == pytest.approx(1.0)


def test_n3_beta2():
    p = plancherel_lambda_pmf(3, 2, 1)
    assert [p.mass(k) for k in range(4)] == [0, Fraction(1, 6), Fraction(4, 6), Fraction(1, 6)]


def test_n2_beta2():
    p = plancherel_lambda_pmf(2, 2, 1)
    assert p.mass(1) == p.mass(2) == Fraction(1, 2)


@pytest.mark.parametrize("beta", [1, 3])
@pytest.mark.parametrize("i", [1, 2])
def test_against_tableau_census(beta, i):
    n = 5
    acc = {}
    for lam in enumerate_partitions(n):
        j = lam[i - 1] if i <= len(lam) else 0
        acc[j] = acc.get(j, 0) + syt_brute(lam) ** beta
    z = sum(acc.values())
    p = plancherel_lambda_pmf(n, beta, i)
    assert {k: p.mass(k) for k in p.support if p.mass(k)} == {k: Fraction(v, z)
                                                               for k, v in acc.items()}


def test_fractional_beta_is_high_precision():
    p = plancherel_lambda_pmf(4, Fraction(1, 2), 1)
    assert not p.exact
    d = {lam: syt_brute(lam) for lam in enumerate_partitions(4)}
    z = sum(math.sqrt(v) for v in d.values())
    top2 = sum(math.sqrt(v) for lam, v in d.items() if lam[0] == 2)
    assert float(p.mass(2)) == pytest.approx(top2 / z, rel=1e-14)


def test_budget():
    with pytest.raises(ResourceError):
        plancherel_lambda_pmf(40, 2, 1, budget=100)


@given(st.lists(st.integers(0, 6), max_size=4), st.integers(4, 7))
def test_h_bijection_round_trip(parts, n):
    lam = tuple(sorted(parts, reverse=True))
    if len([p for p in lam if p]) > n:
        return
    h = partition_to_h(lam, n)
    assert all(a < b for a, b in zip(h, h[1:]))
    assert h_to_partition(h) == tuple(p for p in lam if p)


def test_nu_beta2_is_poisson():
    nu = nu_mixture(MixtureSpec(Fraction(3, 2), 2))
    ref = poisson_pmf(Fraction(3, 2))
    for k in range(12):
        assert float(nu.mass(k)) == pytest.approx(float(ref.mass(k)), rel=1e-13)
    assert nu.residual < 1e-12


def test_nu_small_alpha():
    nu = nu_mixture(MixtureSpec(Fraction(1, 10 ** 6), 1))
    assert float(nu.mass(0)) > 1 - 1e-5


def test_nu_alpha1_beta1_first_terms():
    nu = nu_mixture(MixtureSpec(1, 1))
    w = nu.weights
    assert w[0] == w[1] == w[2]
    # k = 3: sum d / 3! = (1 + 2 + 1) / 6
    assert w[3] == w[0] * Fraction(4, 6)


def test_mixture_zero_mass():
    p = mixture_lambda_pmf(MixtureSpec(1, 2), 1)
    assert float(p.mass(0)) == pytest.approx(math.exp(-1), rel=1e-14)
    assert p.residual < 1e-12


def test_mixture_small_alpha_point_mass():
    p = mixture_lambda_pmf(MixtureSpec(Fraction(1, 10 ** 8), 2), 1)
    assert float(p.mass(0)) > 1 - 1e-7


def test_mixture_second_row_logconcave():
    p = mixture_lambda_pmf(MixtureSpec(2, 2), 2)
    assert check_logconcave(p).verdict == "pass"


def test_poissonized_plancherel_is_mixture():
    # Poissonizing the Plancherel family in n gives the beta = 2 mixture
    fam = plancherel_family(30, 2, 1)
    pois = poissonize(fam, 1)
    mix = mixture_lambda_pmf(MixtureSpec(1, 2, eps=1e-25), 1)
    for k in range(8):
        assert float(pois.mass(k)) == pytest.approx(float(mix.mass(k)), rel=1e-12, abs=1e-20)


def test_poissonization_condition_on_plancherel():
    rep = poissonization_condition(plancherel_family(8, 2, 1), k_max=8)
    assert rep.ok and rep.checked > 0


def test_gamma_single_particle_geometric():
    q = Fraction(1, 3)
    p = gamma_lambda1_pmf(1, q)
    ref = geometric_pmf(q)
    for k in range(10):
        assert p.mass(k) == ref.mass(k)


def test_gamma_matches_meixner():
    g = gamma_lambda1_pmf(2, Fraction(1, 2), 2)
    m = marginal_pmf(EnsembleSpec(2, Meixner(2, Fraction(1, 2))), 2)
    for k in range(15):
        assert g.mass(k) == m.mass(k + 1)


def test_gamma_converges_to_mixture():
    mix = mixture_lambda_pmf(MixtureSpec(1, 2), 1)
    tvs = [total_variation(gamma_lambda1_pmf(n, Fraction(1, n * n), 2, eps=1e-13), mix)
           for n in (2, 3, 4, 5)]
    assert all(b < a for a, b in zip(tvs, tvs[1:]))


def test_limiting_ratio_gap_shrinks():
    gaps = [abs(float(limiting_ratio_check(n, 1, 2, 2).gap)) for n in (4, 6, 10)]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    with pytest.raises(DomainError):
        limiting_ratio_check(3, 1, 2, 2)


def test_limiting_ratio_fractional_beta():
    r = limiting_ratio_check(8, Fraction(1, 2), Fraction(1, 2), 1)
    assert abs(float(r.gap)) < abs(float(r.rhs))


def test_chen_small():
    for n in range(1, 13):
        assert chen_check(n).verdict == "pass"


def test_edge_counts_agree_with_full_table():
    full = lis_counts(12)
    edge = edge_lis_counts(12, 3)
    for k in range(8, 13):
        assert edge[k] == full[k]


def test_edge_chen_large_n():
    assert chen_check(120, window=3).verdict == "pass"


def rho_brute(n, k):
    acc = {}
    target = k + n * (n - 1) // 2
    for h in itertools.combinations(range(target + 1), n):
        if sum(h) == target:
            d = math.prod((b - a) ** 2 for a, b in itertools.combinations(h, 2))
            acc[h[-1]] = acc.get(h[-1], 0) + d
    z = sum(acc.values())
    return {j: Fraction(v, z) for j, v in acc.items()}


@pytest.mark.parametrize("n,k", [(3, 2), (4, 3), (5, 4)])
def test_rho_against_brute(n, k):
    p = rho_pmf(n, k)
    assert {j: p.mass(j) for j in p.support if p.mass(j)} == rho_brute(n, k)
    assert rho_check(n, k).verdict == "pass"


def test_word_chen():
    for m in range(1, 5):
        for n in range(1, 7):
            assert word_chen_check(m, n).verdict == "pass"


def test_set_precision():
    old = plancherel.PRECISION_BITS
    try:
        plancherel.set_precision(128)
        assert plancherel.MP_REL_ERR == 2.0 ** -72
        p = plancherel_lambda_pmf(4, Fraction(1, 2), 1)
        assert p.rel_err == 2.0 ** -72
        with pytest.raises(DomainError):
            plancherel.set_precision(32)
    finally:
        plancherel.set_precision(old)
