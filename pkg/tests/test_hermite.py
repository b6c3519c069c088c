import math

import numpy as np
import pytest

from logconcave._errors import DomainError
from logconcave.continuum import (hastings_mcleod_solve, hermite_beta_edge_sample,
                                  kolmogorov_distance, top_eigenvalue, tw2_distribution)


def tridiag(d, e):
    return np.diag(d) + np.diag(e, 1) + np.diag(e, -1)


def test_top_eigenvalue_against_lapack():
    rng = np.random.default_rng(0)
    d, e = rng.normal(size=(50, 8)), rng.normal(size=(50, 7))
    got = top_eigenvalue(d, e)
    ref = [np.linalg.eigvalsh(tridiag(a, b))[-1] for a, b in zip(d, e)]
    assert np.allclose(got, ref, atol=1e-12)


def test_one_by_one():
    assert top_eigenvalue(np.array([[2.5]]), np.zeros((1, 0)))[0] == 2.5


def test_beta2_small_n_matches_gue():
    # n = 1 is N(0, 1); for n = 2 the gap r has density proportional to
    # r**2 exp(-r**2/4), so E[l_max] = E|r|/2 = 2/sqrt(pi)
    raw = hermite_beta_edge_sample(1, 2.0, 20000, seed=1, scaled=False).values
    assert raw.var() == pytest.approx(1.0, rel=0.05)
    big = hermite_beta_edge_sample(2, 2.0, 40000, seed=2, scaled=False).values
    assert big.mean() == pytest.approx(2 / math.sqrt(math.pi), rel=0.02)


def test_edge_scaling_location():
    v = hermite_beta_edge_sample(200, 2.0, 2000, seed=0).values
    assert -2.5 < v.mean() < -1.2


def test_deterministic_under_threads():
    a = hermite_beta_edge_sample(30, 1.0, 5000, seed=3, threads=1)
    b = hermite_beta_edge_sample(30, 1.0, 5000, seed=3, threads=4)
    assert np.array_equal(a.values, b.values)


def test_kolmogorov_distance():
    x = np.array([0.5])
    assert kolmogorov_distance(x, lambda t: t) == pytest.approx(0.5)
    rng = np.random.default_rng(0)
    assert kolmogorov_distance(rng.random(20000), lambda t: t) < 0.02


def test_tw2_fit():
    cdf, _, _ = tw2_distribution(hastings_mcleod_solve(-10, 8, 1e-12))
    v = hermite_beta_edge_sample(200, 2.0, 4000, seed=5).values
    assert kolmogorov_distance(v, cdf) < 0.05


def test_domain():
    with pytest.raises(DomainError):
        hermite_beta_edge_sample(0, 2.0, 10)
