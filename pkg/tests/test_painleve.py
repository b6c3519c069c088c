import math

import mpmath
import numpy as np
import pytest
from scipy.integrate import simpson

from logconcave._errors import DomainError
from logconcave.continuum import (airy_eval, hastings_mcleod_solve, tw2_distribution,
                                  tw2_logconcavity_report)


@pytest.fixture(scope="module")
def grid():
    return hastings_mcleod_solve(-10, 8, 1e-12)


def test_certificate(grid):
    rep = tw2_logconcavity_report(grid)
    assert rep.passed
    assert rep.max_residual <= 1e-8
    assert rep.min_g >= -1e-10
    assert rep.max_log_density_second <= 1e-8
    assert abs(rep.density_integral - 1) < 1e-6


def test_right_end_follows_airy(grid):
    # u = Ai + O(Ai**3) and h is exponentially small at x = 8
    ai, aip = airy_eval(8.0)
    assert grid.u[-1] == pytest.approx(ai, rel=1e-12)
    assert grid.uprime[-1] == pytest.approx(aip, rel=1e-12)


def test_left_end_near_sqrt(grid):
    assert grid.u[0] == pytest.approx(math.sqrt(5), rel=0.02)


def test_left_tail_constant(grid):
    # log F2(x) = -|x|**3/12 - log|x|/8 + log(2)/24 + zeta'(-1) + O(|x|**-3)
    c0 = math.log(2) / 24 + float(mpmath.zeta(-1, derivative=1))
    expect = -1000 / 12 - math.log(10) / 8 + c0
    assert math.log(grid.F2[0]) == pytest.approx(expect, abs=1e-3)


def test_moments(grid):
    x, f = grid.x, grid.density
    mean = simpson(x * f, x=x)
    var = simpson((x - mean) ** 2 * f, x=x)
    assert mean == pytest.approx(-1.7710868074, abs=1e-8)
    assert var == pytest.approx(0.8131947928, abs=1e-8)


def test_h_is_tail_integral_of_u_squared(grid):
    dh = np.gradient(grid.hfun, grid.x)
    assert np.max(np.abs(dh[1:-1] + grid.u[1:-1] ** 2)) < 1e-4


def test_g_derivative_identity(grid):
    gap = np.abs(grid.g_prime_fd - grid.g_prime_identity) / np.abs(grid.g_prime_identity)
    assert np.max(gap[1:-1]) < 1e-6


def test_distribution_functions(grid):
    cdf, pdf, rep = tw2_distribution(grid)
    t = np.linspace(-9, 7, 200)
    d = 1e-5
    assert np.max(np.abs((cdf(t + d) - cdf(t - d)) / (2 * d) - pdf(t))) < 1e-7
    assert np.all(np.diff(cdf(t)) >= 0)
    assert cdf(100.0) == pytest.approx(1.0) and cdf(-100.0) < 1e-30
    assert rep.passed


def test_csv(grid):
    text = grid.to_csv(every=64)
    lines = text.splitlines()
    assert lines[0] == "x,F2,density,u,h,g,residual"
    assert len(lines) == 1 + len(range(0, len(grid), 64))
    assert float(lines[1].split(",")[0]) == -10.0


def test_domain_checks():
    with pytest.raises(DomainError):
        hastings_mcleod_solve(-10, 5)
    with pytest.raises(DomainError):
        hastings_mcleod_solve(-13, 8)
    with pytest.raises(DomainError):
        hastings_mcleod_solve(-10, 8, tol=1e-14)


def test_coarser_grid_agrees(grid):
    coarse = hastings_mcleod_solve(-4, 8, 1e-10, step=0.25)
    idx = np.searchsorted(grid.x, coarse.x)
    assert np.allclose(grid.F2[idx], coarse.F2, rtol=1e-12, atol=0)
