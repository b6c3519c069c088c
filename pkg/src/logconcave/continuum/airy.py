"""The Airy function Ai and its derivative.

Maclaurin series (summed in extended precision) for ``|x| <= 10`` and the
standard asymptotic expansions beyond. The leading constant at ``+inf`` is
``1 / (2 sqrt(pi) x**(1/4))``.
"""
from __future__ import annotations

import math

import mpmath

from .._errors import DomainError

SERIES_CUTOFF = 10.0
MAX_ABS_X = 50.0
ASYMPTOTIC_TERMS = 40


def _series(x, dps: int):
    with mpmath.workdps(dps):
        x = mpmath.mpf(x)
        c1 = 1 / (mpmath.cbrt(9) * mpmath.gamma(mpmath.mpf(2) / 3))
        c2 = 1 / (mpmath.cbrt(3) * mpmath.gamma(mpmath.mpf(1) / 3))
        x3 = x ** 3
        f, g = mpmath.mpf(1), x
        fp, gp = mpmath.mpf(0), mpmath.mpf(1)
        a, b = mpmath.mpf(1), x
        da, db = x * x / 2, mpmath.mpf(1)
        tiny = mpmath.mpf(2) ** (-mpmath.mp.prec - 8)
        k = 0
        while True:
            k += 1
            a = a * x3 / ((3 * k - 1) * (3 * k))
            b = b * x3 / ((3 * k) * (3 * k + 1))
            if k > 1:
                da = da * x3 / ((3 * k - 3) * (3 * k - 1))
            db = db * x3 / ((3 * k) * (3 * k - 2))
            f += a
            g += b
            fp += da
            gp += db
            if k > 3 and max(abs(a), abs(b), abs(da), abs(db)) < tiny:
                break
        return c1 * f - c2 * g, c1 * fp - c2 * gp


def _uv(kmax: int, dps: int):
    with mpmath.workdps(dps):
        u = [mpmath.mpf(1)]
        for k in range(1, kmax + 1):
            # u_k = u_{k-1} (6k-5)(6k-3)(6k-1) / (216 k (2k-1))
            u.append(u[-1] * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / (216 * k * (2 * k - 1)))
        v = [mpmath.mpf(1)] + [-(6 * k + 1) * u[k] / (6 * k - 1) for k in range(1, kmax + 1)]
        return u, v


def _asymptotic(x, dps: int):
    with mpmath.workdps(dps):
        x = mpmath.mpf(x)
        t = abs(x)
        z = 2 * t ** mpmath.mpf(1.5) / 3
        u, v = _uv(ASYMPTOTIC_TERMS, dps)

        def series(coef, parity=None):
            # sum (-1)^k c_k z^-k, or the even/odd split used on the negative axis
            total, prev = mpmath.mpf(0), None
            for k in range(len(coef)):
                if parity is None:
                    term = (-1) ** k * coef[k] / z ** k
                else:
                    idx = 2 * k + parity
                    if idx >= len(coef):
                        break
                    term = (-1) ** k * coef[idx] / z ** idx
                if prev is not None and abs(term) > abs(prev):
                    break
                total += term
                prev = term
            return total

        if x > 0:
            e = mpmath.exp(-z) / (2 * mpmath.sqrt(mpmath.pi))
            return e * series(u) / t ** 0.25, -e * t ** 0.25 * series(v)
        phase = z - mpmath.pi / 4
        c, s = mpmath.cos(phase), mpmath.sin(phase)
        r = 1 / mpmath.sqrt(mpmath.pi)
        ai = r / t ** 0.25 * (c * series(u, 0) + s * series(u, 1))
        aip = r * t ** 0.25 * (s * series(v, 0) - c * series(v, 1))
        return ai, aip


def _asymptotic_digits(x) -> float:
    # relative accuracy of the truncated expansion: its smallest term
    z = 2 * abs(float(x)) ** 1.5 / 3
    u, _ = _uv(ASYMPTOTIC_TERMS, 20)
    return max(float(-mpmath.log10(c) + k * math.log10(z)) for k, c in enumerate(u) if k)


def airy_eval_mp(x, dps: int = 40):
    """``(Ai(x), Ai'(x))`` as mpf values at roughly ``dps`` digits.

    The asymptotic expansion is used only where it can deliver ``dps``
    digits (about ``0.58 |x|**1.5``); otherwise the series is summed with
    enough guard digits to absorb its cancellation.
    """
    ax = abs(float(x))
    if ax <= SERIES_CUTOFF or _asymptotic_digits(x) < dps + 3:
        # the series loses about |x|**1.5 digits to cancellation for x > 0
        extra = int(ax ** 1.5) + 10
        return _series(x, dps + extra)
    return _asymptotic(x, dps)


def airy_eval(x: float) -> tuple[float, float]:
    """``(Ai(x), Ai'(x))`` for ``|x| <= 50`` with absolute error below 1e-13."""
    x = float(x)
    if not abs(x) <= MAX_ABS_X:
        raise DomainError("airy_eval supports |x| <= 50")
    ai, aip = airy_eval_mp(x, 25)
    return float(ai), float(aip)


def airy_leading(x: float) -> float:
    """Leading asymptotic ``exp(-2/3 x**1.5) / (2 sqrt(pi) x**(1/4))`` for ``x > 0``."""
    return math.exp(-2.0 / 3.0 * x ** 1.5) / (2.0 * math.sqrt(math.pi) * x ** 0.25)
