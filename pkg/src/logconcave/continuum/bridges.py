"""Joint density of non-intersecting Brownian bridges at finitely many times.

``N`` bridges start and end at 0 on ``[0, 1]`` and are conditioned not to
intersect. At times ``t_1 < ... < t_k`` the positions ``X`` (an ``N x k``
array with ordered columns) have density proportional to

    Delta(x^1) prod_i p_{t_1}(0, x^1_i)
    * prod_m det[p_{t_{m+1} - t_m}(x^m_i, x^{m+1}_j)]
    * Delta(x^k) prod_i p_{1 - t_k}(x^k_i, 0)

where ``p_s`` is the heat kernel and ``Delta`` the Vandermonde product; the
boundary factors are the coalescing limit of the Karlin-McGregor determinant.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import mpmath
import numpy as np

from .._errors import DomainError
from .._parallel import ordered_map

RECHECK_MARGIN = 1e-6


def _log_vandermonde(x, lib=np):
    n = len(x)
    return sum(lib.log(x[j] - x[i]) for i in range(n) for j in range(i + 1, n))


def _log_det_exp(x, y, s):
    # log det[exp(x_i y_j / s)] in floating point
    sign, val = np.linalg.slogdet(np.exp(np.outer(x, y) / s))
    return val if sign > 0 else -math.inf


def _log_det_exp_mp(x, y, s):
    m = mpmath.matrix([[mpmath.exp(mpmath.mpf(a) * mpmath.mpf(b) / s) for b in y] for a in x])
    d = mpmath.det(m)
    return mpmath.log(d) if d > 0 else mpmath.mpf("-inf")


def km_log_density(X: np.ndarray, times: Sequence[float], precise: bool = False):
    """Unnormalized log density of the bridge positions ``X`` (shape ``N x k``)."""
    X = np.asarray(X, float)
    N, k = X.shape
    if len(times) != k:
        raise DomainError("one column per time")
    if N > 1 and np.any(np.diff(X, axis=0) <= 0):
        return -math.inf
    if precise:
        with mpmath.workdps(40):
            t = [mpmath.mpf(v) for v in times]
            Xm = [[mpmath.mpf(v) for v in row] for row in X]
            col = lambda m: [Xm[i][m] for i in range(N)]
            total = _log_vandermonde(col(0), mpmath) + _log_vandermonde(col(k - 1), mpmath)
            total -= sum(v ** 2 for v in col(0)) / (2 * t[0])
            total -= sum(v ** 2 for v in col(k - 1)) / (2 * (1 - t[-1]))
            for m in range(k - 1):
                s = t[m + 1] - t[m]
                a, b = col(m), col(m + 1)
                total += -sum(v ** 2 for v in a) / (2 * s) - sum(v ** 2 for v in b) / (2 * s)
                total += _log_det_exp_mp(a, b, s)
            return total
    total = _log_vandermonde(X[:, 0]) + _log_vandermonde(X[:, -1])
    total -= np.sum(X[:, 0] ** 2) / (2 * times[0]) + np.sum(X[:, -1] ** 2) / (2 * (1 - times[-1]))
    for m in range(k - 1):
        s = times[m + 1] - times[m]
        a, b = X[:, m], X[:, m + 1]
        total += -(np.sum(a ** 2) + np.sum(b ** 2)) / (2 * s) + _log_det_exp(a, b, s)
    return float(total)


@dataclass(frozen=True)
class KMReport:
    N: int
    times: tuple
    trials: int
    violations: int
    min_margin: float
    precise_rechecks: int

    @property
    def ok(self) -> bool:
        return self.violations == 0

    def to_dict(self):
        return {"N": self.N, "times": list(self.times), "trials": self.trials,
                "violations": self.violations, "min_margin": self.min_margin,
                "precise_rechecks": self.precise_rechecks, "ok": self.ok}


def _random_config(rng, N, times):
    cols = []
    for t in times:
        while True:
            c = np.sort(rng.normal(0.0, math.sqrt(t * (1 - t)), N))
            if N == 1 or np.min(np.diff(c)) > 0:
                break
        cols.append(c)
    return np.column_stack(cols)


def km_bridge_logconcavity_check(N: int, times: Sequence[float], trials: int = 10000,
                                 seed: int = 0, tol: float = 1e-12,
                                 threads: int | None = None) -> KMReport:
    """Midpoint log-concavity ``f((X+Y)/2)**2 >= f(X) f(Y)`` at random ordered pairs.

    The margin ``2 log f(M) - log f(X) - log f(Y)`` is computed in double
    precision and recomputed at 40 digits whenever it falls below 1e-6.
    A violation is a margin below ``-tol``.
    """
    if not 1 <= N <= 6 or not 1 <= len(times) <= 4:
        raise DomainError("need N <= 6 and at most 4 times")
    times = tuple(float(t) for t in times)
    if any(not 0 < t < 1 for t in times) or any(b <= a for a, b in zip(times, times[1:])):
        raise DomainError("times must be increasing in (0, 1)")

    def run(chunk):
        c, size = chunk
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), c])))
        bad, worst, rechecks = 0, math.inf, 0
        for _ in range(size):
            X, Y = _random_config(rng, N, times), _random_config(rng, N, times)
            M = (X + Y) / 2
            # midpoints of ordered columns stay ordered
            assert N == 1 or np.all(np.diff(M, axis=0) > 0)
            margin = 2 * km_log_density(M, times) - km_log_density(X, times) - km_log_density(Y, times)
            if not margin >= RECHECK_MARGIN:
                rechecks += 1
                margin = float(2 * km_log_density(M, times, True) - km_log_density(X, times, True)
                               - km_log_density(Y, times, True))
            worst = min(worst, margin)
            bad += margin < -tol
        return bad, worst, rechecks

    chunks = [(c, min(1000, trials - c * 1000)) for c in range((trials + 999) // 1000)]
    res = ordered_map(run, chunks, threads)
    return KMReport(N, times, trials, sum(r[0] for r in res), min(r[1] for r in res),
                    sum(r[2] for r in res))
