"""Largest eigenvalue of the Hermite beta-ensemble via the tridiagonal model.

The matrix has diagonal ``N(0, 2)/sqrt(beta)`` and off-diagonal entries
``chi_{beta (n-i)} / sqrt(beta)``, ``i = 1..n-1``; its eigenvalues have
density proportional to ``prod |l_i - l_j|**beta exp(-beta/4 sum l_i**2)``,
so the spectrum fills ``[-2 sqrt n, 2 sqrt n]``.
"""
from __future__ import annotations

import numpy as np

from .._errors import DomainError
from .._parallel import ordered_map
from ..lpp import CHUNK, SampleBatch

SCALING = "n**(1/6) * (lambda_max - 2 sqrt(n)); the negative of n**(1/6) (2 sqrt(n) - lambda_max)"


def _count_below(diag, off2, x):
    # Sturm count of eigenvalues < x for each row (vectorized over samples)
    m, n = diag.shape
    tiny = 1e-300
    d = diag[:, 0] - x
    neg = (d < 0).astype(np.int64)
    for i in range(1, n):
        d = np.where(d == 0, tiny, d)
        d = diag[:, i] - x - off2[:, i - 1] / d
        neg += d < 0
    return neg


def top_eigenvalue(diag: np.ndarray, off: np.ndarray, iters: int = 60) -> np.ndarray:
    """Largest eigenvalue of each symmetric tridiagonal matrix by Sturm bisection.

    ``diag`` has shape ``(m, n)`` and ``off`` shape ``(m, n - 1)``.
    """
    diag = np.atleast_2d(np.asarray(diag, float))
    m, n = diag.shape
    if n == 1:
        return diag[:, 0].copy()
    off = np.atleast_2d(np.asarray(off, float))
    rad = np.zeros_like(diag)
    rad[:, :-1] += np.abs(off)
    rad[:, 1:] += np.abs(off)
    lo = diag.max(axis=1)
    hi = (diag + rad).max(axis=1)
    off2 = off ** 2
    for _ in range(iters):
        mid = (lo + hi) / 2
        below = _count_below(diag, off2, mid)
        all_below = below == n
        hi = np.where(all_below, mid, hi)
        lo = np.where(all_below, lo, mid)
    return (lo + hi) / 2


def _chunk(n, beta, seed, c, size):
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), int(c)])))
    diag = rng.normal(0.0, np.sqrt(2.0 / beta), (size, n))
    df = beta * np.arange(n - 1, 0, -1)
    off = np.sqrt(rng.chisquare(df, (size, n - 1)) / beta) if n > 1 else np.zeros((size, 0))
    return top_eigenvalue(diag, off)


def hermite_beta_edge_sample(n: int, beta: float, count: int, seed: int = 0,
                             threads: int | None = None, scaled: bool = True) -> SampleBatch:
    """Samples of ``n**(1/6) (lambda_max - 2 sqrt n)`` (raw ``lambda_max`` if not ``scaled``)."""
    if n < 1 or not beta > 0 or count < 0:
        raise DomainError("need n >= 1, beta > 0, count >= 0")
    chunks = [(c, min(CHUNK, count - c * CHUNK)) for c in range((count + CHUNK - 1) // CHUNK)]
    parts = ordered_map(lambda cs: _chunk(n, beta, seed, cs[0], cs[1]), chunks, threads)
    lam = np.concatenate(parts) if parts else np.zeros(0)
    values = n ** (1 / 6) * (lam - 2 * np.sqrt(n)) if scaled else lam
    spec = {"n": n, "beta": beta, "scaled": scaled}
    return SampleBatch(values, spec, count, seed, meta={"scaling": SCALING if scaled else "raw"})


def kolmogorov_distance(values, cdf) -> float:
    """``sup |F_emp - F|`` over the sample points, both one-sided limits included."""
    x = np.sort(np.asarray(values, float))
    m = len(x)
    F = cdf(x)
    upper = np.arange(1, m + 1) / m - F
    lower = F - np.arange(0, m) / m
    return float(max(upper.max(), lower.max()))
