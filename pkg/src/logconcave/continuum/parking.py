"""Total displacement of parking functions.

Cars ``1..n`` arrive in order with preferences in ``[n]``; each parks at its
preferred spot or the first free spot after it. The preference vector is a
parking function when every car parks. Total displacement is
``sum(spot - preference)``.
"""
from __future__ import annotations

import itertools
from fractions import Fraction

from .._errors import DomainError, ResourceError
from ..pmf import Pmf

MAX_N = 8


def _park(mask: int, pref: int, n: int):
    spot = pref
    while spot < n and mask >> spot & 1:
        spot += 1
    return spot if spot < n else None


def parking_displacement_counts(n: int, budget: int = 10_000_000) -> list[int]:
    """Number of parking functions of size n with each total displacement.

    The parking process is run over all ``n**n`` preference vectors, car by
    car, abandoning a prefix as soon as a car fails to park. Prefixes that
    reach the same occupied set and displacement are merged, which keeps the
    census exact while visiting each state once.
    """
    if n < 1:
        raise DomainError("n must be positive")
    if n > MAX_N:
        raise DomainError(f"census supports n <= {MAX_N}")
    layer = {(0, 0): 1}
    visited = 0
    for _ in range(n):
        nxt = {}
        for (mask, disp), count in layer.items():
            for pref in range(n):
                visited += 1
                if visited > budget:
                    raise ResourceError(f"parking census exceeded {budget} transitions")
                spot = _park(mask, pref, n)
                if spot is None:
                    continue
                key = (mask | 1 << spot, disp + spot - pref)
                nxt[key] = nxt.get(key, 0) + count
        layer = nxt
    top = max(d for _, d in layer)
    counts = [0] * (top + 1)
    for (_, d), c in layer.items():
        counts[d] += c
    return counts


def parking_displacement_pmf(n: int) -> Pmf:
    """Exact pmf of total displacement under a uniform parking function of size ``n``."""
    counts = parking_displacement_counts(n)
    total = sum(counts)
    assert total == (n + 1) ** (n - 1)
    return Pmf(0, tuple(Fraction(c, total) for c in counts), total=Fraction(1),
               meta={"statistic": "total displacement", "census": total})


def brute_force_counts(n: int) -> list[int]:
    """Direct simulation over every preference vector (small n only)."""
    counts: dict[int, int] = {}
    for prefs in itertools.product(range(n), repeat=n):
        mask, disp = 0, 0
        for p in prefs:
            spot = _park(mask, p, n)
            if spot is None:
                break
            mask |= 1 << spot
            disp += spot - p
        else:
            counts[disp] = counts.get(disp, 0) + 1
    return [counts.get(d, 0) for d in range(max(counts) + 1)]
