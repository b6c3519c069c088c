"""Integer partitions, tableau counts, Schur polynomials and RSK statistics.

All counts are exact Python integers; Schur evaluations at rational points
are exact :class:`fractions.Fraction` values.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial, isqrt, prod
from typing import Iterator, Sequence

from ._errors import DomainError, ResourceError

#: Maximum number of partitions a single census may enumerate.
PARTITION_BUDGET = 5_000_000


class Partition(tuple):
    """Weakly decreasing tuple of positive integers (a Young diagram).

    >>> Partition([3, 1, 1]).size
    5
    """

    __slots__ = ()

    def __new__(cls, parts: Sequence[int] = ()):
        parts = tuple(int(p) for p in parts)
        while parts and parts[-1] == 0:
            parts = parts[:-1]
        for a, b in zip(parts, parts[1:]):
            if b > a:
                raise DomainError(f"parts must be weakly decreasing: {parts}")
        if parts and parts[-1] < 0:
            raise DomainError(f"parts must be nonnegative: {parts}")
        return super().__new__(cls, parts)

    @property
    def size(self) -> int:
        return sum(self)

    @property
    def length(self) -> int:
        return len(self)

    def part(self, i: int) -> int:
        """Row ``i`` (1-based), zero beyond the length."""
        return self[i - 1] if 1 <= i <= len(self) else 0

    def conjugate(self) -> "Partition":
        if not self:
            return self
        return Partition([sum(1 for p in self if p > j) for j in range(self[0])])

    def __repr__(self):
        return f"Partition({tuple(self)})"


def partition_count(n: int) -> int:
    """Number of partitions of ``n`` via Euler's pentagonal recurrence."""
    return _partition_numbers(n)[n] if n >= 0 else 0


@lru_cache(maxsize=None)
def _partition_numbers(n: int) -> tuple[int, ...]:
    p = [1] + [0] * n
    for m in range(1, n + 1):
        total, k = 0, 1
        while True:
            g1 = k * (3 * k - 1) // 2
            if g1 > m:
                break
            sign = 1 if k % 2 else -1
            total += sign * p[m - g1]
            g2 = g1 + k
            if g2 <= m:
                total += sign * p[m - g2]
            k += 1
        p[m] = total
    return tuple(p)


def _raw_partitions(n, max_length, max_part):
    # reverse-lexicographic: largest first part first
    if n == 0:
        yield ()
        return
    if max_length == 0:
        return
    for first in range(min(n, max_part), 0, -1):
        if first * max_length < n:
            break
        for rest in _raw_partitions(n - first, max_length - 1, first):
            yield (first,) + rest


def enumerate_partitions(
    n: int, max_length: int | None = None, max_part: int | None = None
) -> Iterator[Partition]:
    """Yield every partition of ``n`` in reverse-lexicographic order.

    ``max_length`` bounds the number of parts and ``max_part`` the largest part.
    """
    if n < 0:
        raise DomainError("n must be nonnegative")
    ml = n if max_length is None else max_length
    mp = n if max_part is None else max_part
    for parts in _raw_partitions(n, ml, mp):
        yield Partition(parts)


def _check_budget(n: int, budget: int | None) -> None:
    budget = PARTITION_BUDGET if budget is None else budget
    count = partition_count(n)
    if count > budget:
        raise ResourceError(f"p({n}) = {count} exceeds partition budget {budget}")


def hook_lengths(lam: Sequence[int]) -> list[int]:
    conj = Partition(lam).conjugate()
    return [lam[i] - j + conj[j] - i - 1 for i in range(len(lam)) for j in range(lam[i])]


def _dim_hook(lam):
    n = sum(lam)
    return factorial(n) // prod(hook_lengths(lam))


def _dim_frobenius(lam):
    k, ell = sum(lam), len(lam)
    if ell == 0:
        return 1
    shifted = [lam[i] + ell - 1 - i for i in range(ell)]
    vandermonde = prod(shifted[i] - shifted[j] for i in range(ell) for j in range(i + 1, ell))
    num = factorial(k) * vandermonde
    den = prod(factorial(s) for s in shifted)
    d, r = divmod(num, den)
    assert r == 0
    return d


def dim_syt(lam: Sequence[int], method: str = "hook") -> int:
    """Number of standard Young tableaux of shape ``lam``.

    ``method="hook"`` uses the hook-length product, ``"frobenius"`` the
    determinant formula with shifted parts ``lam_i + ell - i``.
    """
    lam = Partition(lam)
    if method == "hook":
        return _dim_hook(lam)
    if method == "frobenius":
        return _dim_frobenius(lam)
    raise ValueError(f"unknown method {method!r}")


def ssyt_count(lam: Sequence[int], m: int) -> int:
    """Semistandard tableaux of shape ``lam`` with entries in ``1..m`` (hook-content)."""
    if m < 1:
        raise DomainError("m must be positive")
    lam = Partition(lam)
    if len(lam) > m:
        return 0
    num = prod(m + j - i for i in range(len(lam)) for j in range(lam[i]))
    return num // prod(hook_lengths(lam))


def dims_by_size(max_size: int, budget: int | None = None) -> Iterator[tuple[int, dict]]:
    """Yield ``(k, {partition: d_lambda})`` for ``k = 0..max_size``.

    Uses the branching rule d_lambda = sum of d over partitions obtained by
    removing one corner, so only two levels are held in memory.
    """
    budget = PARTITION_BUDGET if budget is None else budget
    total = sum(partition_count(k) for k in range(max_size + 1))
    if total > budget:
        raise ResourceError(f"{total} partitions up to size {max_size} exceed budget {budget}")
    prev = {(): 1}
    yield 0, prev
    for k in range(1, max_size + 1):
        prev = next_dims_level(prev, k)
        yield k, prev


def next_dims_level(prev: dict, k: int) -> dict:
    """``{lambda: d_lambda}`` for partitions of ``k`` from the table for ``k - 1``."""
    cur = {}
    for lam in _raw_partitions(k, k, k):
        d = 0
        ell = len(lam)
        for i in range(ell):
            if i == ell - 1 or lam[i] > lam[i + 1]:
                if lam[i] == 1:
                    d += prev[lam[:i]]
                else:
                    d += prev[lam[:i] + (lam[i] - 1,) + lam[i + 1:]]
        cur[lam] = d
    return cur


# --- Schur polynomials -------------------------------------------------------

def _complete_homogeneous(x, kmax, zero, one):
    # h[k] of the variables x, k = 0..kmax
    h = [one] + [zero] * kmax
    for xi in x:
        for k in range(1, kmax + 1):
            h[k] = h[k] + xi * h[k - 1]
    return h


def _det(matrix):
    # Gaussian elimination; exact for Fractions
    a = [row[:] for row in matrix]
    n = len(a)
    det = Fraction(1)
    for c in range(n):
        pivot = next((r for r in range(c, n) if a[r][c] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != c:
            a[c], a[pivot] = a[pivot], a[c]
            det = -det
        det *= a[c][c]
        for r in range(c + 1, n):
            if a[r][c] != 0:
                f = a[r][c] / a[c][c]
                for cc in range(c, n):
                    a[r][cc] -= f * a[c][cc]
    return det


def _is_exact(v):
    return isinstance(v, (int, Fraction))


def schur_eval(lam: Sequence[int], x: Sequence):
    """Evaluate s_lam(x_1, ..., x_k, 0, 0, ...).

    Rational inputs give an exact Fraction via the Jacobi-Trudi determinant.
    Float or mpmath inputs use the subtraction-free branching rule, so the
    result carries only rounding error of positive sums.
    """
    lam = Partition(lam)
    if any(v < 0 for v in x):
        raise DomainError("Schur evaluation requires nonnegative arguments")
    if len(lam) > len(x):
        return Fraction(0) if all(_is_exact(v) for v in x) else 0.0
    if all(_is_exact(v) for v in x):
        xs = [Fraction(v) for v in x]
        ell = len(lam)
        if ell == 0:
            return Fraction(1)
        kmax = lam[0] + ell
        h = _complete_homogeneous(xs, kmax, Fraction(0), Fraction(1))

        def hk(k):
            return h[k] if 0 <= k <= kmax else Fraction(0)

        return _det([[hk(lam[i] - i + j) for j in range(ell)] for i in range(ell)])
    return _schur_branching(tuple(lam), tuple(x))


def _schur_branching(lam, x):
    # s_lam(x_1..x_m) = sum over mu interlacing lam of s_mu(x_1..x_{m-1}) x_m^{|lam|-|mu|}
    cache = {}

    def rec(shape, m):
        if not shape:
            return 1
        if len(shape) > m:
            return 0
        if m == 1:
            return x[0] ** shape[0]
        key = (shape, m)
        if key in cache:
            return cache[key]
        total = 0
        size = sum(shape)
        for mu in _interlacing(shape):
            total = total + rec(mu, m - 1) * x[m - 1] ** (size - sum(mu))
        cache[key] = total
        return total

    return rec(lam, len(x))


def _interlacing(lam):
    # mu with lam_{i+1} <= mu_i <= lam_i
    ell = len(lam)
    ranges = [range(lam[i + 1] if i + 1 < ell else 0, lam[i] + 1) for i in range(ell)]

    def rec(i):
        if i == ell:
            yield ()
            return
        for v in ranges[i]:
            for rest in rec(i + 1):
                yield (v,) + rest

    for mu in rec(0):
        yield tuple(p for p in mu if p > 0)


# --- RSK statistics ------------------------------------------------------------

@dataclass(frozen=True)
class CountTable:
    """Exact counts indexed by the contiguous integers ``start, start+1, ...``."""

    start: int
    counts: tuple[int, ...]
    checksum: int | None = None

    def __post_init__(self):
        if any(c < 0 for c in self.counts):
            raise ValueError("counts must be nonnegative")
        if self.checksum is not None and sum(self.counts) != self.checksum:
            raise ValueError(f"census total {sum(self.counts)} != checksum {self.checksum}")

    @property
    def total(self) -> int:
        return sum(self.counts)

    def __getitem__(self, k: int) -> int:
        i = k - self.start
        return self.counts[i] if 0 <= i < len(self.counts) else 0

    def as_dict(self) -> dict[int, int]:
        return {self.start + i: c for i, c in enumerate(self.counts)}

    @classmethod
    def from_dict(cls, table: dict[int, int], checksum: int | None = None) -> "CountTable":
        keys = [k for k, v in table.items() if v]
        lo, hi = min(keys), max(keys)
        return cls(lo, tuple(table.get(k, 0) for k in range(lo, hi + 1)), checksum)


def lis_counts(n: int, budget: int | None = None) -> CountTable:
    """Permutations of ``[n]`` counted by longest increasing subsequence length."""
    if n < 1:
        raise DomainError("n must be positive")
    _check_budget(n, budget)
    table: dict[int, int] = {}
    for lam in _raw_partitions(n, n, n):
        table[lam[0]] = table.get(lam[0], 0) + _dim_hook(lam) ** 2
    return CountTable.from_dict(table, checksum=factorial(n))


def word_lis_counts(m: int, n: int, budget: int | None = None) -> CountTable:
    """Words in ``[m]^n`` counted by longest weakly increasing subsequence length."""
    if m < 1 or n < 1:
        raise DomainError("m and n must be positive")
    _check_budget(n, budget)
    table: dict[int, int] = {}
    for lam in _raw_partitions(n, m, n):
        table[lam[0]] = table.get(lam[0], 0) + _dim_hook(lam) * ssyt_count(lam, m)
    return CountTable.from_dict(table, checksum=m ** n)


def max_dim_bound_holds(k: int) -> bool:
    """Check ``max d_lambda <= isqrt(k!)`` over all partitions of ``k``."""
    bound = isqrt(factorial(k))
    return all(_dim_hook(lam) <= bound for lam in _raw_partitions(k, k, k))
