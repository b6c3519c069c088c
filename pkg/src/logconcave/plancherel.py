"""Plancherel-type measures on partitions and their Poisson-type mixtures.

``mu_n^(beta)`` gives a partition of ``n`` mass proportional to ``d_lambda**beta``.
Mixing over ``n`` with weights ``alpha**n * sum_lambda (d_lambda / n!)**beta``
gives the family ``M^(alpha, beta)``; for ``beta = 2`` the mixing law is
Poisson(alpha). Integer ``beta`` is handled in exact rational arithmetic;
other ``beta`` use 256-bit floating point with an explicit relative error
bound carried into every verdict.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import gmpy2
import mpmath

from ._errors import DomainError, ResourceError
from .discrete_gas import EnsembleSpec, GeometricPower, Power, marginal_pmf
from .partitions import (PARTITION_BUDGET, CountTable, Partition, _dim_hook, _raw_partitions,
                         dim_syt, lis_counts, next_dims_level, partition_count,
                         word_lis_counts)
from .pmf import LogConcavityReport, Pmf, check_logconcave, to_mpf

#: Working precision (bits) for non-integer exponents.
PRECISION_BITS = 256
#: Relative error bound declared for 256-bit payloads (very conservative).
MP_REL_ERR = 2.0 ** -200


def set_precision(bits: int) -> None:
    """Change the working precision for non-integer exponents (clears caches).

    The declared relative error keeps a margin of 56 bits below the mantissa.
    """
    global PRECISION_BITS, MP_REL_ERR
    if bits < 64:
        raise DomainError("precision must be at least 64 bits")
    PRECISION_BITS = int(bits)
    MP_REL_ERR = 2.0 ** -(int(bits) - 56)
    _LEVEL_CACHE.clear()


def _beta(beta):
    if isinstance(beta, (int, Fraction, str)):
        b = Fraction(beta)
    else:
        b = Fraction(float(beta))
    if b <= 0:
        raise DomainError("beta must be positive")
    return b


def _is_int(b: Fraction) -> bool:
    return b.denominator == 1


def _ctx():
    return gmpy2.context(precision=PRECISION_BITS)


def _power(d: int, b: Fraction):
    # d**b; exact int for integer b, otherwise an mpfr in the active context
    if _is_int(b):
        return d ** b.numerator
    if b == Fraction(1, 2):
        return gmpy2.sqrt(gmpy2.mpfr(d))
    return gmpy2.exp(gmpy2.mpfr(b.numerator) / b.denominator * gmpy2.log(gmpy2.mpfr(d)))


def _to_mpf(v):
    if isinstance(v, (int, Fraction)):
        return to_mpf(v)
    man, exp = v.as_mantissa_exp()
    return mpmath.mpf((int(man), int(exp)))


def _rational_or_float(v, name):
    if isinstance(v, (int, Fraction, str)):
        v = Fraction(v)
    else:
        v = float(v)
    if not v > 0:
        raise DomainError(f"{name} must be positive")
    return v


# --- bijection between tuples and partitions -----------------------------------

def h_to_partition(h: Sequence[int]) -> Partition:
    """``lambda_i = h_{n+1-i} - (n-i)`` for a strictly increasing tuple ``h``."""
    n = len(h)
    if any(b <= a for a, b in zip(h, h[1:])) or (h and h[0] < 0):
        raise DomainError(f"h must be strictly increasing in N: {tuple(h)}")
    return Partition([h[n - i] - (n - i) for i in range(1, n + 1)])


def partition_to_h(lam: Sequence[int], n: int) -> tuple:
    lam = Partition(lam)
    if len(lam) > n:
        raise DomainError(f"partition has more than {n} parts")
    return tuple(lam.part(n + 1 - i) + (i - 1) for i in range(1, n + 1))


# --- mu_n^(beta) -------------------------------------------------------------------

def plancherel_lambda_pmf(n: int, beta=2, i: int = 1, budget: int | None = None) -> Pmf:
    """Law of ``lambda_i`` under ``mu_n^(beta)``, supported in ``{0..n}``."""
    if n < 0 or i < 1:
        raise DomainError("need n >= 0 and i >= 1")
    b = _beta(beta)
    budget = PARTITION_BUDGET if budget is None else budget
    if partition_count(n) > budget:
        raise ResourceError(f"p({n}) exceeds partition budget {budget}")
    weights = [0] * (n + 1)
    with _ctx():
        if not _is_int(b):
            weights = [gmpy2.mpfr(0)] * (n + 1)
        for lam in _raw_partitions(n, n, n):
            j = lam[i - 1] if i <= len(lam) else 0
            weights[j] = weights[j] + _power(_dim_hook(lam), b)
        if _is_int(b):
            return Pmf(0, tuple(Fraction(w) for w in weights), exact=True)
        return Pmf(0, tuple(_to_mpf(w) for w in weights), exact=False, rel_err=MP_REL_ERR)


# --- level tables shared by the mixtures -------------------------------------------

@dataclass
class _Levels:
    """Per size k: ``S(k) = sum d**beta`` and ``T_i(k, j)`` for rows ``i <= rows``."""

    beta: Fraction
    rows: int = 4
    sums: list = field(default_factory=list)
    row_tables: list = field(default_factory=list)
    _dims: dict = field(default_factory=lambda: {(): 1})
    visited: int = 0

    def extend(self, K: int, budget: int):
        while len(self.sums) <= K:
            k = len(self.sums)
            if k > 0:
                if self.visited + partition_count(k) > budget:
                    raise ResourceError(
                        f"mixture needs partitions of size {k} or more; "
                        f"{self.visited + partition_count(k)} exceeds partition budget {budget}")
                self.visited += partition_count(k)
                self._dims = next_dims_level(self._dims, k)
            exact = _is_int(self.beta)
            zero = 0 if exact else gmpy2.mpfr(0)
            total = zero
            rows = [dict() for _ in range(self.rows)]
            with _ctx():
                for lam, d in self._dims.items():
                    v = _power(d, self.beta)
                    total = total + v
                    for i in range(self.rows):
                        j = lam[i] if i < len(lam) else 0
                        rows[i][j] = rows[i].get(j, zero) + v
            self.sums.append(total)
            self.row_tables.append(rows)


_LEVEL_CACHE: dict = {}


def _levels(beta: Fraction, rows: int) -> _Levels:
    key = beta
    lv = _LEVEL_CACHE.get(key)
    if lv is None or lv.rows < rows:
        lv = _Levels(beta, rows=max(rows, 4))
        _LEVEL_CACHE[key] = lv
    return lv


def _log_tail_bound(alpha: float, b: float, K: int) -> float:
    """Log of a bound on ``sum_{k>K} alpha**k S(k) / k!**beta``.

    Uses ``S(k) <= (k!)**(beta/2)`` for ``beta >= 2`` and, by Hoelder,
    ``S(k) <= p(k)**(1-beta/2) (k!)**(beta/2)`` for ``beta < 2``. Exact
    partition numbers are used for 200 terms; beyond that the
    Hardy-Ramanujan bound ``p(k) <= exp(pi sqrt(2k/3))`` gives a term ratio
    that decreases in k, closing the sum geometrically.
    """
    with mpmath.workdps(30):
        a = mpmath.mpf(alpha)
        g = max(0.0, 1 - b / 2)

        def log_term(k, pk):
            return k * mpmath.log(a) + g * mpmath.log(pk) - b / 2 * mpmath.loggamma(k + 1)

        def log_hr(k):
            return (k * mpmath.log(a) + g * mpmath.pi * mpmath.sqrt(mpmath.mpf(2) * k / 3)
                    - b / 2 * mpmath.loggamma(k + 1))

        stop = K + 200
        terms = [log_term(k, partition_count(k)) for k in range(K + 1, stop + 1)]
        l1, l2 = log_hr(stop + 1), log_hr(stop + 2)
        if l2 >= l1:
            return math.inf
        rem = l1 - mpmath.log(1 - mpmath.exp(l2 - l1))
        top = max(max(terms), rem)
        s = mpmath.fsum(mpmath.exp(t - top) for t in terms) + mpmath.exp(rem - top)
        return float(top + mpmath.log(s)) + 1e-9


@dataclass(frozen=True)
class MixtureSpec:
    alpha: object
    beta: object
    eps: float = 1e-12

    def __post_init__(self):
        object.__setattr__(self, "alpha", _rational_or_float(self.alpha, "alpha"))
        object.__setattr__(self, "beta", _beta(self.beta))
        if not self.eps > 0:
            raise DomainError("eps must be positive")


def _mixture_core(spec: MixtureSpec, rows: int, budget: int | None, strict: bool = True):
    """Cutoff K, per-k factors ``alpha**k / k!**beta``, total and residual.

    With ``strict=False`` a budget breach stops the growth at the last
    affordable size and the (larger than eps) certified residual is returned.
    """
    budget = PARTITION_BUDGET if budget is None else budget
    a, b = spec.alpha, spec.beta
    lv = _levels(b, rows)
    exact = _is_int(b) and isinstance(a, Fraction)
    poisson = b == 2

    def factor(k):
        if exact:
            return a ** k / math.factorial(k) ** b.numerator
        with _ctx():
            al = gmpy2.mpfr(a.numerator) / a.denominator if isinstance(a, Fraction) \
                else gmpy2.mpfr(a)
            return al ** k / gmpy2.exp(gmpy2.mpfr(b.numerator) / b.denominator
                                       * gmpy2.lgamma(k + 1)[0])

    K = 0
    acc = 0 if exact else gmpy2.mpfr(0)
    factors = []
    while True:
        try:
            lv.extend(K, budget)
        except ResourceError:
            if strict or K == 0:
                raise
            K -= 1
            tail = math.exp(_log_tail_bound(float(a), float(b), K))
            with mpmath.workdps(60):
                total = _to_mpf(acc) + mpmath.mpf(tail)
                residual = mpmath.mpf(tail) / total
            if exact:
                total, residual = acc + Fraction(tail), Fraction(tail) / (acc + Fraction(tail))
            break
        f = factor(K)
        factors.append(f)
        with _ctx():
            acc = acc + f * lv.sums[K]
        if poisson:
            with mpmath.workdps(60):
                total = mpmath.exp(to_mpf(a))
                residual = 1 - _to_mpf(acc) / total
            if K >= a and residual < spec.eps:
                break
        else:
            log_tail = _log_tail_bound(float(a), float(b), K)
            s = float(_to_mpf(acc))
            if log_tail < math.log(spec.eps) + math.log(s):
                tail = math.exp(log_tail)
                if exact:
                    total = acc + Fraction(tail)
                    residual = Fraction(tail) / total
                else:
                    with mpmath.workdps(60):
                        total = _to_mpf(acc) + mpmath.mpf(tail)
                        residual = mpmath.mpf(tail) / total
                break
        K += 1
    return K, factors, total, residual, exact, lv


def nu_mixture(spec: MixtureSpec, budget: int | None = None, strict: bool = True) -> Pmf:
    """The mixing law on sizes k, proportional to ``alpha**k sum_{lambda |- k} (d/k!)**beta``.

    The cutoff K (recorded in ``meta``) is the first size at which the
    certified tail bound falls below ``eps`` times the accumulated mass.
    """
    K, factors, total, residual, exact, lv = _mixture_core(spec, 1, budget, strict)
    with _ctx():
        weights = [f * lv.sums[k] for k, f in enumerate(factors)]
    if exact:
        return Pmf(0, tuple(weights), total=total, residual=residual, exact=True,
                   meta={"cutoff": K})
    return Pmf(0, tuple(_to_mpf(w) for w in weights), total=total, residual=residual,
               exact=False, rel_err=MP_REL_ERR, meta={"cutoff": K})


def mixture_lambda_pmf(spec: MixtureSpec, i: int = 1, budget: int | None = None,
                       strict: bool = True) -> Pmf:
    """Law of ``lambda_i`` under the mixture ``M^(alpha, beta)``.

    Raises :class:`ResourceError` when the certified cutoff needs more
    partitions than ``budget``, unless ``strict`` is False (see ``nu_mixture``).
    """
    if i < 1:
        raise DomainError("row index must be positive")
    K, factors, total, residual, exact, lv = _mixture_core(spec, i, budget, strict)
    weights = [0 if exact else gmpy2.mpfr(0)] * (K + 1)
    with _ctx():
        for k in range(K + 1):
            for j, v in lv.row_tables[k][i - 1].items():
                weights[j] = weights[j] + factors[k] * v
    if exact:
        return Pmf(0, tuple(weights), total=total, residual=residual, exact=True,
                   meta={"cutoff": K})
    return Pmf(0, tuple(_to_mpf(w) for w in weights), total=total, residual=residual,
               exact=False, rel_err=MP_REL_ERR, meta={"cutoff": K})


# --- gamma_{n,q,beta} and the limiting ratio ------------------------------------

def gamma_lambda1_pmf(n: int, q, beta=2, eps: float = 1e-12, budget: int | None = None) -> Pmf:
    """Law of ``lambda_1 = h_n - (n-1)`` for ``n`` particles with weight ``q**x``
    and interaction ``|h_j - h_i|**beta``."""
    if n < 1:
        raise DomainError("n must be positive")
    b = _beta(beta)
    expo = int(b) if _is_int(b) else float(b)
    spec = EnsembleSpec(n, GeometricPower(q), Power(expo))
    kw = {} if budget is None else {"budget": budget}
    return marginal_pmf(spec, n, eps=eps, **kw).shifted(-(n - 1))


def _delta_power_sum(s: int, n: int, b: Fraction):
    total = 0 if _is_int(b) else gmpy2.mpfr(0)
    with _ctx():
        for lam in _raw_partitions(s, n, s):
            h = partition_to_h(lam, n)
            d = math.prod(h[j] - h[i] for i in range(n) for j in range(i + 1, n))
            total = total + _power(d, b)
    return total


@dataclass(frozen=True)
class RatioCheck:
    lhs: object
    rhs: object
    gap: object

    def to_dict(self, digits=30):
        return {k: mpmath.nstr(_to_mpf(v), digits) for k, v in
                (("lhs", self.lhs), ("rhs", self.rhs), ("gap", self.gap))}


def limiting_ratio_check(n: int, alpha, beta, k: int) -> RatioCheck:
    """Compare the size ratio of consecutive totals under ``gamma_{n, alpha/n**beta, beta}``
    with its limit ``alpha * S(k+1)/(k+1)!**beta / (S(k)/k!**beta)``."""
    if not n > k + 1:
        raise DomainError(f"need n > k + 1 (n={n}, k={k})")
    if k < 0:
        raise DomainError("k must be nonnegative")
    a = _rational_or_float(alpha, "alpha")
    b = _beta(beta)
    exact = _is_int(b) and isinstance(a, Fraction)
    a_next, a_cur = _delta_power_sum(k + 1, n, b), _delta_power_sum(k, n, b)
    s_next = sum(_power(_dim_hook(l), b) for l in _raw_partitions(k + 1, k + 1, k + 1))
    s_cur = sum(_power(_dim_hook(l), b) for l in _raw_partitions(k, k, k)) if k else 1
    if exact:
        q = a / Fraction(n) ** b.numerator
        lhs = q * Fraction(a_next) / a_cur
        rhs = a * Fraction(s_next, math.factorial(k + 1) ** b.numerator) \
            / Fraction(s_cur, math.factorial(k) ** b.numerator)
        return RatioCheck(lhs, rhs, lhs - rhs)
    with mpmath.workdps(60):
        am, bm = to_mpf(a), to_mpf(b)
        q = am / mpmath.mpf(n) ** bm
        lhs = q * _to_mpf(a_next) / _to_mpf(a_cur)
        rhs = am * (_to_mpf(s_next) / mpmath.factorial(k + 1) ** bm) \
            / (_to_mpf(s_cur) / mpmath.factorial(k) ** bm)
        return RatioCheck(lhs, rhs, lhs - rhs)


# --- conjecture checks ------------------------------------------------------------

def chen_check(n: int, window: int | None = None, budget: int | None = None) -> LogConcavityReport:
    """Log-concavity of ``k -> #{permutations of [n] with longest increasing run k}``.

    With ``window = j`` only ``k`` in ``{n-j, ..., n}`` is checked, using the
    partitions ``(k, mu)`` with ``mu |- n-k``; this reaches n in the hundreds.
    """
    if n < 1:
        raise DomainError("n must be positive")
    if window is None or n - window - 1 < 1:
        table = lis_counts(n, budget)
        return check_logconcave(Pmf(table.start, tuple(table.counts)))
    counts = edge_lis_counts(n, window)
    return check_logconcave(Pmf(counts.start, tuple(counts.counts)))


def edge_lis_counts(n: int, window: int) -> CountTable:
    """``l_{n,k}`` for ``k`` in ``{n-window-1, ..., n}``."""
    if window < 0 or n - window - 1 < 1:
        raise DomainError("window too large for n")
    table = {}
    for k in range(n - window - 1, n + 1):
        r = n - k
        total = 0
        for mu in _raw_partitions(r, r, min(r, k)):
            total += dim_syt((k,) + mu) ** 2
        table[k] = total
    return CountTable(n - window - 1, tuple(table[k] for k in range(n - window - 1, n + 1)))


def rho_pmf(n: int, k: int, beta=2) -> Pmf:
    """Law of ``h_n`` for increasing tuples with ``sum h = k + n(n-1)/2``, mass
    proportional to ``prod_{i<j} (h_j - h_i)**beta``."""
    if not n > k >= 0:
        raise DomainError(f"need n > k >= 0 (n={n}, k={k})")
    b = _beta(beta)
    weights = [0 if _is_int(b) else gmpy2.mpfr(0)] * (k + 1)
    with _ctx():
        for lam in _raw_partitions(k, n, k):
            h = partition_to_h(lam, n)
            d = math.prod(h[j] - h[i] for i in range(n) for j in range(i + 1, n))
            j = lam[0] if lam else 0
            weights[j] = weights[j] + _power(d, b)
    if _is_int(b):
        return Pmf(n - 1, tuple(Fraction(w) for w in weights), exact=True)
    return Pmf(n - 1, tuple(_to_mpf(w) for w in weights), exact=False, rel_err=MP_REL_ERR)


def rho_check(n: int, k: int, beta=2) -> LogConcavityReport:
    return check_logconcave(rho_pmf(n, k, beta))


def word_chen_check(m: int, n: int, budget: int | None = None) -> LogConcavityReport:
    """Log-concavity of the longest weakly increasing subsequence law on ``[m]**n``."""
    table = word_lis_counts(m, n, budget)
    return check_logconcave(Pmf(table.start, tuple(table.counts)))


# --- Poissonization -----------------------------------------------------------------

@dataclass(frozen=True)
class PoissonizationReport:
    ok: bool
    first_violation: tuple | None
    checked: int

    def to_dict(self):
        return {"ok": self.ok, "first_violation": self.first_violation, "checked": self.checked}


def poissonization_condition(family: Sequence[Pmf], k_max: int, k_min: int = 2) -> PoissonizationReport:
    """Check ``mu_i(k-1)/i! mu_j(k+1)/j! <= mu_f(k)/f! mu_c(k)/c!`` with ``f, c``
    the floor and ceiling of ``(i+j)/2``, for all ``i, j`` in the family and
    ``k_min <= k <= k_max``."""
    I = len(family) - 1
    masses = [fam.masses for fam in family]

    def mu(i, k):
        fam = family[i]
        idx = k - fam.offset
        return masses[i][idx] if 0 <= idx < len(masses[i]) else 0

    fact = [math.factorial(i) for i in range(I + 1)]
    checked = 0
    for k in range(k_min, k_max + 1):
        for i in range(I + 1):
            for j in range(I + 1):
                f, c = (i + j) // 2, (i + j + 1) // 2
                lhs = mu(i, k - 1) * mu(j, k + 1) * fact[f] * fact[c]
                rhs = mu(f, k) * mu(c, k) * fact[i] * fact[j]
                checked += 1
                if lhs > rhs:
                    return PoissonizationReport(False, (i, j, k), checked)
    return PoissonizationReport(True, None, checked)


def poissonize(family: Sequence[Pmf], lam) -> Pmf:
    """Mixture ``sum_i e**-lam lam**i / i! mu_i`` over the given family.

    The residual accounts for the Poisson tail beyond the last index and the
    members' own residuals.
    """
    lam = _rational_or_float(lam, "lambda")
    lo = min(f.offset for f in family)
    hi = max(f.offset + len(f) - 1 for f in family)
    exact = isinstance(lam, Fraction) and all(f.exact and not isinstance(f.norm, mpmath.mpf)
                                               for f in family)
    weights = [0] * (hi - lo + 1) if exact else [mpmath.mpf(0)] * (hi - lo + 1)
    with mpmath.workdps(60):
        for i, fam in enumerate(family):
            c = lam ** i / math.factorial(i) if exact else to_mpf(lam) ** i / mpmath.factorial(i)
            for j, m in enumerate(fam.masses):
                weights[fam.offset - lo + j] += c * (m if exact else to_mpf(m))
        total = mpmath.exp(to_mpf(lam))
        residual = 1 - sum(to_mpf(w) for w in weights) / total
    return Pmf(lo, tuple(weights), total=total, residual=residual, exact=exact,
               rel_err=0.0 if exact else 1e-50, meta={"members": len(family)})


def plancherel_family(I: int, beta=2, i: int = 1) -> list:
    """``[law of lambda_i under mu_n^(beta) for n = 0..I]``."""
    return [plancherel_lambda_pmf(n, beta, i) for n in range(I + 1)]
