"""Ordered discrete ensembles with general weights and pair interactions.

The ensemble on strictly increasing tuples ``h_1 < ... < h_n`` has mass
proportional to ``prod_{i<j} Q(h_j - h_i) * prod_j w_j(h_j)``. Marginal laws
are computed by exact enumeration, level by level in the leading coordinate
``h_n``; infinite supports are truncated with a certified tail bound.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

import mpmath
import numpy as np

from ._errors import DomainError, ResourceError
from ._parallel import ordered_map
from .pmf import Pmf, to_mpf

#: Maximum number of tuples one marginal computation may visit.
TUPLE_BUDGET = 20_000_000

_U = 2.0 ** -53


def _rational(v, name):
    if isinstance(v, bool):
        raise DomainError(f"{name} must be numeric")
    if isinstance(v, (int, Fraction)):
        return Fraction(v)
    if isinstance(v, str):
        return Fraction(v)
    return float(v)


def _is_exact(*vals):
    return all(isinstance(v, (int, Fraction)) for v in vals)


# --- weight families ------------------------------------------------------------

class WeightFamily:
    """Base class: kernel ``w(x)`` up to a constant factor per particle."""

    lower = 0
    constant = 1

    def upper(self, n: int):
        return None

    def validate(self, n: int) -> None:
        pass

    def kernel(self, x: int, n: int, j: int):
        raise NotImplementedError

    def log_kernel(self, x: int, n: int, j: int) -> float:
        v = self.kernel(x, n, j)
        return math.log(v) if v > 0 else -math.inf

    @property
    def exact(self) -> bool:
        return True

    def mass_bound(self, n: int) -> float:
        """Upper bound on ``sum_x w(x)``; needed only for infinite supports."""
        raise NotImplementedError

    def normalizer_factors(self, n: int):
        """``h_j`` with ``prod h_j`` the normalizer for interaction ``Q(d) = d**2``, or None."""
        return None


@dataclass(frozen=True)
class Meixner(WeightFamily):
    """``w(x) = C(x+m-n, x) q**x`` on N (requires m >= n)."""

    m: int
    q: object

    def __post_init__(self):
        object.__setattr__(self, "q", _rational(self.q, "q"))
        if not 0 < self.q < 1:
            raise DomainError("Meixner needs q in (0, 1)")

    def validate(self, n):
        if self.m < n:
            raise DomainError(f"Meixner needs m >= n (m={self.m}, n={n})")

    @property
    def exact(self):
        return _is_exact(self.q)

    def kernel(self, x, n, j):
        return math.comb(x + self.m - n, x) * self.q ** x

    def log_kernel(self, x, n, j):
        return math.log(math.comb(x + self.m - n, x)) + x * math.log(self.q)

    def mass_bound(self, n):
        return float((1 - self.q) ** -(self.m - n + 1))

    def normalizer_factors(self, n):
        b, q = self.m - n + 1, self.q
        return [math.factorial(j) * math.prod(range(b, b + j)) * q ** j / (1 - q) ** (b + 2 * j)
                for j in range(n)]


@dataclass(frozen=True)
class GeometricPower(WeightFamily):
    """``w(x) = q**x`` on N."""

    q: object

    def __post_init__(self):
        object.__setattr__(self, "q", _rational(self.q, "q"))
        if not 0 < self.q < 1:
            raise DomainError("GeometricPower needs q in (0, 1)")

    @property
    def exact(self):
        return _is_exact(self.q)

    def kernel(self, x, n, j):
        return self.q ** x

    def log_kernel(self, x, n, j):
        return x * math.log(self.q)

    def mass_bound(self, n):
        return float(1 / (1 - self.q))

    def normalizer_factors(self, n):
        q = self.q
        return [math.factorial(j) ** 2 * q ** j / (1 - q) ** (1 + 2 * j) for j in range(n)]


@dataclass(frozen=True)
class Charlier(WeightFamily):
    """``w(x) = e**-alpha alpha**x / x!``; the kernel omits ``e**-alpha``."""

    alpha: object

    def __post_init__(self):
        object.__setattr__(self, "alpha", _rational(self.alpha, "alpha"))
        if not self.alpha > 0:
            raise DomainError("Charlier needs alpha > 0")

    @property
    def constant(self):
        return mpmath.exp(-to_mpf(self.alpha))

    @property
    def exact(self):
        return _is_exact(self.alpha)

    def kernel(self, x, n, j):
        return self.alpha ** x / math.factorial(x)

    def log_kernel(self, x, n, j):
        return x * math.log(self.alpha) - math.lgamma(x + 1)

    def mass_bound(self, n):
        return math.exp(float(self.alpha))

    def normalizer_factors(self, n):
        # for the kernel alpha**x / x!: h_j = j! alpha**j e**alpha
        return [math.factorial(j) * self.alpha ** j * mpmath.exp(to_mpf(self.alpha))
                for j in range(n)]


@dataclass(frozen=True)
class Krawtchouk(WeightFamily):
    """``w(x) = C(K, x) p**x (1-p)**(K-x)`` on ``{0..K}``."""

    K: int
    p: object

    def __post_init__(self):
        object.__setattr__(self, "p", _rational(self.p, "p"))
        if not 0 < self.p < 1:
            raise DomainError("Krawtchouk needs p in (0, 1)")

    def validate(self, n):
        if self.K < n:
            raise DomainError(f"Krawtchouk needs K >= n (K={self.K}, n={n})")

    def upper(self, n):
        return self.K

    @property
    def exact(self):
        return _is_exact(self.p)

    def kernel(self, x, n, j):
        return math.comb(self.K, x) * self.p ** x * (1 - self.p) ** (self.K - x)

    def log_kernel(self, x, n, j):
        return (math.log(math.comb(self.K, x)) + x * math.log(self.p)
                + (self.K - x) * math.log(1 - self.p))


@dataclass(frozen=True)
class Hahn(WeightFamily):
    """``w(x) = C(x+a-n, x) C(K+a-n-x, K-x)`` on ``{0..K}`` with ``K = a+n-1``."""

    a: int
    K: int

    def validate(self, n):
        if self.a < n:
            raise DomainError(f"Hahn needs a >= n (a={self.a}, n={n})")
        if self.K != self.a + n - 1:
            raise DomainError(f"Hahn needs K = a + n - 1 (got K={self.K}, a={self.a}, n={n})")

    def upper(self, n):
        return self.K

    def kernel(self, x, n, j):
        return math.comb(x + self.a - n, x) * math.comb(self.K + self.a - n - x, self.K - x)


@dataclass(frozen=True)
class CustomWeights(WeightFamily):
    """Finite weight tables on ``offset, offset+1, ...``.

    ``tables`` is one sequence shared by every site or one sequence per site
    (site ``j`` uses ``tables[j-1]``).
    """

    tables: tuple
    offset: int = 0

    def __post_init__(self):
        t = self.tables
        if t and not isinstance(t[0], (list, tuple)):
            t = (tuple(t),)
        t = tuple(tuple(Fraction(v) if isinstance(v, (int, Fraction, str)) else float(v)
                        for v in row) for row in t)
        if not t or any(len(r) != len(t[0]) for r in t):
            raise DomainError("custom tables must be nonempty and of equal length")
        if any(v < 0 for r in t for v in r):
            raise DomainError("custom weights must be nonnegative")
        object.__setattr__(self, "tables", t)

    @property
    def lower(self):
        return self.offset

    def upper(self, n):
        return self.offset + len(self.tables[0]) - 1

    def validate(self, n):
        if len(self.tables) not in (1, n):
            raise DomainError(f"need 1 or {n} weight tables, got {len(self.tables)}")

    @property
    def exact(self):
        return all(isinstance(v, Fraction) for r in self.tables for v in r)

    def kernel(self, x, n, j):
        row = self.tables[0] if len(self.tables) == 1 else self.tables[j - 1]
        return row[x - self.offset]


# --- interactions ----------------------------------------------------------------

class Interaction:
    exact = True
    monotone_log_concave = True

    def value(self, d: int, i: int, j: int):
        raise NotImplementedError

    def log_value(self, d: int, i: int, j: int) -> float:
        return math.log(self.value(d, i, j))


@dataclass(frozen=True)
class Power(Interaction):
    """``Q(d) = d**exponent``; the orthogonal polynomial ensembles use exponent 2."""

    exponent: object = 2

    def __post_init__(self):
        e = self.exponent
        e = Fraction(e) if isinstance(e, (int, Fraction, str)) else float(e)
        if not e > 0:
            raise DomainError("exponent must be positive")
        object.__setattr__(self, "exponent", e)

    @property
    def integer(self) -> bool:
        return isinstance(self.exponent, Fraction) and self.exponent.denominator == 1

    @property
    def exact(self):
        return self.integer

    def value(self, d, i, j):
        return d ** int(self.exponent) if self.integer else float(d) ** float(self.exponent)

    def log_value(self, d, i, j):
        return float(self.exponent) * math.log(d)


@dataclass(frozen=True)
class QTheta(Interaction):
    """``Q_theta(d) = Gamma(d+1) Gamma(d+theta) / (Gamma(d+1-theta) Gamma(d))``."""

    theta: object

    def __post_init__(self):
        if not float(self.theta) > 0:
            raise DomainError("theta must be positive")

    exact = False

    def value(self, d, i, j):
        return qtheta(d, self.theta)

    def log_value(self, d, i, j):
        return log_qtheta(d, self.theta)


@dataclass(frozen=True)
class CustomInteraction(Interaction):
    """Pair-dependent ``Q_{i,j}(d)`` given by ``func(d, i, j)``.

    Set ``exact=False`` when ``func`` returns floats. The tail certificate
    needs every ``Q_{i,j}`` nondecreasing and log-concave, which is asserted
    by the caller through ``monotone_log_concave``.
    """

    func: Callable
    exact: bool = True
    monotone_log_concave: bool = False

    def value(self, d, i, j):
        return self.func(d, i, j)


def _mp(v):
    return mpmath.mpf(v.numerator) / v.denominator if isinstance(v, Fraction) else mpmath.mpf(v)


@lru_cache(maxsize=65536)
def _log_qtheta_mp(x, theta):
    if not (float(x) > 0 and float(theta) > 0 and float(x) > float(theta) - 1):
        raise DomainError(f"Q_theta needs x > max(0, theta-1) (x={x}, theta={theta})")
    with mpmath.workdps(30):
        xm, tm = _mp(x), _mp(theta)
        return (mpmath.loggamma(xm + 1) + mpmath.loggamma(xm + tm)
                - mpmath.loggamma(xm + 1 - tm) - mpmath.loggamma(xm))


def log_qtheta(x, theta) -> float:
    """``log Q_theta(x)`` via log-gamma at 30 significant digits, rounded once."""
    return float(_log_qtheta_mp(x, theta))


def qtheta(x, theta) -> float:
    """``Q_theta(x) = Gamma(x+1) Gamma(x+theta) / (Gamma(x+1-theta) Gamma(x))``.

    Evaluated through log-gamma in 30-digit arithmetic and rounded once, so
    the relative error is at most one unit in the last place.
    """
    with mpmath.workdps(30):
        return float(mpmath.exp(_log_qtheta_mp(x, theta)))


# --- ensemble specification ----------------------------------------------------

@dataclass(frozen=True)
class EnsembleSpec:
    """``n`` ordered particles with weights ``weights`` and interaction ``interaction``.

    ``lower``/``upper`` optionally restrict the support to a window; the
    restricted ensemble is itself an ensemble of the same kind.
    """

    n: int
    weights: WeightFamily
    interaction: Interaction = field(default_factory=Power)
    lower: int | None = None
    upper: int | None = None

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("n must be positive")
        self.weights.validate(self.n)
        lo = self.support_lower
        hi = self.support_upper
        if hi is not None and hi - lo + 1 < self.n:
            raise DomainError("support window holds fewer than n sites")

    @property
    def support_lower(self) -> int:
        base = self.weights.lower
        return base if self.lower is None else max(base, self.lower)

    @property
    def support_upper(self):
        base = self.weights.upper(self.n)
        if self.upper is None:
            return base
        return self.upper if base is None else min(base, self.upper)

    @property
    def exact(self) -> bool:
        return self.weights.exact and self.interaction.exact

    def closed_form_normalizer(self):
        """Normalizer of the kernel over the full support, when known in closed form."""
        if self.support_upper is not None or self.lower not in (None, self.weights.lower):
            return None
        if not (isinstance(self.interaction, Power) and self.interaction.exponent == 2):
            return None
        factors = self.weights.normalizer_factors(self.n)
        if factors is None:
            return None
        return math.prod(factors) if all(isinstance(f, (int, Fraction)) for f in factors) \
            else mpmath.fprod([to_mpf(f) for f in factors])


def _check_tuple(spec, h):
    h = tuple(int(v) for v in h)
    if len(h) != spec.n:
        raise DomainError(f"expected {spec.n} coordinates, got {len(h)}")
    if any(b <= a for a, b in zip(h, h[1:])):
        raise DomainError(f"tuple must be strictly increasing: {h}")
    lo, hi = spec.support_lower, spec.support_upper
    if h[0] < lo or (hi is not None and h[-1] > hi):
        raise DomainError(f"tuple {h} leaves the support [{lo}, {hi}]")
    return h


def _kernel_weight(spec, h):
    n, inter, fam = spec.n, spec.interaction, spec.weights
    if spec.exact:
        v = Fraction(1)
        for a in range(n):
            for b in range(a + 1, n):
                v *= inter.value(h[b] - h[a], a + 1, b + 1)
        for j, x in enumerate(h, 1):
            v *= fam.kernel(x, n, j)
        return v
    return math.exp(_log_kernel_weight(spec, h))


def _log_kernel_weight(spec, h):
    n, inter, fam = spec.n, spec.interaction, spec.weights
    terms = [inter.log_value(h[b] - h[a], a + 1, b + 1) for a in range(n) for b in range(a + 1, n)]
    terms += [fam.log_kernel(x, n, j) for j, x in enumerate(h, 1)]
    return math.fsum(terms)


def ensemble_weight(spec: EnsembleSpec, h: Sequence[int]):
    """Unnormalized mass of the configuration ``h``.

    Exact (Fraction) for rational parameters with an integer-power interaction
    and no irrational per-particle constant; otherwise an mpmath number.
    """
    h = _check_tuple(spec, h)
    v = _kernel_weight(spec, h)
    c = spec.weights.constant
    if c == 1:
        return v
    return to_mpf(v) * to_mpf(c) ** spec.n


# --- enumeration --------------------------------------------------------------

@dataclass
class _LevelResult:
    level: int
    sums: list            # per particle i: {x: weight}
    total: object
    log_err: float = 0.0  # max absolute error of any log weight (inexact path)
    count: int = 0


def _level_exact(spec, k, lo, kernels):
    n, inter = spec.n, spec.interaction
    # integer-scale the kernels on [lo, k] by a common denominator
    den = 1
    for row in kernels[: k - lo + 1]:
        for v in row:
            den = math.lcm(den, v.denominator)
    ik = [[int(v * den) for v in row] for row in kernels[: k - lo + 1]]
    width = k - lo + 1
    acc = [[0] * width for _ in range(n)]
    hs = [0] * n
    hs[n - 1] = k
    wk = ik[k - lo][n - 1]
    state = {"total": 0, "count": 0}
    integer_power = isinstance(inter, Power)
    beta = int(inter.exponent) if integer_power else None

    def leaf(v):
        state["count"] += 1
        if v:
            state["total"] += v
            for a in range(n):
                acc[a][hs[a] - lo] += v

    def rec(depth, start, dprod, wprod):
        last = depth == n - 2
        for x in range(start, k - (n - 2 - depth)):
            d = dprod * (k - x)
            for a in range(depth):
                d *= x - hs[a]
            w = wprod * ik[x - lo][depth]
            hs[depth] = x
            if last:
                leaf(d ** beta * w)
            else:
                rec(depth + 1, x + 1, d, w)

    def rec_generic(depth, start):
        for x in range(start, k - (n - 2 - depth)):
            hs[depth] = x
            if depth == n - 2:
                v = Fraction(1)
                for a in range(n):
                    for b in range(a + 1, n):
                        v *= inter.value(hs[b] - hs[a], a + 1, b + 1)
                w = wk
                for a in range(n - 1):
                    w *= ik[hs[a] - lo][a]
                leaf(v * w)
            else:
                rec_generic(depth + 1, x + 1)

    if n == 1:
        leaf(wk)
    elif integer_power:
        rec(0, lo, 1, wk)
    else:
        rec_generic(0, lo)
    scale = den ** n
    sums = [{lo + x: Fraction(v) / scale for x, v in enumerate(row) if v} for row in acc]
    return _LevelResult(k, sums, Fraction(state["total"]) / scale, 0.0, state["count"])


def _level_log(spec, k, lo, log_kernels, log_q):
    n = spec.n
    count = math.comb(k - lo, n - 1)
    sums = [dict() for _ in range(n)]
    if count == 0:
        return _LevelResult(k, sums, None, 0.0, 0)
    heads = np.fromiter(itertools.chain.from_iterable(itertools.combinations(range(lo, k), n - 1)),
                        dtype=np.int64, count=count * (n - 1)).reshape(count, n - 1)
    h = np.concatenate([heads, np.full((count, 1), k, dtype=np.int64)], axis=1)
    logw = np.zeros(count)
    abs_terms = np.zeros(count)
    for a in range(n):
        for b in range(a + 1, n):
            t = log_q[a][b][h[:, b] - h[:, a]]
            logw += t
            abs_terms += np.abs(t)
    for j in range(n):
        t = np.asarray(log_kernels[j])[h[:, j] - lo]
        logw += t
        abs_terms += np.abs(t)
    m = n * (n + 1) // 2
    # each term carries <= 1 ulp, the sum adds <= m rounding steps
    err = float(np.max((2 * m + 2) * _U * abs_terms)) if count else 0.0
    top = float(np.max(logw))
    scaled = np.exp(logw - top)
    for j in range(n):
        vals, inv = np.unique(h[:, j], return_inverse=True)
        acc = np.zeros(len(vals))
        np.add.at(acc, inv, scaled)
        sums[j] = {int(v): (top, float(a)) for v, a in zip(vals, acc)}
    return _LevelResult(k, sums, (top, float(np.sum(scaled))), err, count)


def _tail_bound(spec, K, lo):
    """Log of an upper bound on the kernel mass with ``h_n > K`` (infinite supports)."""
    n, fam, inter = spec.n, spec.weights, spec.interaction
    if not getattr(inter, "monotone_log_concave", False):
        raise DomainError("tail certificate needs a nondecreasing log-concave interaction")
    npairs = n * (n - 1) // 2

    def log_a(k):
        lq = inter.log_value(k - lo, 1, n) * npairs if n > 1 else 0.0
        return lq + fam.log_kernel(k, n, n)

    la1, la2 = log_a(K + 1), log_a(K + 2)
    log_ratio = la2 - la1
    if log_ratio >= 0:
        return math.inf
    mass = fam.mass_bound(n)
    log_e = (n - 1) * math.log(mass) - math.lgamma(n)
    # the small additive constant absorbs rounding in the bound itself
    return la1 + log_e - math.log1p(-math.exp(log_ratio)) + 1e-9


def _enumerate(spec: EnsembleSpec, eps: float, budget: int, threads: int | None):
    n, lo, hi = spec.n, spec.support_lower, spec.support_upper
    exact = spec.exact
    zc = spec.closed_form_normalizer() if hi is None and exact else None
    start = lo + n - 1
    levels: list[_LevelResult] = []
    visited = 0
    K = start - 1
    if exact:
        kernels = []
    else:
        log_kernels = [[] for _ in range(n)]
        log_q = [[None] * n for _ in range(n)]
    accum_total = 0 if exact else None
    residual, total = 0, None
    batch = max(1, threads or 1)

    def extend_tables(upto):
        if exact:
            for x in range(lo + len(kernels), upto + 1):
                kernels.append([Fraction(spec.weights.kernel(x, n, j)) for j in range(1, n + 1)])
        else:
            for j in range(n):
                row = log_kernels[j]
                for x in range(lo + len(row), upto + 1):
                    w = spec.weights.kernel(x, n, j + 1)
                    row.append(spec.weights.log_kernel(x, n, j + 1) if w > 0 else -math.inf)
            for a in range(n):
                for b in range(a + 1, n):
                    old = log_q[a][b]
                    size = upto - lo + 1
                    if old is None or len(old) < size:
                        arr = np.full(size, -math.inf)
                        for d in range(1, size):
                            arr[d] = spec.interaction.log_value(d, a + 1, b + 1)
                        log_q[a][b] = arr

    while True:
        if hi is not None and K >= hi:
            break
        ks = list(range(K + 1, K + 1 + batch))
        if hi is not None:
            ks = [k for k in ks if k <= hi]
        for k in ks:
            visited += math.comb(k - lo, n - 1)
        if visited > budget:
            raise ResourceError(f"enumeration would visit more than {budget} tuples "
                                f"(window up to {ks[-1]})")
        extend_tables(ks[-1])
        if exact:
            results = ordered_map(lambda k: _level_exact(spec, k, lo, kernels), ks, threads)
        else:
            results = ordered_map(lambda k: _level_log(spec, k, lo, log_kernels, log_q), ks, threads)
        levels.extend(results)
        K = ks[-1]
        if hi is not None:
            continue
        if exact:
            for r in results:
                accum_total += r.total
        if zc is not None:
            s = to_mpf(accum_total) if not isinstance(zc, (int, Fraction)) else accum_total
            residual = 1 - s / zc
            if residual < eps:
                total = zc
                break
        else:
            log_tail = _tail_bound(spec, K, lo)
            if exact:
                log_s = math.log(accum_total) if accum_total > 0 else -math.inf
            else:
                top, s = _log_total(levels)
                log_s = top + math.log(s)
            if log_tail < math.log(eps) + log_s:
                if exact:
                    t = Fraction(math.exp(log_tail))
                    total = accum_total + t
                    residual = t / total
                else:
                    total = ("log", log_tail)
                break
    return levels, K, total, residual


def _log_total(levels):
    top = max((r.total[0] for r in levels if r.total is not None), default=0.0)
    s = math.fsum(r.total[1] * math.exp(r.total[0] - top) for r in levels if r.total is not None)
    return top, s


@lru_cache(maxsize=64)
def _all_marginals_cached(spec, eps, budget, threads):
    n, lo = spec.n, spec.support_lower
    levels, K, total, residual = _enumerate(spec, eps, budget, threads)
    visited = sum(r.count for r in levels)
    meta = {"window_upper": K, "tuples": visited}
    out = []
    if spec.exact:
        for i in range(n):
            xlo, xhi = lo + i, K - (n - 1 - i)
            acc = {}
            for r in levels:
                for x, v in r.sums[i].items():
                    acc[x] = acc.get(x, 0) + v
            weights = tuple(Fraction(acc.get(x, 0)) for x in range(xlo, xhi + 1))
            out.append(Pmf(xlo, weights, total=total, residual=residual, exact=True,
                           meta=dict(meta)))
        return tuple(out)
    top, s = _log_total(levels)
    log_err = max(r.log_err for r in levels)
    count = max(visited, 1)
    rel = math.expm1(log_err) + 4 * count * _U + 1e-15
    tail_scaled = None
    if isinstance(total, tuple):
        tail_scaled = math.exp(total[1] - top)
    for i in range(n):
        xlo, xhi = lo + i, K - (n - 1 - i)
        acc = {}
        for r in levels:
            for x, (t, v) in r.sums[i].items():
                acc[x] = acc.get(x, 0.0) + v * math.exp(t - top)
        weights = tuple(acc.get(x, 0.0) for x in range(xlo, xhi + 1))
        norm = res = None
        if tail_scaled is not None:
            norm = math.fsum(weights) + tail_scaled
            res = tail_scaled / norm
        out.append(Pmf(xlo, weights, total=norm, residual=res if res is not None else 0.0,
                       exact=False, rel_err=rel, meta=dict(meta)))
    return tuple(out)


def all_marginals(spec: EnsembleSpec, eps: float = 1e-12, budget: int = TUPLE_BUDGET,
                  threads: int | None = None) -> tuple:
    """Marginal pmfs of ``h_1, ..., h_n`` from a single enumeration."""
    return _all_marginals_cached(spec, float(eps), int(budget), threads)


def marginal_pmf(spec: EnsembleSpec, i: int, eps: float = 1e-12, budget: int = TUPLE_BUDGET,
                 threads: int | None = None) -> Pmf:
    """Law of ``h_i`` (1-based) with certified truncation residual below ``eps``.

    Bounded supports are enumerated completely (residual 0). Infinite
    supports grow the window level by level in ``h_n`` until the discarded
    mass is below ``eps``; it is measured exactly against a closed-form
    normalizer when one exists and otherwise bounded by
    ``Q(K-lo)**(n(n-1)/2) w(K) (sum w)**(n-1)/(n-1)!`` summed geometrically.
    """
    if not 1 <= i <= spec.n:
        raise DomainError(f"particle index must be in 1..{spec.n}")
    return all_marginals(spec, eps, budget, threads)[i - 1]


def level_mass(spec: EnsembleSpec, i: int, k: int, box: tuple[int, int] | None = None):
    """Kernel mass ``t(k)`` of ``{h_i = k}``, restricted to a box when given."""
    lo = spec.support_lower if box is None else max(box[0], spec.support_lower)
    hi = spec.support_upper if box is None else box[1]
    if hi is None:
        raise DomainError("level_mass needs a bounded window")
    return sum(_kernel_weight(spec, h) for h in _level_set(spec.n, i, k, lo, hi))


def _level_set(n, i, k, lo, hi):
    # strictly increasing x in [lo, hi]^n with x_i = k
    if not lo + i - 1 <= k <= hi - (n - i):
        return
    for below in itertools.combinations(range(lo, k), i - 1):
        for above in itertools.combinations(range(k + 1, hi + 1), n - i):
            yield below + (k,) + above


# --- HKS verification ----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class BoxTable:
    """Nonnegative function on the integer box ``lower + [0, shape)``, zero outside."""

    lower: tuple
    values: np.ndarray

    @classmethod
    def from_points(cls, points: dict, lower=None, upper=None) -> "BoxTable":
        pts = list(points)
        d = len(pts[0]) if pts else len(lower)
        lo = tuple(lower) if lower is not None else tuple(min(p[a] for p in pts) for a in range(d))
        hi = tuple(upper) if upper is not None else tuple(max(p[a] for p in pts) for a in range(d))
        shape = tuple(b - a + 1 for a, b in zip(lo, hi))
        arr = np.zeros(shape, dtype=object)
        for p, v in points.items():
            arr[tuple(x - a for x, a in zip(p, lo))] = v
        return cls(lo, arr)

    @classmethod
    def from_sequence(cls, values: Sequence, offset: int = 0) -> "BoxTable":
        arr = np.empty(len(values), dtype=object)
        for i, v in enumerate(values):
            arr[i] = v
        return cls((offset,), arr)

    @property
    def dim(self):
        return len(self.lower)

    def __call__(self, point) -> object:
        idx = tuple(x - a for x, a in zip(point, self.lower))
        if any(i < 0 or i >= s for i, s in zip(idx, self.values.shape)):
            return 0
        return self.values[idx]

    def support(self):
        for idx in zip(*np.nonzero(self.values != 0)):
            yield tuple(int(i) + a for i, a in zip(idx, self.lower))

    def total(self):
        return sum(self.values.ravel().tolist())


def _floor_ceil(x, y, s):
    a = tuple(math.floor(s * xi + (1 - s) * yi) for xi, yi in zip(x, y))
    b = tuple(math.ceil((1 - s) * xi + s * yi) for xi, yi in zip(x, y))
    return a, b


def hks_verify(f: BoxTable, g: BoxTable, h: BoxTable, k: BoxTable, s=Fraction(1, 2)):
    """Check ``f(x) g(y) <= h(floor(sx+(1-s)y)) k(ceil((1-s)x+sy))`` on the box.

    Returns ``(pointwise_ok, sum_ok, witness)`` where ``witness`` is the first
    violating pair ``(x, y)`` or None; ``sum_ok`` compares
    ``sum f * sum g`` with ``sum h * sum k``.
    """
    s = Fraction(s)
    if not 0 <= s <= 1:
        raise DomainError("s must lie in [0, 1]")
    witness = None
    g_supp = [(y, g(y)) for y in g.support()]
    for x in f.support():
        fx = f(x)
        for y, gy in g_supp:
            a, b = _floor_ceil(x, y, s)
            if fx * gy > h(a) * k(b):
                witness = (x, y)
                break
        if witness is not None:
            break
    sum_ok = f.total() * g.total() <= h.total() * k.total()
    return witness is None, bool(sum_ok), witness


def build_proof_functions(spec: EnsembleSpec, i: int, k: int, box: tuple[int, int],
                          max_cells: int = 2_000_000):
    """Tables ``(f, g, h)`` supported on the level sets ``S_{k-1}, S_{k+1}, S_k``.

    ``S_k`` is the set of strictly increasing tuples in ``box**n`` with
    ``x_i = k``; each table carries the ensemble kernel there. The common
    per-particle constant (e.g. ``e**-alpha`` for Charlier) is dropped since it
    scales both sides of every inequality equally.
    """
    n = spec.n
    if not 1 <= i <= n:
        raise DomainError(f"particle index must be in 1..{n}")
    lo = max(box[0], spec.support_lower)
    hi = box[1] if spec.support_upper is None else min(box[1], spec.support_upper)
    if (hi - lo + 1) ** n > max_cells:
        raise ResourceError(f"box of {(hi - lo + 1) ** n} cells exceeds {max_cells}")
    bounds = dict(lower=(lo,) * n, upper=(hi,) * n)

    def table(level):
        pts = {x: _kernel_weight(spec, x) for x in _level_set(n, i, level, lo, hi)}
        return BoxTable.from_points(pts, **bounds)

    return table(k - 1), table(k + 1), table(k)


def midpoints_in_level(x: Sequence[int], y: Sequence[int], i: int, k: int) -> bool:
    """Whether floor and ceil of ``(x+y)/2`` are strictly increasing with i-th entry k."""
    a, b = _floor_ceil(x, y, Fraction(1, 2))
    ok = all(u < v for u, v in zip(a, a[1:])) and all(u < v for u, v in zip(b, b[1:]))
    return ok and a[i - 1] == k and b[i - 1] == k


# --- discrete beta ensembles ---------------------------------------------------

def discrete_beta_lambda1_pmf(n: int, m, theta, w, eps: float = 1e-12,
                              max_lambda1: int | None = None,
                              budget: int = TUPLE_BUDGET) -> Pmf:
    """Law of ``lambda_1`` for the ensemble on ``lambda_1 >= ... >= lambda_n >= 0`` with mass
    ``prod_{i<j} Q_theta(lambda_i - lambda_j + (j-i) theta) prod_j w(lambda_j + (n-j) theta)``.

    ``m`` bounds ``lambda_1 <= m + (n-1) theta``; ``m = math.inf`` needs ``w`` to be a
    :class:`GeometricPower` so the tail can be certified. ``w`` may otherwise be
    any positive callable of a real argument.
    """
    if n < 1:
        raise DomainError("n must be positive")
    th = float(theta)
    if th <= 0:
        raise DomainError("theta must be positive")
    geometric = isinstance(w, GeometricPower)
    if geometric:
        logq = math.log(float(w.q))

        def log_w(x):
            return x * logq
    else:
        def log_w(x):
            v = w(x)
            if not v > 0:
                raise DomainError(f"weight must be positive, w({x}) = {v}")
            return math.log(v)

    infinite = m is None or math.isinf(float(m))
    if infinite and not geometric and max_lambda1 is None:
        raise DomainError("m = inf needs a GeometricPower weight or an explicit max_lambda1")
    support_cap = None if infinite else math.floor(float(m) + (n - 1) * th + 1e-12)
    if support_cap is not None and support_cap < 0:
        raise DomainError("m must be nonnegative")
    npairs = n * (n - 1) // 2
    tt = _exact_theta(theta)

    def log_weight(lam):
        t = [log_qtheta(lam[a] - lam[b] + (b - a) * tt, tt)
             for a in range(n) for b in range(a + 1, n)]
        t += [log_w(lam[j] + (n - 1 - j) * th) for j in range(n)]
        return math.fsum(t), math.fsum(abs(v) for v in t)

    def log_tail(L):
        # lambda_1 > L: every Q factor is at most Q_theta(lambda_1 + (n-1) theta) and the
        # remaining rows sum geometrically
        def log_a(x):
            lq = npairs * log_qtheta(x + (n - 1) * tt, tt) if n > 1 else 0.0
            return lq + log_w(x + (n - 1) * th)
        la1, la2 = log_a(L + 1), log_a(L + 2)
        if la2 >= la1:
            return math.inf
        rest = sum(log_w((n - 1 - j) * th) - math.log1p(-float(w.q)) for j in range(1, n))
        return la1 + rest - math.log1p(-math.exp(la2 - la1)) + 1e-9

    logs: list[list[float]] = []
    err = 0.0
    visited = 0
    residual = 0.0
    L = -1
    while True:
        L += 1
        if support_cap is not None and L > support_cap:
            L -= 1
            break
        level = []
        for rest in itertools.combinations_with_replacement(range(L, -1, -1), n - 1):
            visited += 1
            if visited > budget:
                raise ResourceError(f"enumeration exceeded {budget} configurations")
            lw, mag = log_weight((L,) + rest)
            level.append(lw)
            err = max(err, (2 * npairs + 2 * n + 2) * _U * mag)
        logs.append(level)
        reached_cap = max_lambda1 is not None and L >= max_lambda1
        if support_cap is not None and not reached_cap:
            continue
        if not geometric or not infinite:
            if reached_cap and (support_cap is None or L < support_cap):
                residual = math.nan  # truncated without a certificate
            if reached_cap:
                break
            continue
        top = max(max(v) for v in logs)
        s = math.fsum(math.exp(x - top) for v in logs for x in v)
        t = math.exp(log_tail(L) - top)
        if t < eps * s or reached_cap:
            residual = t / (s + t)
            break
    top = max(max(v) for v in logs)
    weights = tuple(math.fsum(math.exp(x - top) for x in v) for v in logs)
    s = math.fsum(weights)
    total = s / (1 - residual) if residual and not math.isnan(residual) else None
    rel = math.expm1(err) + 4 * visited * _U
    return Pmf(0, weights, total=total, residual=residual, exact=False, rel_err=rel,
               meta={"window_upper": L, "configurations": visited})


def _exact_theta(theta):
    return theta if isinstance(theta, Fraction) else (
        Fraction(theta) if isinstance(theta, int) else float(theta))


# --- Poisson concentration -----------------------------------------------------

def _a(u):
    if u == 0:
        return mpmath.mpf(1)
    if u == -1:
        return mpmath.mpf(2)
    return 2 * ((1 + u) * mpmath.log1p(u) - u) / u ** 2


@dataclass(frozen=True)
class ConcentrationReport:
    mean: object
    variance: object
    variance_ok: bool
    upper_ok: bool
    lower_ok: bool
    worst_upper: float
    worst_lower: float

    @property
    def holds(self) -> bool:
        return self.variance_ok and self.upper_ok and self.lower_ok

    def to_dict(self):
        return {"mean": str(self.mean), "variance": str(self.variance),
                "variance_ok": self.variance_ok, "upper_ok": self.upper_ok,
                "lower_ok": self.lower_ok, "worst_upper": self.worst_upper,
                "worst_lower": self.worst_lower, "holds": self.holds}


def poisson_concentration_check(p: Pmf, slack: float = 1e-12) -> ConcentrationReport:
    """Evaluate the three Poisson-type concentration bounds on ``p``.

    Tail events are step functions of ``t`` while the bounds decrease in ``t``,
    so each bound is checked at the worst ``t`` of every step. Ratios
    ``P / bound`` are reported; a ratio above ``1 + slack`` is a failure.
    """
    masses = p.conditional()
    ks = list(p.support)
    mean, var = p.moments()
    variance_ok = var <= mean
    with mpmath.workdps(40):
        mu = to_mpf(mean)
        pm = [to_mpf(v) for v in masses]
        worst_up = 0.0
        tail = mpmath.mpf(0)
        for k, v in reversed(list(zip(ks, pm))):
            tail += v
            if k > mu:
                t = k - mu
                bound = mpmath.exp(-t ** 2 / (2 * mu) * _a(t / mu))
                worst_up = max(worst_up, float(tail / bound))
        worst_low = 0.0
        cdf = mpmath.mpf(0)
        for k, v in zip(ks, pm):
            cdf += v
            if k < mu:
                t = max(mpmath.mpf(0), mu - k - 1)
                bound = mpmath.exp(-t ** 2 / (2 * mu) * _a(-t / mu))
                worst_low = max(worst_low, float(cdf / bound))
    return ConcentrationReport(mean, var, bool(variance_ok), worst_up <= 1 + slack,
                               worst_low <= 1 + slack, worst_up, worst_low)
