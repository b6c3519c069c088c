"""Last-passage percolation on the n x n grid with geometric or exponential weights.

The passage time is ``G = max over up/right paths from (1,1) to (n,n) of the
sum of weights``. Variants:

``g2_iid``      i.i.d. Geo(1-q) weights
``g2_inhom``    independent Geo(1 - a_i b_j) weights
``g4``          ``w_ij = w_ji``, Geo(1-q) off the diagonal and Geo(1-sqrt q) on it
``g1``          ``w_ij = w_{n+1-j, n+1-i}`` (mirror in the anti-diagonal), Geo(1-q)
                for ``i+j <= n`` and Geo(1-sqrt q) on the fixed cells ``i+j = n+1``
``g1_point``    the point reflection ``w_ij = w_{n+1-i, n+1-j}`` with the same
                parameters; kept for comparison, it is not log-concave at n = 2
``exponential`` independent Exp(rate_ij) weights
"""
from __future__ import annotations

import json
import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from ._errors import DomainError, ResourceError
from ._parallel import ordered_map
from .discrete_gas import EnsembleSpec, Meixner, marginal_pmf
from .pmf import Pmf

VARIANTS = ("g2_iid", "g2_inhom", "g1", "g1_point", "g4", "exponential")
CHUNK = 4096


@dataclass(frozen=True)
class LppSpec:
    n: int
    variant: str = "g2_iid"
    q: float | None = None
    a: tuple | None = None
    b: tuple | None = None
    rates: object = 1.0
    seed: int = 0

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2 ** 64:
            raise DomainError("seed must be a 64-bit unsigned integer")
        if self.n < 1:
            raise DomainError("n must be positive")
        if self.variant not in VARIANTS:
            raise DomainError(f"variant must be one of {VARIANTS}")
        if self.variant in ("g2_iid", "g1", "g1_point", "g4"):
            if self.q is None or not 0 < float(self.q) < 1:
                raise DomainError("q must lie in (0, 1)")
        if self.variant == "g2_inhom":
            if self.a is None or self.b is None or len(self.a) != self.n or len(self.b) != self.n:
                raise DomainError("g2_inhom needs a and b of length n")
            prod = np.outer(np.asarray(self.a, float), np.asarray(self.b, float))
            if not np.all((prod > 0) & (prod < 1)):
                raise DomainError("need 0 < a_i b_j < 1 for all pairs")
            object.__setattr__(self, "a", tuple(self.a))
            object.__setattr__(self, "b", tuple(self.b))
        if self.variant == "exponential":
            r = np.broadcast_to(np.asarray(self.rates, float), (self.n, self.n))
            if not np.all(r > 0):
                raise DomainError("rates must be positive")
            if not np.isscalar(self.rates):
                object.__setattr__(self, "rates", tuple(map(tuple, r.tolist())))

    def parameter_matrix(self) -> np.ndarray:
        """Per-cell geometric parameter ``q_ij`` (or rate for the exponential variant)."""
        n = self.n
        i, j = np.indices((n, n))
        if self.variant == "g2_iid":
            return np.full((n, n), float(self.q))
        if self.variant == "g2_inhom":
            return np.outer(np.asarray(self.a, float), np.asarray(self.b, float))
        if self.variant == "g4":
            return np.where(i == j, math.sqrt(float(self.q)), float(self.q))
        if self.variant in ("g1", "g1_point"):
            return np.where(i + j == n - 1, math.sqrt(float(self.q)), float(self.q))
        return np.broadcast_to(np.asarray(self.rates, float), (n, n)).copy()

    def to_dict(self) -> dict:
        out = {"n": self.n, "variant": self.variant, "seed": self.seed}
        for k in ("q", "a", "b"):
            v = getattr(self, k)
            if v is not None:
                out[k] = v if not isinstance(v, tuple) else list(v)
        if self.variant == "exponential":
            out["rates"] = self.rates if np.isscalar(self.rates) else [list(r) for r in self.rates]
        return out


@dataclass(frozen=True, eq=False)
class SampleBatch:
    values: np.ndarray
    spec: object
    count: int
    seed: int
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.values) != self.count:
            raise ValueError("count must equal the number of values")

    def empirical_pmf(self) -> Pmf:
        vals = np.asarray(self.values)
        if not np.issubdtype(vals.dtype, np.integer):
            raise TypeError("empirical pmf needs integer samples")
        lo = int(vals.min())
        counts = np.bincount(vals - lo)
        return Pmf(lo, tuple(Fraction(int(c), self.count) for c in counts), total=Fraction(1))

    def to_csv(self) -> str:
        spec = self.spec.to_dict() if hasattr(self.spec, "to_dict") else self.spec
        header = "# " + json.dumps(spec, sort_keys=True) + "\n"
        return header + "".join(f"{v}\n" for v in np.asarray(self.values).tolist())

    def summary(self) -> dict:
        vals = np.asarray(self.values)
        out = {"count": self.count, "seed": self.seed, "min": vals.min().item(),
               "max": vals.max().item(), "mean": float(vals.mean())}
        if np.issubdtype(vals.dtype, np.integer):
            lo = int(vals.min())
            counts = np.bincount(vals - lo)
            out["pmf"] = {str(lo + k): int(c) for k, c in enumerate(counts) if c}
        return out


def _chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), int(chunk)])))


def _symmetrize(w: np.ndarray, variant: str, n: int) -> np.ndarray:
    i, j = np.indices((n, n))
    if variant == "g4":
        keep = i <= j
        return np.where(keep, w, np.swapaxes(w, -1, -2))
    if variant == "g1":
        return np.where(i + j <= n - 1, w, np.swapaxes(w[..., ::-1, ::-1], -1, -2))
    if variant == "g1_point":
        keep = (i + j < n - 1) | ((i + j == n - 1) & (i <= j))
        return np.where(keep, w, w[..., ::-1, ::-1])
    return w


def _passage(w: np.ndarray) -> np.ndarray:
    # w has shape (m, n, n); dynamic programming along rows
    m, n, _ = w.shape
    prev = np.zeros((m, n), dtype=w.dtype)
    for i in range(n):
        cur = np.empty_like(prev)
        cur[:, 0] = prev[:, 0] + w[:, i, 0]
        for j in range(1, n):
            cur[:, j] = np.maximum(prev[:, j], cur[:, j - 1]) + w[:, i, j]
        prev = cur
    return prev[:, -1]


def _sample_chunk(spec: LppSpec, seed: int, chunk: int, size: int) -> np.ndarray:
    rng = _chunk_rng(seed, chunk)
    n = spec.n
    u = 1.0 - rng.random((size, n, n))  # in (0, 1]
    par = spec.parameter_matrix()
    if spec.variant == "exponential":
        w = -np.log(u) / par
    else:
        w = np.floor(np.log(u) / np.log(par)).astype(np.int64)
    return _passage(_symmetrize(w, spec.variant, n))


def sample_passage(spec: LppSpec, count: int, seed: int | None = None,
                   threads: int | None = None) -> SampleBatch:
    """``count`` independent passage times; identical for any thread count.

    ``seed`` defaults to ``spec.seed``.

    Samples are produced in fixed chunks of 4096, chunk ``c`` drawing from
    the stream ``PCG64(SeedSequence([seed, c]))``. Geometric weights use
    inversion, ``floor(log U / log q)``.
    """
    if count < 0:
        raise DomainError("count must be nonnegative")
    seed = spec.seed if seed is None else int(seed)
    chunks = [(c, min(CHUNK, count - c * CHUNK)) for c in range((count + CHUNK - 1) // CHUNK)]
    parts = ordered_map(lambda cs: _sample_chunk(spec, seed, cs[0], cs[1]), chunks, threads)
    dtype = float if spec.variant == "exponential" else np.int64
    values = np.concatenate(parts) if parts else np.zeros(0, dtype=dtype)
    return SampleBatch(values, spec, count, seed)


# --- exact oracle ----------------------------------------------------------------

def _negbin_cutoff(r: int, q: Fraction, eps: float) -> int:
    # smallest g with P(NegBin(r, 1-q) > g) < eps; bounds G from above
    p = (1 - q) ** r
    cdf, g = p, 0
    while 1 - cdf >= eps:
        g += 1
        p = p * q * (g + r - 1) / g
        cdf += p
    return g


def exact_g2_pmf_small(n: int, q, eps: float = 1e-12, g_max: int | None = None,
                       max_states: int = 3_000_000) -> Pmf:
    """Exact law of the i.i.d. geometric passage time for ``n <= 3``.

    The joint law of the current passage-time profile is propagated cell by
    cell in row-major order. Profiles with any entry above ``g_max`` are
    dropped, which loses only mass with ``G > g_max``, so every reported mass
    ``P(G = g)``, ``g <= g_max``, is exact. Without ``g_max`` the cutoff is the
    first ``g`` with ``P(sum of all weights > g) < eps``.
    """
    if n not in (1, 2, 3):
        raise DomainError("exact oracle supports n in {1, 2, 3}")
    q = Fraction(q)
    if not 0 < q < 1:
        raise DomainError("q must lie in (0, 1)")
    G = _negbin_cutoff(n * n, q, eps) if g_max is None else int(g_max)
    a, b = q.numerator, q.denominator
    bpow = [b ** v for v in range(G + 1)]
    states = {(0,) * n: 1}
    for i in range(n):
        for c in range(n):
            groups = defaultdict(dict)
            for s, mass in states.items():
                key = s[:c] + s[c + 1:]
                base = max(s[c], s[c - 1]) if c else s[c]
                grp = groups[key]
                grp[base] = grp.get(base, 0) + mass
            new = {}
            for key, M in groups.items():
                acc = 0
                for v in range(min(M), G + 1):
                    acc = a * acc + bpow[v] * M.get(v, 0)
                    if acc:
                        # scaled mass of value v: (b-a) b**(G-v) * sum_base M a**(v-base) b**base
                        new[key[:c] + (v,) + key[c:]] = (b - a) * bpow[G - v] * acc
            states = new
            if len(states) > max_states:
                raise ResourceError(f"profile DP exceeded {max_states} states")
    scale = b ** ((G + 1) * n * n)
    masses = [0] * (G + 1)
    for s, mass in states.items():
        masses[s[-1]] += mass
    weights = tuple(Fraction(m, scale) for m in masses)
    residual = 1 - sum(weights)
    return Pmf(0, weights, total=Fraction(1), residual=residual, exact=True, meta={"g_max": G})


def convolution_pmf(ps: Sequence, eps: float = 1e-15) -> Pmf:
    """Exact law of a sum of independent Geo(1 - p) variables, truncated at mass eps."""
    ps = [Fraction(p) for p in ps]
    G = 0
    while True:
        G += 1
        # crude but safe cutoff: union bound on each summand exceeding G / len
        if sum(float(p) ** (G // len(ps) + 1) for p in ps) < eps:
            break
    pmf = [Fraction(1)] + [Fraction(0)] * G
    for p in ps:
        geo = [(1 - p) * p ** k for k in range(G + 1)]
        pmf = [sum(pmf[j] * geo[k - j] for j in range(k + 1)) for k in range(G + 1)]
    return Pmf(0, tuple(pmf), total=Fraction(1), residual=1 - sum(pmf))


# --- cross-checks ----------------------------------------------------------------

@dataclass(frozen=True)
class CrosscheckReport:
    n: int
    q: object
    shift: int
    max_gap: object
    exact: bool
    residuals: tuple
    ok: bool

    def to_dict(self):
        return {"n": self.n, "q": str(self.q), "shift": self.shift,
                "max_gap": str(self.max_gap), "exact": self.exact,
                "residuals": [str(r) for r in self.residuals], "ok": self.ok}


def meixner_crosscheck(n: int, q, eps: float = 1e-12, tol: float = 1e-10,
                       samples: int = 100_000, seed: int = 0) -> CrosscheckReport:
    """Compare the passage-time law with ``h_n - (n-1)`` of the Meixner ensemble (m = n).

    For ``n <= 3`` both sides are exact and the largest pointwise gap over the
    common window is reported. For larger ``n`` the passage time is sampled and
    the gap is judged against three binomial standard errors.
    """
    q = Fraction(q)
    h = marginal_pmf(EnsembleSpec(n, Meixner(n, q)), n, eps=eps).shifted(-(n - 1))
    if n <= 3:
        g = exact_g2_pmf_small(n, q, eps)
        hi = min(g.offset + len(g), h.offset + len(h))
        gap = max(abs(g.mass(k) - h.mass(k)) for k in range(0, hi))
        return CrosscheckReport(n, q, n - 1, gap, True, (g.residual, h.residual), gap < tol)
    batch = sample_passage(LppSpec(n, "g2_iid", float(q)), samples, seed)
    emp = batch.empirical_pmf()
    hi = max(emp.offset + len(emp), h.offset + len(h))
    worst, ok = 0.0, True
    for k in range(0, hi):
        p = float(h.mass(k))
        diff = abs(float(emp.mass(k)) - p)
        worst = max(worst, diff)
        if diff > 3 * math.sqrt(max(p * (1 - p), 1e-12) / samples) + 1.0 / samples:
            ok = False
    return CrosscheckReport(n, q, n - 1, worst, False, (0.0, h.residual), ok)


@dataclass(frozen=True)
class BandReport:
    ok: bool
    worst_z: float
    first_violation: int | None

    def to_dict(self):
        return {"ok": self.ok, "worst_z": self.worst_z, "first_violation": self.first_violation}


def empirical_logconcavity(batch_or_pmf, z: float = 3.0, min_count: int = 5) -> BandReport:
    """Log-concavity of an empirical pmf up to ``z`` multinomial standard errors.

    For ``f = p_k**2 - p_{k-1} p_{k+1}`` the delta-method variance under the
    multinomial law is ``g' Sigma g / N`` with gradient ``g``. Triples with a
    count below ``min_count`` are skipped, as the approximation fails there.
    """
    if isinstance(batch_or_pmf, SampleBatch):
        pmf, N = batch_or_pmf.empirical_pmf(), batch_or_pmf.count
    else:
        pmf, N = batch_or_pmf
    p = np.array([float(m) for m in pmf.masses])
    worst, first = math.inf, None
    for k in range(1, len(p) - 1):
        idx = [k - 1, k, k + 1]
        if min(p[idx]) * N < min_count:
            continue
        grad = np.array([-p[k + 1], 2 * p[k], -p[k - 1]])
        pk = p[idx]
        cov = (np.diag(pk) - np.outer(pk, pk)) / N
        sd = math.sqrt(max(float(grad @ cov @ grad), 0.0))
        f = p[k] ** 2 - p[k - 1] * p[k + 1]
        zk = f / sd if sd > 0 else (math.inf if f >= 0 else -math.inf)
        worst = min(worst, zk)
        if zk < -z and first is None:
            first = pmf.offset + k
    return BandReport(first is None, float(worst) if worst < math.inf else 0.0, first)


def band_check(batch: SampleBatch, exact: Pmf, z: float = 3.0, min_expected: float = 5.0) -> BandReport:
    """Whether every empirical mass lies within ``z`` binomial errors of ``exact``.

    Values whose expected count is below ``min_expected`` are pooled into one
    bin (reported at its smallest value) so the normal approximation holds;
    that bin also receives the exact mass lying outside the window.
    """
    emp = batch.empirical_pmf()
    N = batch.count
    lo = min(emp.offset, exact.offset)
    hi = max(emp.offset + len(emp), exact.offset + len(exact))
    bins, pooled_p, pooled_e, pooled_at = [], 0.0, 0.0, None
    for k in range(lo, hi):
        p, e = float(exact.mass(k)), float(emp.mass(k))
        if N * p >= min_expected:
            bins.append((k, p, e))
        else:
            pooled_p += p
            pooled_e += e
            pooled_at = k if pooled_at is None else pooled_at
    # exact mass beyond the window belongs with the sparse values
    pooled_p += max(0.0, 1.0 - math.fsum(float(exact.mass(k)) for k in range(lo, hi)))
    if pooled_at is not None:
        bins.append((pooled_at, pooled_p, pooled_e))
    worst, first = 0.0, None
    for k, p, e in bins:
        sd = math.sqrt(p * (1 - p) / N)
        diff = abs(e - p)
        zk = diff / sd if sd > 0 else (0.0 if diff == 0 else math.inf)
        worst = max(worst, zk)
        if zk > z and first is None:
            first = k
    return BandReport(first is None, float(worst), first)


def exponential_limit_qq(n: int, epsilons: Sequence[float], count: int = 20000,
                         seed: int = 0, probs: Sequence[float] = tuple(np.linspace(0.05, 0.95, 19))):
    """Largest quantile gap between ``eps * G(Geo(1 - e**-eps))`` and the rate-1
    exponential passage time, for each ``eps``."""
    ref = np.quantile(sample_passage(LppSpec(n, "exponential", rates=1.0), count, seed).values, probs)
    out = []
    for k, e in enumerate(epsilons):
        batch = sample_passage(LppSpec(n, "g2_iid", math.exp(-e)), count, seed + 1 + k)
        out.append(float(np.max(np.abs(e * np.quantile(batch.values, probs) - ref))))
    return out
