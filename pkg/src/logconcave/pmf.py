"""Probability mass functions on windows of Z and log-concavity verdicts.

A :class:`Pmf` stores *unnormalized* nonnegative weights on a contiguous
window together with the normalizing constant of the full distribution.
Log-concavity is invariant under a common positive factor, so verdicts are
computed from the weights alone and stay exact whenever the weights are
rational, even if the normalizer (e.g. ``e**alpha``) is not.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import mpmath

_EXACT = (int, Fraction)


def to_fraction(v) -> Fraction:
    """Exact rational value of an int, Fraction, float, mpmath or gmpy2 number."""
    if isinstance(v, _EXACT):
        return Fraction(v)
    if isinstance(v, float):
        return Fraction(v)
    if isinstance(v, mpmath.mpf):
        man, exp = v.man_exp
        return Fraction(int(man)) * Fraction(2) ** int(exp)
    if hasattr(v, "as_integer_ratio"):
        return Fraction(*v.as_integer_ratio())
    raise TypeError(f"cannot convert {type(v).__name__} to Fraction")


def to_mpf(v):
    if isinstance(v, mpmath.mpf):
        return v
    if isinstance(v, Fraction):
        return mpmath.mpf(v.numerator) / v.denominator
    if isinstance(v, (int, float)):
        return mpmath.mpf(v)
    return mpmath.mpf(to_fraction(v).numerator) / to_fraction(v).denominator


@dataclass(frozen=True, eq=False)
class Pmf:
    """Distribution on the window ``offset, offset+1, ...`` of Z.

    ``weights`` are proportional to the probabilities; the probability of
    ``offset + k`` is ``weights[k] / total``. ``residual`` bounds the mass
    outside the window. ``rel_err`` bounds the relative error of every stored
    weight (zero for exact rational payloads).
    """

    offset: int
    weights: tuple
    total: object = None
    residual: object = 0
    exact: bool = True
    rel_err: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(self.weights))
        if any(w < 0 for w in self.weights):
            raise ValueError("weights must be nonnegative")
        if self.exact and not all(isinstance(w, _EXACT) for w in self.weights):
            raise ValueError("exact Pmf requires int/Fraction weights")
        if self.rel_err < 0:
            raise ValueError("rel_err must be nonnegative")

    @classmethod
    def from_masses(cls, masses: Sequence, offset: int = 0, **kw) -> "Pmf":
        exact = all(isinstance(m, _EXACT) for m in masses)
        masses = tuple(Fraction(m) if exact else m for m in masses)
        kw.setdefault("exact", exact)
        return cls(offset, masses, **kw)

    def __len__(self):
        return len(self.weights)

    @property
    def support(self) -> range:
        return range(self.offset, self.offset + len(self.weights))

    @property
    def norm(self):
        return sum(self.weights) if self.total is None else self.total

    @property
    def masses(self) -> tuple:
        z = self.norm
        if z == 0:
            raise ZeroDivisionError("Pmf has zero total mass")
        if isinstance(z, _EXACT) and self.exact:
            return tuple(Fraction(w) / z for w in self.weights)
        z = to_mpf(z)
        return tuple(to_mpf(w) / z for w in self.weights)

    def mass(self, k: int):
        i = k - self.offset
        if 0 <= i < len(self.weights):
            return self.masses[i]
        return 0

    def conditional(self) -> tuple:
        """Masses renormalized to the window (the law conditioned on it)."""
        s = sum(self.weights)
        if self.exact:
            return tuple(Fraction(w) / s for w in self.weights)
        s = to_mpf(s)
        return tuple(to_mpf(w) / s for w in self.weights)

    def normalization_gap(self):
        """``1 - (sum of masses + residual)``; within [0, eps] for a valid Pmf."""
        return 1 - (sum(self.masses) + self.residual)

    def shifted(self, by: int) -> "Pmf":
        return Pmf(self.offset + by, self.weights, self.total, self.residual,
                   self.exact, self.rel_err, dict(self.meta))

    def trimmed(self) -> "Pmf":
        """Drop leading and trailing zero weights."""
        nz = [i for i, w in enumerate(self.weights) if w != 0]
        if not nz:
            return self
        lo, hi = nz[0], nz[-1]
        return Pmf(self.offset + lo, self.weights[lo:hi + 1], self.total, self.residual,
                   self.exact, self.rel_err, dict(self.meta))

    def moments(self) -> tuple:
        """Mean and variance of the window-conditioned law."""
        p = self.conditional()
        ks = list(self.support)
        mean = sum(k * m for k, m in zip(ks, p))
        var = sum((k - mean) ** 2 * m for k, m in zip(ks, p))
        return mean, var

    def to_dict(self, digits: int = 30) -> dict:
        if self.exact and (self.total is None or isinstance(self.total, _EXACT)):
            masses = [_fraction_str(m) for m in self.masses]
        else:
            masses = [mpmath.nstr(m, digits) for m in self.masses]
        out = {
            "offset": self.offset,
            "masses": masses,
            "residual": _number_str(self.residual, digits),
            "exact": self.exact,
        }
        if self.rel_err:
            out["rel_err"] = repr(float(self.rel_err))
        if self.meta:
            out["meta"] = {k: _jsonable(v, digits) for k, v in sorted(self.meta.items())}
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "Pmf":
        masses = [_parse_number(m) for m in data["masses"]]
        exact = bool(data.get("exact", all(isinstance(m, Fraction) for m in masses)))
        if exact and not all(isinstance(m, Fraction) for m in masses):
            exact = False
        return cls(int(data.get("offset", 0)), tuple(masses),
                   residual=_parse_number(data.get("residual", "0")),
                   exact=exact, rel_err=float(data.get("rel_err", 0.0)))


def _fraction_str(v: Fraction) -> str:
    v = Fraction(v)
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def _number_str(v, digits):
    if isinstance(v, _EXACT):
        return _fraction_str(v)
    if isinstance(v, float):
        return repr(v)
    return mpmath.nstr(to_mpf(v), digits)


def _jsonable(v, digits):
    if isinstance(v, (bool, str)) or v is None:
        return v
    if isinstance(v, int):
        return v
    if isinstance(v, (list, tuple)):
        return [_jsonable(x, digits) for x in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(x, digits) for k, x in v.items()}
    return _number_str(v, digits)


def _parse_number(s):
    if isinstance(s, (int, float)):
        return Fraction(s) if isinstance(s, int) else s
    s = str(s).strip()
    try:
        return Fraction(s)
    except ValueError:
        return mpmath.mpf(s)


# --- standard laws ---------------------------------------------------------------

def poisson_pmf(alpha, eps: float = 1e-15) -> Pmf:
    """Poisson law with rational weights ``alpha**k / k!`` and total ``e**alpha``."""
    a = Fraction(alpha)
    if a <= 0:
        raise ValueError("alpha must be positive")
    total = mpmath.exp(to_mpf(a))
    weights, term, k, acc = [], Fraction(1), 0, Fraction(0)
    while True:
        weights.append(term)
        acc += term
        tail = total - to_mpf(acc)
        if k > a and tail / total < eps:
            break
        k += 1
        term = term * a / k
    residual = 1 - to_mpf(acc) / total
    return Pmf(0, tuple(weights), total=total, residual=residual, exact=True)


def binomial_pmf(n: int, p) -> Pmf:
    p = Fraction(p)
    weights = tuple(math.comb(n, k) * p ** k * (1 - p) ** (n - k) for k in range(n + 1))
    return Pmf(0, weights, total=Fraction(1), residual=Fraction(0))


def geometric_pmf(q, eps: float = 1e-15) -> Pmf:
    """Law of the number of failures, ``P(k) = (1-q) q**k``."""
    q = Fraction(q)
    if not 0 < q < 1:
        raise ValueError("q must lie in (0, 1)")
    k = 0
    while float(q) ** (k + 1) >= eps:
        k += 1
    weights = tuple((1 - q) * q ** j for j in range(k + 1))
    return Pmf(0, weights, total=Fraction(1), residual=q ** (k + 1))


# --- log-concavity ---------------------------------------------------------------

@dataclass(frozen=True)
class LogConcavityReport:
    """Outcome of a log-concavity check.

    ``min_margin`` is the smallest ``p(k)**2 - p(k-1) p(k+1)`` in the scale of
    the weights that were checked; ``first_violation`` and ``internal_zero``
    are absolute indices.
    """

    verdict: str
    first_violation: int | None = None
    min_margin: object = None
    internal_zero: int | None = None
    mode: str = "plain"
    checked: int = 0

    def __post_init__(self):
        if self.verdict not in ("pass", "fail", "inconclusive"):
            raise ValueError(f"bad verdict {self.verdict!r}")
        failed = self.first_violation is not None or self.internal_zero is not None
        if (self.verdict == "fail") != failed:
            raise ValueError("verdict 'fail' must coincide with a recorded violation")

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_dict(self, digits: int = 30) -> dict:
        return {
            "verdict": self.verdict,
            "first_violation": self.first_violation,
            "min_margin": None if self.min_margin is None else _number_str(self.min_margin, digits),
            "internal_zero": self.internal_zero,
            "mode": self.mode,
            "checked": self.checked,
        }


def _scaled_weights(p: Pmf, mode) -> tuple[list, str]:
    ks = list(p.support)
    if mode in (None, "plain"):
        return list(p.weights), "plain"
    if mode == "ultra":
        if p.offset < 0:
            raise ValueError("ultra mode needs support in N")
        return [w * math.factorial(k) for w, k in zip(p.weights, ks)], "ultra"
    if callable(mode):
        out = []
        for w, k in zip(p.weights, ks):
            f = mode(k)
            if not f > 0:
                raise ValueError(f"scale function must be positive, got f({k}) = {f}")
            out.append(w * (Fraction(f) if isinstance(f, _EXACT) else to_fraction(f)))
        return out, "scaled"
    raise ValueError(f"unknown mode {mode!r}")


def check_logconcave(p, mode="plain", rel_err=None) -> LogConcavityReport:
    """Check ``p(k)**2 >= p(k-1) p(k+1)`` for all k and the absence of internal zeros.

    ``p`` is a :class:`Pmf` or a plain sequence of nonnegative numbers (indexed
    from 0). ``mode`` is ``"plain"``, ``"ultra"`` (weights times ``k!``) or a
    positive callable ``f`` (weights times ``f(k)``).

    Exact payloads always give ``pass`` or ``fail``. Inexact payloads with a
    relative error bound ``r`` fail only when a violation survives the worst
    case of that bound; otherwise an unresolved index yields ``inconclusive``.
    """
    if not isinstance(p, Pmf):
        p = Pmf.from_masses(list(p))
    weights, label = _scaled_weights(p, mode)
    exact = p.exact and all(isinstance(w, _EXACT) for w in weights)
    r = Fraction(0) if exact else to_fraction(p.rel_err if rel_err is None else rel_err)
    vals = [Fraction(w) if exact else to_fraction(w) for w in weights]
    off = p.offset

    nz = [i for i, v in enumerate(vals) if v != 0]
    if nz:
        for i in range(nz[0], nz[-1] + 1):
            if vals[i] == 0:
                return LogConcavityReport("fail", internal_zero=off + i, mode=label,
                                          checked=len(vals))

    lo_f, hi_f = (1 - r) ** 2, (1 + r) ** 2
    first_violation, undecided, min_margin = None, False, None
    for i in range(1, len(vals) - 1):
        a = vals[i] * vals[i]
        b = vals[i - 1] * vals[i + 1]
        margin = a - b
        if min_margin is None or margin < min_margin:
            min_margin = margin
        if r == 0:
            if margin < 0 and first_violation is None:
                first_violation = off + i
        elif a * hi_f < b * lo_f:
            if first_violation is None:
                first_violation = off + i
        elif a * lo_f < b * hi_f:
            undecided = True
    if min_margin is not None and not exact:
        min_margin = float(min_margin)
    if first_violation is not None:
        verdict = "fail"
    elif undecided:
        verdict = "inconclusive"
    else:
        verdict = "pass"
    return LogConcavityReport(verdict, first_violation, min_margin, None, label, len(vals))


def check_ultra_logconcave(p) -> LogConcavityReport:
    return check_logconcave(p, "ultra")


def total_variation(p: Pmf, q: Pmf) -> float:
    """Total-variation distance between the window masses of two pmfs (plus residuals)."""
    lo = min(p.offset, q.offset)
    hi = max(p.offset + len(p), q.offset + len(q))
    pm, qm = p.masses, q.masses

    def get(masses, off, k):
        i = k - off
        return float(masses[i]) if 0 <= i < len(masses) else 0.0

    diff = math.fsum(abs(get(pm, p.offset, k) - get(qm, q.offset, k)) for k in range(lo, hi))
    return 0.5 * (diff + float(p.residual) + float(q.residual))


# re-exported for typing convenience
ScaleFunction = Callable[[int], object]
