"""Schur measures ``P(lambda) = s_lambda(a) s_lambda(b) / Z`` with nonnegative parameters.

A common scale factor is kept separate: the measure with parameters
``(a, b, scale)`` gives ``lambda`` mass proportional to
``scale**|lambda| s_lambda(a) s_lambda(b)``, i.e. the specialization
``(sqrt(scale) a, sqrt(scale) b)``, which keeps square roots out of exact
computations.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import mpmath

from ._errors import DomainError, ResourceError
from .partitions import Partition, _raw_partitions, schur_eval
from .pmf import Pmf, to_mpf


def _num(v):
    if isinstance(v, (int, Fraction, str)):
        return Fraction(v)
    return float(v)


@dataclass(frozen=True)
class Specialization:
    """Nonnegative parameters ``a``, ``b`` and a common scale (``a_i b_j`` becomes
    ``scale * a_i b_j``)."""

    a: tuple
    b: tuple
    scale: object = 1

    def __post_init__(self):
        a = tuple(_num(v) for v in self.a)
        b = tuple(_num(v) for v in self.b)
        scale = _num(self.scale)
        if any(v < 0 for v in a + b) or scale <= 0:
            raise DomainError("specialization values must be nonnegative (scale positive)")
        if a and b and scale * max(a) * max(b) >= 1:
            raise DomainError("need scale * max(a) * max(b) < 1 for normalizability")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "scale", scale)

    @classmethod
    def symmetric_sqrt(cls, values: Sequence) -> "Specialization":
        """``a = b = (sqrt(v_1), ..., sqrt(v_p))``, represented without square roots
        when all values are equal."""
        vals = [_num(v) for v in values]
        if vals and all(v == vals[0] for v in vals):
            ones = (1,) * len(vals)
            return cls(ones, ones, vals[0]) if vals[0] > 0 else cls((0,), (0,))
        roots = tuple(math.sqrt(v) for v in vals)
        return cls(roots, roots)

    @property
    def exact(self) -> bool:
        return all(isinstance(v, Fraction) for v in self.a + self.b + (self.scale,))

    @property
    def max_length(self) -> int:
        return min(sum(1 for v in self.a if v > 0), sum(1 for v in self.b if v > 0))

    def normalizer(self):
        """``prod_{i,j} (1 - scale a_i b_j)**-1`` (Cauchy identity)."""
        if self.exact:
            z = Fraction(1)
            for x in self.a:
                for y in self.b:
                    z /= 1 - self.scale * x * y
            return z
        z = mpmath.mpf(1)
        for x in self.a:
            for y in self.b:
                z /= 1 - to_mpf(self.scale) * to_mpf(x) * to_mpf(y)
        return z

    def weight(self, lam: Sequence[int]):
        lam = Partition(lam)
        if len(lam) > self.max_length:
            return Fraction(0) if self.exact else 0.0
        w = schur_eval(lam, self.a) * schur_eval(lam, self.b)
        return w * self.scale ** lam.size


def schur_marginal_pmf(s: Specialization, i: int = 1, cutoff: int | None = None,
                       eps: float = 1e-12, max_cutoff: int = 80,
                       budget: int = 2_000_000) -> Pmf:
    """Law of ``lambda_i`` under the Schur measure, summing over ``|lambda| <= cutoff``.

    Without ``cutoff`` the size bound grows until ``1 - accumulated/Z < eps``.
    The residual is exactly ``1 - accumulated/Z``.
    """
    if i < 1:
        raise DomainError("row index must be positive")
    z = s.normalizer()
    ell = s.max_length
    weights: dict[int, object] = {}
    acc = 0
    visited = 0
    size = 0
    while True:
        if ell > 0 or size == 0:
            for lam in _raw_partitions(size, ell, size):
                visited += 1
                if visited > budget:
                    raise ResourceError(f"Schur marginal exceeded {budget} partitions")
                w = s.weight(lam)
                if w:
                    j = lam[i - 1] if i <= len(lam) else 0
                    weights[j] = weights.get(j, 0) + w
                    acc += w
        residual = 1 - acc / z if s.exact else 1 - to_mpf(acc) / z
        if cutoff is not None:
            if size >= cutoff:
                break
        elif residual < eps or ell == 0:
            break
        elif size >= max_cutoff:
            raise ResourceError(f"residual {float(residual):.3g} still above eps at size {size}")
        size += 1
    top = max(weights) if weights else 0
    w = tuple(weights.get(j, 0) for j in range(top + 1))
    return Pmf(0, w, total=z, residual=residual, exact=s.exact,
               rel_err=0.0 if s.exact else 1e-13, meta={"cutoff": size})


def _pad(lam, mu):
    n = max(len(lam), len(mu))
    return (list(lam) + [0] * (n - len(lam)), list(mu) + [0] * (n - len(mu)))


def midpoint_partitions(lam: Sequence[int], mu: Sequence[int]) -> tuple[Partition, Partition]:
    """Componentwise floor and ceiling of ``(lam + mu)/2`` (zero padded)."""
    x, y = _pad(Partition(lam), Partition(mu))
    theta = Partition([(u + v) // 2 for u, v in zip(x, y)])
    phi = Partition([(u + v + 1) // 2 for u, v in zip(x, y)])
    return theta, phi


@dataclass(frozen=True)
class OkounkovResult:
    lhs: object
    rhs: object
    ok: bool
    theta: Partition
    phi: Partition

    def to_dict(self):
        return {"lhs": str(self.lhs), "rhs": str(self.rhs), "ok": self.ok,
                "theta": list(self.theta), "phi": list(self.phi)}


def okounkov_check(lam: Sequence[int], mu: Sequence[int], a: Sequence) -> OkounkovResult:
    """Compare ``s_lam(a) s_mu(a)`` (lhs) with ``s_theta(a) s_phi(a)`` (rhs), where
    ``theta, phi`` are the floor and ceiling midpoints; ``ok`` means lhs <= rhs."""
    a = [_num(v) for v in a]
    theta, phi = midpoint_partitions(lam, mu)
    lhs = schur_eval(lam, a) * schur_eval(mu, a)
    rhs = schur_eval(theta, a) * schur_eval(phi, a)
    return OkounkovResult(lhs, rhs, bool(lhs <= rhs), theta, phi)
