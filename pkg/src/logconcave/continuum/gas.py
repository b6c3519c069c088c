"""Convexity and log-supermodularity checks for ordered beta-Coulomb gases.

The ordered density is ``exp(-beta H(x))`` on the Weyl chamber with
``H(x) = -sum_{i<j} log(x_j - x_i) + sum_i V(x_i)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .._errors import DomainError
from .._parallel import ordered_map

MIN_GAP = 1e-12


@dataclass(frozen=True)
class Quadratic:
    """``V(x) = c x**2``."""

    c: float = 1.0
    positive_support = False

    def V(self, x, beta):
        return self.c * x * x

    def V2(self, x, beta):
        return 2 * self.c * np.ones_like(x)

    def convex(self, beta):
        return self.c >= 0


@dataclass(frozen=True)
class Laguerre:
    """``V(x) = x/2 + (1/beta - (a+1)/2) log x`` on ``x > 0``.

    ``V'' = ((a+1)/2 - 1/beta) / x**2``, so V is convex iff ``a >= 2/beta - 1``.
    """

    a: float
    positive_support = True

    def __post_init__(self):
        if not self.a > -1:
            raise DomainError("Laguerre parameter needs a > -1")

    def _c(self, beta):
        return 1.0 / beta - (self.a + 1) / 2

    def V(self, x, beta):
        return x / 2 + self._c(beta) * np.log(x)

    def V2(self, x, beta):
        return -self._c(beta) / x ** 2

    def convex(self, beta):
        return self._c(beta) <= 0


@dataclass(frozen=True)
class Custom:
    V_func: Callable
    V2_func: Callable | None = None
    is_convex: bool = False
    positive_support: bool = False

    def V(self, x, beta):
        return self.V_func(x)

    def V2(self, x, beta):
        if self.V2_func is None:
            raise DomainError("this potential has no second derivative")
        return self.V2_func(x)

    def convex(self, beta):
        return self.is_convex


@dataclass(frozen=True, eq=False)
class GasConfig:
    x: np.ndarray
    beta: float
    potential: object

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        if x.ndim != 1 or len(x) == 0:
            raise DomainError("x must be a nonempty vector")
        if not self.beta > 0:
            raise DomainError("beta must be positive")
        if np.any(np.diff(x) <= 0):
            raise DomainError("x must be strictly increasing (Weyl chamber)")
        if getattr(self.potential, "positive_support", False) and x[0] <= 0:
            raise DomainError("this potential lives on x > 0")
        object.__setattr__(self, "x", x)

    @property
    def convex(self) -> bool:
        return bool(self.potential.convex(self.beta))

    def hamiltonian(self, x=None) -> float:
        x = self.x if x is None else np.asarray(x, float)
        i, j = np.triu_indices(len(x), 1)
        return float(-np.sum(np.log(x[j] - x[i])) + np.sum(self.potential.V(x, self.beta)))

    def hessian(self) -> np.ndarray:
        """Exact Hessian of ``H`` (multiply by beta for the log density)."""
        x = self.x
        diff = x[:, None] - x[None, :]
        if len(x) > 1 and np.min(np.abs(diff[~np.eye(len(x), dtype=bool)])) < MIN_GAP:
            raise DomainError("degenerate configuration: gap below 1e-12")
        with np.errstate(divide="ignore"):
            w = np.where(np.eye(len(x), dtype=bool), 0.0, 1.0 / diff ** 2)
        hess = -w
        hess[np.diag_indices(len(x))] = w.sum(axis=1) + self.potential.V2(x, self.beta)
        return hess


def ldl_psd(a: np.ndarray, tol: float = 1e-12):
    """Decide positive semidefiniteness by an LDL' factorization without pivoting.

    Returns ``(psd, witness)``; ``witness`` is a vector with ``w' A w < 0`` when
    the matrix is not PSD. Pivots within ``tol`` (relative to the diagonal
    scale) count as zero; a zero pivot with a non-negligible column means the
    matrix is indefinite, and the witness then comes from the eigendecomposition.
    """
    a = np.array(a, dtype=float)
    n = len(a)
    scale = max(float(np.max(np.abs(np.diag(a)))), 1.0)
    L = np.eye(n)
    d = np.zeros(n)
    for k in range(n):
        d[k] = a[k, k] - np.sum(L[k, :k] ** 2 * d[:k])
        col = a[k + 1:, k] - (L[k + 1:, :k] * d[:k]) @ L[k, :k]
        if d[k] < -tol * scale:
            e = np.zeros(n)
            e[k] = 1.0
            return False, np.linalg.solve(L.T, e)
        if abs(d[k]) <= tol * scale:
            if np.any(np.abs(col) > math.sqrt(tol) * scale):
                vals, vecs = np.linalg.eigh(a)
                return False, vecs[:, 0]
            d[k] = 0.0
            continue
        L[k + 1:, k] = col / d[k]
    return True, None


@dataclass(frozen=True)
class ConvexityReport:
    trials: int
    psd_count: int
    potential_convex: bool
    witness_x: tuple | None
    witness_vector: tuple | None
    witness_value: float | None

    @property
    def all_psd(self) -> bool:
        return self.psd_count == self.trials

    def to_dict(self):
        return {"trials": self.trials, "psd_count": self.psd_count, "all_psd": self.all_psd,
                "potential_convex": self.potential_convex,
                "witness_x": self.witness_x, "witness_vector": self.witness_vector,
                "witness_value": self.witness_value}


def random_chamber_point(rng: np.random.Generator, n: int, positive: bool = False,
                         scale: float = 1.0) -> np.ndarray:
    """Sorted i.i.d. draws (normal, or exponential for positive support)."""
    while True:
        x = np.sort(rng.exponential(scale, n) if positive else rng.normal(0.0, scale, n))
        if n == 1 or np.min(np.diff(x)) >= MIN_GAP:
            return x


def _rng(seed, chunk):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), int(chunk)])))


def _chunks(trials, size=1000):
    return [(c, min(size, trials - c * size)) for c in range((trials + size - 1) // size)]


def gas_convexity_check(cfg: GasConfig, trials: int = 1, seed: int = 0,
                        scale: float = 1.0, threads: int | None = None) -> ConvexityReport:
    """PSD test of the Hessian at ``cfg.x`` and at ``trials - 1`` further random chamber points.

    Random points use the dimension and potential of ``cfg``. The first
    indefinite configuration found is returned as a witness.
    """
    n = len(cfg.x)
    positive = getattr(cfg.potential, "positive_support", False)

    def run(chunk):
        c, size = chunk
        rng = _rng(seed, c)
        found, count = None, 0
        for t in range(size):
            x = cfg.x if (c == 0 and t == 0) else random_chamber_point(rng, n, positive, scale)
            ok, w = ldl_psd(GasConfig(x, cfg.beta, cfg.potential).hessian())
            if ok:
                count += 1
            elif found is None:
                found = (x, w)
        return count, found

    results = ordered_map(run, _chunks(max(trials, 1)), threads)
    psd = sum(r[0] for r in results)
    witness = next((r[1] for r in results if r[1] is not None), None)
    if witness is None:
        return ConvexityReport(max(trials, 1), psd, cfg.convex, None, None, None)
    x, w = witness
    value = float(w @ GasConfig(x, cfg.beta, cfg.potential).hessian() @ w)
    return ConvexityReport(max(trials, 1), psd, cfg.convex, tuple(map(float, x)),
                           tuple(map(float, w)), value)


@dataclass(frozen=True)
class SupermodularReport:
    applicable: bool
    lhs: float
    rhs: float
    holds: bool

    def to_dict(self):
        return dict(self.__dict__)


def gas_supermodular_check(cfg: GasConfig, y, rel_tol: float = 1e-12) -> SupermodularReport:
    """Check ``H(x^y) + H(xvy) <= H(x) + H(y)`` (lhs vs rhs), i.e. log-supermodularity.

    The potential terms cancel exactly since ``{min, max} = {x_i, y_i}``
    coordinatewise; they are still evaluated so the check stands alone. A
    relative slack of ``rel_tol`` absorbs rounding.
    """
    x = cfg.x
    y = np.asarray(y, float)
    if y.shape != x.shape or np.any(np.diff(y) <= 0):
        return SupermodularReport(False, math.nan, math.nan, False)
    lo, hi = np.minimum(x, y), np.maximum(x, y)
    if len(x) > 1 and (np.any(np.diff(lo) <= 0) or np.any(np.diff(hi) <= 0)):
        return SupermodularReport(False, math.nan, math.nan, False)
    lhs = cfg.hamiltonian(lo) + cfg.hamiltonian(hi)
    rhs = cfg.hamiltonian(x) + cfg.hamiltonian(y)
    slack = rel_tol * (abs(lhs) + abs(rhs) + 1.0)
    return SupermodularReport(True, lhs, rhs, bool(lhs <= rhs + slack))


@dataclass(frozen=True)
class SupermodularBatch:
    trials: int
    holds: int
    worst_gap: float
    witness: tuple | None

    @property
    def all_hold(self):
        return self.holds == self.trials

    def to_dict(self):
        return {"trials": self.trials, "holds": self.holds, "all_hold": self.all_hold,
                "worst_gap": self.worst_gap, "witness": self.witness}


def gas_supermodular_batch(n: int, beta: float, potential, trials: int, seed: int = 0,
                           scale: float = 1.0, threads: int | None = None) -> SupermodularBatch:
    """``gas_supermodular_check`` at ``trials`` random pairs of chamber points.

    ``worst_gap`` is the largest ``lhs - rhs`` seen (negative when all hold strictly).
    """
    positive = getattr(potential, "positive_support", False)

    def run(chunk):
        c, size = chunk
        rng = _rng(seed, c)
        holds, worst, wit = 0, -math.inf, None
        for _ in range(size):
            x = random_chamber_point(rng, n, positive, scale)
            y = random_chamber_point(rng, n, positive, scale)
            rep = gas_supermodular_check(GasConfig(x, beta, potential), y)
            holds += rep.holds
            worst = max(worst, rep.lhs - rep.rhs)
            if not rep.holds and wit is None:
                wit = (tuple(map(float, x)), tuple(map(float, y)))
        return holds, worst, wit

    results = ordered_map(run, _chunks(trials), threads)
    return SupermodularBatch(trials, sum(r[0] for r in results),
                             max((r[1] for r in results), default=-math.inf),
                             next((r[2] for r in results if r[2] is not None), None))
