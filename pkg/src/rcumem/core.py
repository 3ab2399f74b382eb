"""Model parameters, derived quantities, and the seeded random source.

The stochastic model is defined by three rates: a writer publishing update
copies at rate alpha, readers arriving at rate lambda, and read locks held
for exponential(mu) times. Everything downstream (closed forms, simulation,
Monte Carlo oracles) consumes the same validated parameter triple and the
same deterministic random-source contract defined here.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

_U64 = (1 << 64) - 1


class DomainError(ValueError):
    """An argument is outside the model's domain."""


class ConvergenceError(RuntimeError):
    """A series or quadrature failed to reach its tolerance within caps."""


@dataclass(frozen=True)
class ModelParams:
    """Rate triple (alpha, lam, mu): write rate, read arrival rate, read service rate."""

    alpha: float
    lam: float
    mu: float


@dataclass(frozen=True)
class DerivedParams:
    """q = alpha/(alpha+mu), the write-beats-read probability; rho = lam/mu, offered read load."""

    q: float
    rho: float


@dataclass(frozen=True)
class SeriesControl:
    """Truncation policy for infinite sums and quadrature.

    tol: absolute tail-mass tolerance for truncated series.
    max_k: cap on the outer (update index) sum.
    max_j: cap on the inner (reader count) sum.
    quad_points: starting Gauss-Legendre node count.
    """

    tol: float = 1e-10
    max_k: int = 200_000
    max_j: int = 100_000
    quad_points: int = 64

    def __post_init__(self):
        if not (self.tol > 0):
            raise DomainError(f"tol must be > 0, got {self.tol}")
        if self.max_k < 1 or self.max_j < 1:
            raise DomainError("max_k and max_j must be >= 1")
        if self.quad_points < 16:
            raise DomainError(f"quad_points must be >= 16, got {self.quad_points}")


def validate(params: ModelParams) -> DerivedParams:
    """Check the rate triple and return (q, rho)."""
    a, l, m = params.alpha, params.lam, params.mu
    for name, v in (("alpha", a), ("lambda", l), ("mu", m)):
        if not (isinstance(v, (int, float)) and math.isfinite(v)):
            raise DomainError(f"{name} must be finite, got {v!r}")
    if a <= 0:
        raise DomainError(f"alpha must be > 0, got {a}")
    if m <= 0:
        raise DomainError(f"mu must be > 0, got {m}")
    if l < 0:
        raise DomainError(f"lambda must be >= 0, got {l}")
    return DerivedParams(q=a / (a + m), rho=l / m)


def b_k(params: ModelParams, k: int) -> float:
    """lam * q^k / mu: mean residual-reader count parameter for the k-th stale update."""
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    dp = validate(params)
    return params.lam * dp.q**k / params.mu


class RandomSource:
    """Deterministic random stream keyed by (seed, stream name).

    Backed by numpy's PCG64 (documented, seedable, period 2^128); the stream
    name is hashed through SHA-256 so distinct names give decorrelated
    sub-streams of the same seed. Exponential and integer-shape Gamma
    variates are built from uniforms by inverse transform; Poisson uses
    CDF inversion for means below 30 and an exact chunk-sum of sub-30
    Poissons for larger means.

    Instances are single-owner: never share one across threads.
    """

    _CHUNK_MEAN = 30.0

    def __init__(self, seed: int, stream: str = ""):
        self.seed = int(seed) & _U64
        self.stream = stream
        key = int.from_bytes(hashlib.sha256(stream.encode("utf-8")).digest()[:8], "little")
        self._gen = np.random.Generator(np.random.PCG64(np.random.SeedSequence([self.seed, key])))

    def uniform(self, size: int | None = None):
        """Uniform(0,1) doubles."""
        return self._gen.random(size)

    def exponential(self, rate: float, size: int | None = None):
        """Exponential(rate) via inverse transform -log(1-U)/rate."""
        if rate <= 0:
            raise DomainError(f"rate must be > 0, got {rate}")
        u = self._gen.random(size)
        return -np.log1p(-u) / rate

    def gamma_int(self, shape: int, rate: float, size: int | None = None):
        """Gamma(integer shape, rate) as a sum of `shape` exponentials."""
        if shape < 1 or shape != int(shape):
            raise DomainError(f"shape must be a positive integer, got {shape}")
        if rate <= 0:
            raise DomainError(f"rate must be > 0, got {rate}")
        n = 1 if size is None else int(size)
        u = self._gen.random((n, int(shape)))
        out = -np.log1p(-u).sum(axis=1) / rate
        return float(out[0]) if size is None else out

    def poisson(self, mean, size: int | None = None):
        """Poisson variates; `mean` may be a scalar or an array."""
        m = np.asarray(mean, dtype=float)
        scalar = m.ndim == 0 and size is None
        if size is not None:
            m = np.broadcast_to(m, (int(size),)).astype(float)
        m = np.atleast_1d(m)
        if not np.all(np.isfinite(m)) or np.any(m < 0):
            raise DomainError("poisson mean must be finite and >= 0")
        chunks = np.maximum(1, np.ceil(m / self._CHUNK_MEAN)).astype(np.int64)
        per = m / chunks
        out = np.zeros(m.shape, dtype=np.int64)
        for j in range(int(chunks.max()) if m.size else 0):
            active = chunks > j
            out[active] += self._poisson_inversion(per[active])
        return int(out[0]) if scalar else out

    def _poisson_inversion(self, means: np.ndarray) -> np.ndarray:
        # means <= 30 here, so the CDF walk terminates quickly
        u = self._gen.random(means.shape)
        k = np.zeros(means.shape, dtype=np.int64)
        p = np.exp(-means)
        cum = p.copy()
        pending = u > cum
        cap = int(2 * means.max() + 200) if means.size else 0
        it = 0
        while pending.any():
            it += 1
            if it > cap:
                raise ConvergenceError("poisson inversion failed to terminate")
            k[pending] += 1
            p[pending] *= means[pending] / k[pending]
            cum[pending] += p[pending]
            pending = u > cum
        return k
