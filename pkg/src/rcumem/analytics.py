"""Closed-form memory footprint and age for the memoryless RCU model.

The expected number of active updates is E[N] = 1 + sum_k P(update k still
in its grace period), where the per-update survival probability has both a
series form (Poisson-weighted) and an integral form over the preceding
write time. Both are implemented so each can serve as the other's oracle,
together with the Jensen upper bound and the simple 1 + lam/mu cap.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ConvergenceError, DomainError, ModelParams, SeriesControl, b_k, validate


@dataclass(frozen=True)
class FootprintReport:
    """Exact footprint, its two upper bounds, and the truncation certificate."""

    en_exact: float
    en_bound_jensen: float
    en_bound_simple: float
    terms_used_k: int
    truncation_bound: float


def a_w(mu: float, w: float) -> float:
    """(1 - e^{-mu w}) / (mu w), the mean-lock-overlap factor; 1 at w = 0."""
    if mu <= 0:
        raise DomainError(f"mu must be > 0, got {mu}")
    if w < 0:
        raise DomainError(f"w must be >= 0, got {w}")
    x = mu * w
    if x == 0.0:
        return 1.0
    return -math.expm1(-x) / x


def lemma1_epsilon(params: ModelParams, k: int, w: float) -> float:
    """P(a read opened during a length-w window finishes in time): 1 - a_w q^k."""
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    if w <= 0:
        raise DomainError(f"w must be > 0, got {w}")
    dp = validate(params)
    return 1.0 - a_w(params.mu, w) * dp.q**k


def p_ek_given_w(params: ModelParams, k: int, w: float) -> float:
    """P(grace period of update k over | preceding write took w): exp(-b_k (1 - e^{-mu w}))."""
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    if w < 0:
        raise DomainError(f"w must be >= 0, got {w}")
    b = b_k(params, k)
    return math.exp(b * math.expm1(-params.mu * w))


def p_ek_series(params: ModelParams, k: int, ctrl: SeriesControl = SeriesControl()) -> float:
    """P(E_k) by the Poisson-weighted series.

    Computes the complement sum_j pois(j; b_k) * j/(alpha/mu + j) and returns
    one minus it. Each complement summand is bounded by the Poisson pmf, so
    the sum is truncated once the remaining Poisson tail mass drops below
    ctrl.tol; that tail mass is a rigorous bound on the discarded error.
    Poisson weights are accumulated in log space to survive large b_k.
    """
    b = b_k(params, k)
    if b == 0.0:
        return 1.0
    r = params.alpha / params.mu
    logp = -b  # log Poisson pmf at j = 0
    cdf = math.exp(logp)
    comp = 0.0  # j = 0 term of the complement is zero
    j = 0
    while 1.0 - cdf >= ctrl.tol:
        j += 1
        if j > ctrl.max_j:
            raise ConvergenceError(f"p_ek_series: max_j={ctrl.max_j} reached at b_k={b}")
        logp += math.log(b) - math.log(j)
        p = math.exp(logp)
        comp += p * (j / (r + j))
        cdf += p
    return 1.0 - comp


def _gauss_legendre_01(f, n: int) -> float:
    # composite rule on [0,1]: 8 panels of n nodes each
    nodes, weights = np.polynomial.legendre.leggauss(n)
    panels = 8
    total = 0.0
    h = 1.0 / panels
    for i in range(panels):
        a = i * h
        x = a + (nodes + 1.0) * (h / 2.0)
        total += (h / 2.0) * float(np.dot(weights, f(x)))
    return total


def p_ek_quadrature(params: ModelParams, k: int, ctrl: SeriesControl = SeriesControl()) -> float:
    """P(E_k) by the integral form alpha * int_0^inf e^{-b_k(1-e^{-mu w})} e^{-alpha w} dw.

    The substitution y = e^{-mu w} turns this into
    (alpha/mu) e^{-b_k} int_0^1 y^{alpha/mu - 1} e^{b_k y} dy. For
    alpha/mu < 1 the endpoint singularity at y = 0 is removed with the
    further substitution y = u^{mu/alpha}, leaving a bounded integrand.
    Node counts are doubled until two successive results agree to 1e-10.
    """
    b = b_k(params, k)
    r = params.alpha / params.mu
    if r >= 1.0:
        def integrand(y):
            return y ** (r - 1.0) * np.exp(b * y)

        scale = r * math.exp(-b)
    else:
        # int_0^1 y^{r-1} e^{by} dy = (1/r) int_0^1 e^{b u^{1/r}} du
        def integrand(u):
            return np.exp(b * u ** (1.0 / r))

        scale = math.exp(-b)

    n = ctrl.quad_points
    prev = scale * _gauss_legendre_01(integrand, n)
    diff = math.inf
    for _ in range(8):
        n *= 2
        cur = scale * _gauss_legendre_01(integrand, n)
        diff = abs(cur - prev)
        if diff <= 1e-10:
            return cur
        prev = cur
    if diff > 1e-9:
        raise ConvergenceError(f"p_ek_quadrature: no convergence at b_k={b}, n={n}")
    return prev


def en_bound_simple(params: ModelParams) -> float:
    """The coarse cap 1 + lam/mu (reads in flight can tag at most that many copies)."""
    dp = validate(params)
    return 1.0 + dp.rho


def _geometric_tail(rho: float, q: float, k: int) -> float:
    # sum_{i > k} (lam/alpha) q^i = (lam/mu) q^k; rigorous majorant of the discarded terms
    return rho * q**k


def en_bound_jensen(params: ModelParams, ctrl: SeriesControl = SeriesControl()) -> float:
    """Jensen upper bound 1 + sum_k q^k / (q^k + alpha/lam)."""
    dp = validate(params)
    if params.lam == 0.0:
        return 1.0
    ratio = params.alpha / params.lam
    total = 1.0
    k = 0
    while True:
        k += 1
        if k > ctrl.max_k:
            raise ConvergenceError(f"en_bound_jensen: max_k={ctrl.max_k} reached")
        qk = dp.q**k
        total += qk / (qk + ratio)
        if _geometric_tail(dp.rho, dp.q, k) < ctrl.tol:
            return total


def en_exact(params: ModelParams, ctrl: SeriesControl = SeriesControl()) -> FootprintReport:
    """Exact expected number of active updates, with bounds and truncation certificate.

    Sums 1 + sum_k (1 - P(E_k)); each term is at most (lam/alpha) q^k, so
    the tail after K terms is at most (lam/mu) q^K, which is driven below
    ctrl.tol and reported as truncation_bound.
    """
    dp = validate(params)
    jensen = en_bound_jensen(params, ctrl)
    simple = en_bound_simple(params)
    if params.lam == 0.0:
        return FootprintReport(1.0, jensen, simple, 0, 0.0)
    total = 1.0
    k = 0
    while True:
        k += 1
        if k > ctrl.max_k:
            raise ConvergenceError(f"en_exact: max_k={ctrl.max_k} reached")
        total += 1.0 - p_ek_series(params, k, ctrl)
        tail = _geometric_tail(dp.rho, dp.q, k)
        if tail < ctrl.tol:
            return FootprintReport(total, jensen, simple, k, tail)


def avg_age(params: ModelParams) -> float:
    """Time-average age of the current update: 2/alpha."""
    validate(params)
    return 2.0 / params.alpha
