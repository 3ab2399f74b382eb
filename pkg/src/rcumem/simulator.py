"""Discrete-event simulation of the memoryless RCU update/read process.

A writer publishes copies at exponential(alpha) intervals; readers arrive
Poisson(lambda) and hold a lock on the then-current copy for an
exponential(mu) time. A replaced copy with no outstanding locks is
reclaimed immediately; otherwise it stays active until its last lock is
released. The loop accumulates the time integrals of N(t) (active copies)
and of the sawtooth age exactly per inter-event segment.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats

from .core import DomainError, ModelParams, RandomSource, validate

# event kinds; ties are broken in this order, then by insertion sequence
PUBLISH, READ_ARRIVAL, READ_COMPLETION = 0, 1, 2

_INF = math.inf


class ConfigError(ValueError):
    """Invalid simulation configuration."""


@dataclass(frozen=True)
class SimConfig:
    """One simulation run: seed, warmup, measurement horizon, CI batching.

    warmup_time=None picks max(100/alpha, 100/mu, 100/lambda) at run time.
    The horizon is counted in publications after warmup so sweeps over
    alpha have comparable statistical power.
    """

    seed: int = 1
    warmup_time: float | None = None
    horizon_publications: int = 100_000
    batch_count: int = 20
    sample_n_distribution: bool = False
    record_updates: int = 0  # keep lifecycle records for this many post-warmup updates

    def __post_init__(self):
        if self.horizon_publications < 1000:
            raise ConfigError(f"horizon_publications must be >= 1000, got {self.horizon_publications}")
        if self.batch_count < 10:
            raise ConfigError(f"batch_count must be >= 10, got {self.batch_count}")
        if self.warmup_time is not None and self.warmup_time < 0:
            raise ConfigError(f"warmup_time must be >= 0, got {self.warmup_time}")


@dataclass(frozen=True)
class UpdateRecord:
    """Lifecycle of one published copy, for trace-level inspection."""

    index: int
    publish_time: float
    replace_time: float | None
    residual_readers: int
    grace_end_time: float | None


@dataclass(frozen=True)
class SimStats:
    mean_active_updates: float
    mean_age: float
    ci_half_width_n: float
    ci_half_width_age: float
    publications: int
    reads_served: int
    mean_busy_readers: float
    n_histogram: dict[int, float] | None
    update_records: tuple[UpdateRecord, ...] = ()


class _ExpStream:
    """Block-buffered exponential draws from one named sub-stream."""

    __slots__ = ("_rs", "_rate", "_buf", "_i", "_block")

    def __init__(self, rs: RandomSource, rate: float, block: int = 16384):
        self._rs = rs
        self._rate = rate
        self._block = block
        self._buf = rs.exponential(rate, block)
        self._i = 0

    def next(self) -> float:
        i = self._i
        buf = self._buf
        if i == len(buf):
            buf = self._buf = self._rs.exponential(self._rate, self._block)
            i = 0
        self._i = i + 1
        return float(buf[i])


def _default_warmup(params: ModelParams) -> float:
    w = max(100.0 / params.alpha, 100.0 / params.mu)
    if params.lam > 0:
        w = max(w, 100.0 / params.lam)
    return w


def _batch_ci(batch_sums: np.ndarray, batch_durs: np.ndarray) -> float:
    means = batch_sums / batch_durs
    b = len(means)
    tq = stats.t.ppf(0.975, b - 1)
    return float(tq * means.std(ddof=1) / math.sqrt(b))


def simulate(params: ModelParams, config: SimConfig) -> SimStats:
    """Run the event loop and return time-averaged statistics.

    Deterministic: identical (params, config) give bit-identical results.
    """
    validate(params)
    alpha, lam, mu = params.alpha, params.lam, params.mu
    warmup = config.warmup_time if config.warmup_time is not None else _default_warmup(params)

    wexp = _ExpStream(RandomSource(config.seed, "writes"), alpha)
    aexp = _ExpStream(RandomSource(config.seed, "arrivals"), lam) if lam > 0 else None
    sexp = _ExpStream(RandomSource(config.seed, "services"), mu) if lam > 0 else None

    horizon = config.horizon_publications
    nb = config.batch_count
    boundaries = [((i + 1) * horizon) // nb for i in range(nb)]

    want_hist = config.sample_n_distribution
    hist_cap = 1 + math.ceil(10.0 * lam / mu) + 20
    hist: dict[int, float] = {}

    t = 0.0
    next_pub = wexp.next()
    next_arr = aexp.next() if aexp else _INF
    completions: list[tuple[float, int, int]] = []  # (time, insertion seq, update index)
    seq = 0
    locks: dict[int, int] = {0: 0}
    current = 0
    stale_active = 0  # stale updates with >= 1 lock; N(t) = 1 + stale_active
    inflight = 0
    gen_ts = 0.0  # generation timestamp of current update (previous publish time)
    prev_pub = 0.0

    # lifecycle records: idx -> [publish_time, replace_time, residual, grace_end]
    rec_open: dict[int, list] = {}
    rec_done: list[UpdateRecord] = []
    rec_left = config.record_updates

    area_n = 0.0
    area_age = 0.0
    area_reads = 0.0
    pubs = 0
    reads_served = 0
    snap_n: list[float] = []
    snap_age: list[float] = []
    snap_t: list[float] = []
    bi = 0

    while True:
        tc = completions[0][0] if completions else _INF
        # ties resolve as Publish < ReadArrival < ReadCompletion
        if next_pub <= next_arr and next_pub <= tc:
            te, kind = next_pub, PUBLISH
        elif next_arr <= tc:
            te, kind = next_arr, READ_ARRIVAL
        else:
            te, kind = tc, READ_COMPLETION

        if te > warmup:
            s = t if t > warmup else warmup
            dt = te - s
            area_n += (1 + stale_active) * dt
            age_s = s - gen_ts
            area_age += age_s * dt + 0.5 * dt * dt
            area_reads += inflight * dt
            if want_hist:
                n = 1 + stale_active
                if n > hist_cap:
                    n = hist_cap
                hist[n] = hist.get(n, 0.0) + dt
        t = te

        if kind == PUBLISH:
            if current in rec_open:
                r = rec_open[current]
                r[1] = t
                r[2] = locks[current]
                if locks[current] == 0:
                    r[3] = t
                    rec_done.append(UpdateRecord(current, r[0], t, 0, t))
                    del rec_open[current]
            if locks[current] == 0:
                del locks[current]  # reclaimed immediately
            else:
                stale_active += 1
            current += 1
            locks[current] = 0
            if rec_left > 0 and t > warmup:
                rec_open[current] = [t, None, 0, None]
                rec_left -= 1
            gen_ts = prev_pub
            prev_pub = t
            next_pub = t + wexp.next()
            if t > warmup:
                pubs += 1
                if pubs == boundaries[bi]:
                    snap_n.append(area_n)
                    snap_age.append(area_age)
                    snap_t.append(t)
                    bi += 1
                    if pubs == horizon:
                        break
        elif kind == READ_ARRIVAL:
            locks[current] += 1
            inflight += 1
            heapq.heappush(completions, (t + sexp.next(), seq, current))
            seq += 1
            next_arr = t + aexp.next()
        else:
            _, _, idx = heapq.heappop(completions)
            locks[idx] -= 1
            inflight -= 1
            if t > warmup:
                reads_served += 1
            if locks[idx] == 0 and idx != current:
                del locks[idx]
                stale_active -= 1
                if idx in rec_open:
                    r = rec_open.pop(idx)
                    rec_done.append(UpdateRecord(idx, r[0], r[1], r[2], t))

    # no lock leaks: outstanding locks must equal pending completions
    assert sum(locks.values()) == inflight == len(completions)

    total_t = t - warmup
    starts_n = np.concatenate(([0.0], snap_n[:-1]))
    starts_age = np.concatenate(([0.0], snap_age[:-1]))
    starts_t = np.concatenate(([warmup], snap_t[:-1]))
    durs = np.asarray(snap_t) - starts_t
    ci_n = _batch_ci(np.asarray(snap_n) - starts_n, durs)
    ci_age = _batch_ci(np.asarray(snap_age) - starts_age, durs)

    histogram = None
    if want_hist:
        histogram = {n: w / total_t for n, w in sorted(hist.items())}

    # updates still open at the horizon keep None end fields
    for idx, r in sorted(rec_open.items()):
        rec_done.append(UpdateRecord(idx, r[0], r[1], r[2], r[3]))
    rec_done.sort(key=lambda u: u.index)

    return SimStats(
        mean_active_updates=area_n / total_t,
        mean_age=area_age / total_t,
        ci_half_width_n=ci_n,
        ci_half_width_age=ci_age,
        publications=pubs,
        reads_served=reads_served,
        mean_busy_readers=area_reads / total_t,
        n_histogram=histogram,
        update_records=tuple(rec_done),
    )


def simulate_n_distribution(params: ModelParams, config: SimConfig) -> dict[int, float]:
    """Time-weighted empirical distribution of N (probabilities summing to 1)."""
    if not config.sample_n_distribution:
        raise ConfigError("sample_n_distribution must be enabled")
    stats_ = simulate(params, config)
    assert stats_.n_histogram is not None
    return stats_.n_histogram


def estimate_age_from_polygons(write_times: Sequence[float]) -> float:
    """Average age from the sawtooth polygon decomposition of write intervals.

    Each publication's polygon has area W_{n-1}^2/2 + W_{n-1} W_n (the big
    triangle on W_{n-1}+W_n minus the triangle on W_n); the estimate is the
    summed area over the summed interval lengths, n >= 2.
    """
    w = np.asarray(write_times, dtype=float)
    if w.ndim != 1 or len(w) < 2:
        raise DomainError("need at least 2 write intervals")
    if np.any(w < 0):
        raise DomainError("write intervals must be nonnegative")
    q = 0.5 * w[:-1] ** 2 + w[:-1] * w[1:]
    return float(q.sum() / w[1:].sum())


def sawtooth_area(write_times: Sequence[float]) -> float:
    """Event-loop accounting of the same sawtooth area, for cross-checking.

    Integrates the age over (t_1, t_N) directly: on each interval the age
    ramps from W_{n-1} to W_{n-1}+W_n. Equals the polygon sum minus the
    boundary terms W_1^2/2 - W_N^2/2.
    """
    w = np.asarray(write_times, dtype=float)
    if len(w) < 2:
        raise DomainError("need at least 2 write intervals")
    return float((w[:-1] * w[1:] + 0.5 * w[1:] ** 2).sum())
