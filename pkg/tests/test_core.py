import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rcumem.core import (
    DomainError,
    ModelParams,
    RandomSource,
    SeriesControl,
    b_k,
    validate,
)

rates = st.floats(min_value=1e-3, max_value=1e3, allow_nan=False, allow_infinity=False)


class TestValidate:
    def test_symmetric_point(self):
        dp = validate(ModelParams(1, 1, 1))
        assert dp.q == 0.5
        assert dp.rho == 1.0

    def test_fast_writer(self):
        dp = validate(ModelParams(3, 10, 1))
        assert dp.q == 0.75
        assert dp.rho == 10.0

    def test_zero_alpha_rejected(self):
        with pytest.raises(DomainError):
            validate(ModelParams(0, 1, 1))

    @pytest.mark.parametrize(
        "params",
        [
            ModelParams(-1, 1, 1),
            ModelParams(1, -1, 1),
            ModelParams(1, 1, 0),
            ModelParams(math.inf, 1, 1),
            ModelParams(1, math.nan, 1),
        ],
    )
    def test_invalid_rejected(self, params):
        with pytest.raises(DomainError):
            validate(params)

    @given(alpha=rates, lam=rates, mu=rates)
    def test_pure_and_in_range(self, alpha, lam, mu):
        p = ModelParams(alpha, lam, mu)
        dp1, dp2 = validate(p), validate(p)
        assert dp1 == dp2
        assert 0 < dp1.q < 1
        assert dp1.rho >= 0


class TestBk:
    def test_symmetric(self):
        assert b_k(ModelParams(1, 1, 1), 1) == pytest.approx(0.5)

    def test_zero_read_load(self):
        assert b_k(ModelParams(2, 0, 3), 3) == 0.0

    def test_k2(self):
        assert b_k(ModelParams(1, 2, 1), 2) == pytest.approx(0.5)

    def test_k_below_one_rejected(self):
        with pytest.raises(DomainError):
            b_k(ModelParams(1, 1, 1), 0)

    @given(alpha=rates, lam=rates, mu=rates, k=st.integers(min_value=1, max_value=50))
    @settings(max_examples=50)
    def test_geometric_recursion(self, alpha, lam, mu, k):
        p = ModelParams(alpha, lam, mu)
        q = validate(p).q
        assert b_k(p, k + 1) == pytest.approx(q * b_k(p, k), rel=1e-12)


class TestSeriesControl:
    def test_defaults_valid(self):
        SeriesControl()

    @pytest.mark.parametrize("kw", [{"tol": 0}, {"tol": -1e-3}, {"max_k": 0}, {"max_j": 0}, {"quad_points": 8}])
    def test_invalid(self, kw):
        with pytest.raises(DomainError):
            SeriesControl(**kw)


class TestRandomSource:
    def test_reproducible_uniform_stream(self):
        a = RandomSource(12345, "x").uniform(1_000_000)
        b = RandomSource(12345, "x").uniform(1_000_000)
        assert np.array_equal(a, b)

    def test_streams_differ(self):
        a = RandomSource(1, "writes").uniform(100)
        b = RandomSource(1, "arrivals").uniform(100)
        assert not np.array_equal(a, b)

    def test_seeds_differ(self):
        a = RandomSource(1, "x").uniform(100)
        b = RandomSource(2, "x").uniform(100)
        assert not np.array_equal(a, b)

    def test_exponential_moments(self):
        x = RandomSource(7, "e").exponential(2.0, 400_000)
        assert x.mean() == pytest.approx(0.5, rel=0.01)
        assert x.var() == pytest.approx(0.25, rel=0.03)

    def test_poisson_small_mean(self):
        x = RandomSource(7, "p").poisson(3.0, 400_000)
        assert x.mean() == pytest.approx(3.0, rel=0.01)
        assert x.var() == pytest.approx(3.0, rel=0.03)

    def test_poisson_large_mean_chunked(self):
        x = RandomSource(7, "p").poisson(250.0, 100_000)
        assert x.mean() == pytest.approx(250.0, rel=0.005)
        assert x.var() == pytest.approx(250.0, rel=0.05)

    def test_poisson_array_means(self):
        means = np.array([0.0, 0.5, 40.0, 100.0])
        rs = RandomSource(3, "p")
        draws = np.array([rs.poisson(means) for _ in range(20_000)], dtype=float)
        assert np.all(draws[:, 0] == 0)
        assert draws.mean(axis=0) == pytest.approx(means, rel=0.03, abs=0.02)

    def test_gamma_int_moments(self):
        x = RandomSource(7, "g").gamma_int(3, 2.0, 400_000)
        assert x.mean() == pytest.approx(1.5, rel=0.01)
        assert x.var() == pytest.approx(0.75, rel=0.03)

    def test_invalid_args(self):
        rs = RandomSource(1)
        with pytest.raises(DomainError):
            rs.exponential(0.0)
        with pytest.raises(DomainError):
            rs.gamma_int(0, 1.0)
        with pytest.raises(DomainError):
            rs.poisson(-1.0)
