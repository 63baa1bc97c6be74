"""Process-level statistics of the subordinated construction."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import greypath.ggbm as ggbm_mod
from greypath import (DomainError, GgbmParams, NumericError, TimeGrid,
                      fbm_covariance, ggbm_char, ggbm_covariance,
                      ggbm_increment_char, ggbm_moment, sample_coupled,
                      sample_ggbm, sample_ggbm_product)
from greypath.ggbm import (discrete_covariance, discrete_increment_char,
                           discrete_moment, draw_batch)
from greypath.mc import stream_for
from greypath.specfun import gamma_fn


def z_of(values, target):
    return (values.mean() - target) / (values.std() / math.sqrt(values.size))


class TestParams:
    def test_hurst_derived(self):
        assert GgbmParams(0.5, 1.5).hurst.value == 0.75
        assert GgbmParams(0.5, 1.0).hurst.is_brownian

    @pytest.mark.parametrize("bad", [0.9, 2.0, 2.5])
    def test_alpha_range(self, bad):
        with pytest.raises(DomainError):
            GgbmParams(0.5, bad)

    def test_beta_range(self):
        with pytest.raises(DomainError):
            GgbmParams(0.0, 1.5)
        assert GgbmParams(1.0, 1.5).beta_param.degenerate


class TestSubordinationSampler:
    def test_starts_at_zero(self):
        draw = sample_ggbm(GgbmParams(0.5, 1.5), TimeGrid(1.0, 32),
                           np.random.default_rng(1))
        assert draw.values[0] == 0.0

    def test_scaled_horizon(self):
        params = GgbmParams(0.5, 1.5)
        draw = sample_ggbm(params, TimeGrid(2.0, 32), np.random.default_rng(2))
        expected = 2.0 * draw.tau ** (1.0 / params.alpha)
        assert draw.coupled.grid.t_max == pytest.approx(expected, rel=1e-12)

    def test_second_moment(self):
        # target t^alpha / Gamma(beta+1), allowing the deterministic grid gap
        params = GgbmParams(0.5, 1.5)
        grid = TimeGrid(1.0, 128)
        b = draw_batch(params, grid, [128], stream_for(3, 0), 40_000)
        x2 = b["values"][0] ** 2
        closed = ggbm_moment(params, 2, 1.0)
        assert closed == pytest.approx(1.0 / gamma_fn(1.5), rel=1e-12)
        bias = abs(discrete_moment(params, grid, 2, 1.0) - closed)
        se = x2.std() / math.sqrt(x2.size)
        assert abs(x2.mean() - closed) <= 3 * se + bias

    def test_degenerate_beta_reduces_to_base_process(self):
        params = GgbmParams(1.0, 1.4)
        grid = TimeGrid(1.0, 64)
        rng = np.random.default_rng(4)
        draw = sample_ggbm(params, grid, rng)
        assert draw.tau == 1.0
        assert draw.coupled.grid.matches(grid)
        # empirical covariance against the base-process closed form
        b = draw_batch(params, grid, [32, 64], stream_for(5, 0), 30_000)
        prod = b["values"][0] * b["values"][1]
        target = fbm_covariance(params.hurst, 0.5, 1.0)
        bias = abs(discrete_covariance(params, grid, 0.5, 1.0) - target)
        assert abs(prod.mean() - target) <= 3 * prod.std() / math.sqrt(prod.size) + bias

    def test_resample_guard(self, monkeypatch):
        params = GgbmParams(0.3, 1.0)
        grid = TimeGrid(1.0, 8)
        monkeypatch.setattr(ggbm_mod, "HORIZON_CAP", 1e-6)
        with pytest.raises(NumericError):
            sample_ggbm(params, grid, np.random.default_rng(6))
        monkeypatch.setattr(ggbm_mod, "HORIZON_CAP", 3.0)
        rng = np.random.default_rng(7)
        resamples = sum(sample_ggbm(params, grid, rng).resamples for _ in range(200))
        assert resamples > 0  # the cap visibly triggers and is counted


class TestProductSampler:
    def test_odd_moments_vanish(self):
        params = GgbmParams(0.5, 1.5)
        grid = TimeGrid(1.0, 64)
        rng = np.random.default_rng(8)
        vals = np.array([sample_ggbm_product(params, grid, rng).values[-1]
                         for _ in range(20_000)])
        assert abs(z_of(vals, 0.0)) <= 3.0
        assert abs(z_of(vals ** 3, 0.0)) <= 3.0

    def test_fourth_moment(self):
        params = GgbmParams(0.5, 1.5)
        grid = TimeGrid(1.0, 128)
        rng = np.random.default_rng(9)
        vals = np.array([sample_ggbm_product(params, grid, rng).values[-1]
                         for _ in range(40_000)])
        closed = ggbm_moment(params, 4, 1.0)
        assert closed == pytest.approx(
            math.factorial(4) / (4.0 * gamma_fn(2.0)) * 1.0, rel=1e-12)
        bias = abs(discrete_moment(params, grid, 4, 1.0) - closed)
        x4 = vals ** 4
        assert abs(x4.mean() - closed) <= 3 * x4.std() / math.sqrt(x4.size) + bias

    def test_matches_subordination_sampler(self):
        # two-point characteristic function agrees between the constructions
        params = GgbmParams(0.5, 1.5)
        grid = TimeGrid(1.0, 64)
        th1, th2 = 0.5, -0.3
        i1, i2 = 32, 64
        n = 20_000
        rng = np.random.default_rng(10)
        a = np.empty(n)
        b = np.empty(n)
        for j in range(n):
            d1 = sample_ggbm(params, grid, rng)
            d2 = sample_ggbm_product(params, grid, rng)
            a[j] = math.cos(th1 * d1.values[i1] + th2 * d1.values[i2])
            b[j] = math.cos(th1 * d2.values[i1] + th2 * d2.values[i2])
        se = math.sqrt(a.var() / n + b.var() / n)
        assert abs(a.mean() - b.mean()) <= 3 * se


class TestClosedForms:
    def test_covariance_degenerate_beta(self):
        params = GgbmParams(1.0, 1.5)
        assert ggbm_covariance(params, 1.0, 2.0) == pytest.approx(
            fbm_covariance(0.75, 1.0, 2.0), rel=1e-14)

    def test_covariance_diagonal_value(self):
        params = GgbmParams(0.5, 1.5)
        t = 1.3
        target = t ** 1.5 / gamma_fn(1.5)
        assert ggbm_covariance(params, t, t) == pytest.approx(target, rel=1e-13)
        assert 1.0 / gamma_fn(1.5) == pytest.approx(1.1283791670955126, rel=1e-12)

    @given(st.floats(min_value=0.0, max_value=5.0),
           st.floats(min_value=0.0, max_value=5.0))
    @settings(max_examples=40, deadline=None)
    def test_covariance_symmetric(self, t, s):
        params = GgbmParams(0.4, 1.2)
        assert ggbm_covariance(params, t, s) == ggbm_covariance(params, s, t)

    def test_increment_char_trivials(self):
        params = GgbmParams(0.5, 1.5)
        assert ggbm_increment_char(params, 0.0, 1.0, 0.5) == 1.0
        assert ggbm_increment_char(params, 1.3, 0.7, 0.7) == 1.0

    def test_char_trivials(self):
        params = GgbmParams(0.5, 1.5)
        assert ggbm_char(params, [0.0, 0.0], [0.5, 1.0]) == 1.0

    def test_char_single_point_reduces_to_increment(self):
        params = GgbmParams(0.6, 1.3)
        th, t = 0.8, 1.1
        assert ggbm_char(params, [th], [t]) == pytest.approx(
            ggbm_increment_char(params, th, t, 0.0), rel=1e-12)

    def test_increment_char_empirical(self):
        params = GgbmParams(0.5, 1.5)
        grid = TimeGrid(1.0, 128)
        b = draw_batch(params, grid, [64, 128], stream_for(11, 0), 40_000)
        vals = np.cos(1.0 * (b["values"][1] - b["values"][0]))
        closed = ggbm_increment_char(params, 1.0, 1.0, 0.5)
        bias = abs(discrete_increment_char(params, grid, 1.0, 1.0, 0.5) - closed)
        assert abs(vals.mean() - closed) <= 3 * vals.std() / math.sqrt(vals.size) + bias

    def test_two_point_char_empirical(self):
        params = GgbmParams(0.5, 1.5)
        grid = TimeGrid(1.0, 128)
        th = np.array([0.5, -0.3])
        b = draw_batch(params, grid, [64, 128], stream_for(12, 0), 40_000)
        vals = np.cos(th[0] * b["values"][0] + th[1] * b["values"][1])
        closed = ggbm_char(params, th, [0.5, 1.0])
        # model counterpart of the quadratic form, for the bias margin
        from greypath.fbm import unit_kernel_gram
        from greypath import mittag_leffler
        g = unit_kernel_gram(params.hurst.value, 128)
        idx = np.array([63, 127])
        quad = float(th @ g[np.ix_(idx, idx)] @ th)
        model = mittag_leffler(params.beta, -0.5 * quad)
        bias = abs(model - closed)
        assert abs(vals.mean() - closed) <= 3 * vals.std() / math.sqrt(vals.size) + bias


class TestLawInvariances:
    def test_self_similar_second_moments(self):
        params = GgbmParams(0.5, 1.5)
        grid = TimeGrid(1.0, 128)
        b = draw_batch(params, grid, [64, 128], stream_for(13, 0), 40_000)
        x_half, x_one = b["values"][0] ** 2, b["values"][1] ** 2
        ratio = x_half.mean() / x_one.mean()
        target = 0.5 ** params.alpha
        se = ratio * math.sqrt(x_half.var() / x_half.mean() ** 2
                               + x_one.var() / x_one.mean() ** 2) / math.sqrt(40_000)
        bias = abs(discrete_moment(params, grid, 2, 0.5)
                   / discrete_moment(params, grid, 2, 1.0) - target)
        assert abs(ratio - target) <= 3 * se + bias

    def test_stationary_increment_second_moments(self):
        params = GgbmParams(0.5, 1.5)
        grid = TimeGrid(1.0, 128)
        b = draw_batch(params, grid, [32, 64, 96], stream_for(14, 0), 40_000)
        d1 = (b["values"][1] - b["values"][0]) ** 2   # increment over [1/4, 1/2]
        d2 = (b["values"][2] - b["values"][1]) ** 2   # increment over [1/2, 3/4]
        se = math.sqrt(d1.var() / d1.size + d2.var() / d2.size)
        def disc_inc(i, k):
            return (discrete_moment(params, grid, 2, grid.points[i])
                    + discrete_moment(params, grid, 2, grid.points[k])
                    - 2 * discrete_covariance(params, grid, grid.points[i],
                                              grid.points[k]))
        bias = abs(disc_inc(64, 32) - disc_inc(96, 64))
        assert abs(d1.mean() - d2.mean()) <= 3 * se + bias


class TestEngineConsistency:
    def test_single_draw_matches_object_level(self):
        params = GgbmParams(0.5, 1.5)
        grid = TimeGrid(1.0, 64)
        from greypath import lift_for_draw, parse_hdot, rn_density
        spec = parse_hdot("const:1")
        b = draw_batch(params, grid, [32, 64], stream_for(99, 0), 1, hdot_fn=spec)
        rng = stream_for(99, 0)
        draw = sample_ggbm(params, grid, rng)
        h = lift_for_draw(spec, draw)
        assert b["tau"][0] == pytest.approx(draw.tau, rel=1e-14)
        assert b["values"][0, 0] == pytest.approx(draw.values[32], rel=1e-11, abs=1e-13)
        assert b["values"][1, 0] == pytest.approx(draw.values[64], rel=1e-11, abs=1e-13)
        assert b["shift"][0, 0] == pytest.approx(h.h_values[32], rel=1e-11, abs=1e-13)
        dens = float(np.exp(b["wiener"] - 0.5 * b["hnorm2"])[0])
        assert dens == pytest.approx(rn_density(h, draw, 1.0), rel=1e-11)

    def test_brownian_fast_path_matches_matrix_route(self):
        params = GgbmParams(0.5, 1.0)
        grid = TimeGrid(1.0, 64)
        spec = lambda s: np.where(np.asarray(s) < 1.0, 1.0, 0.0)
        a = draw_batch(params, grid, [32, 64], stream_for(7, 0), 256, hdot_fn=spec)
        b = draw_batch(params, grid, [32, 64], stream_for(7, 0), 256, hdot_fn=spec,
                       _force_matrix=True)
        assert np.allclose(a["values"], b["values"], atol=1e-11)
        assert np.allclose(a["shift"], b["shift"], atol=1e-12)
        assert np.allclose(a["wiener"], b["wiener"], atol=1e-12)
