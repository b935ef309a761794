"""Tests for scheme conditionals, outage sets, expected distortion and the
parameter optimizers."""

import math
from dataclasses import replace

import numpy as np
import pytest

from fadewz.bounds import partially_informed_ed
from fadewz.fading import SystemConfig, make_stream
from fadewz.numerics import DomainError
from fadewz.schemes import (
    JDS,
    SSCC,
    SHDA,
    Uncoded,
    _ed_sscc,
    _eval,
    conditional_distortion,
    expected_distortion,
    jds_conditional,
    optimize_scheme,
    shda_conditional,
    sscc_binning_rate,
    sscc_conditional,
    uncoded_conditional,
    uncoded_ed_exponential_side,
)
from fadewz.wyner_ziv import solve_target


class TestUncodedConditional:
    def test_spot_values(self):
        assert uncoded_conditional(0.0, 0.0).distortion == 1.0
        assert uncoded_conditional(4.0, 4.0).distortion == pytest.approx(1.0 / 9.0)
        assert not uncoded_conditional(4.0, 4.0).in_outage

    def test_matches_sample_mse_of_joint_estimator(self):
        # waveform-level oracle: MMSE of S from (y, t) = (sqrt(h) s + n, sqrt(g) s + z)
        h, gamma = 2.7, 0.9
        rng = make_stream(99, "uncoded-mse")
        n = 10 ** 6
        s = rng.normal(size=n)
        y = math.sqrt(h) * s + rng.normal(size=n)
        t = math.sqrt(gamma) * s + rng.normal(size=n)
        estimate = (math.sqrt(h) * y + math.sqrt(gamma) * t) / (1.0 + h + gamma)
        mse = np.mean((s - estimate) ** 2)
        stderr = np.std((s - estimate) ** 2, ddof=1) / math.sqrt(n)
        assert abs(uncoded_conditional(h, gamma).distortion - mse) <= 4 * stderr


class TestSsccConditional:
    def test_channel_boundary_is_outage(self):
        # 0.5*log2(1+3) equals rc exactly
        outcome = sscc_conditional(3.0, 10.0, 1.0, 0.5)
        assert outcome.in_outage

    def test_decode_region(self):
        outcome = sscc_conditional(4.0, 3.0, 1.0, 0.5)
        assert not outcome.in_outage
        assert outcome.distortion == pytest.approx(1.0 / 11.0)

    def test_source_stage_outage(self):
        outcome = sscc_conditional(4.0, 30.0, 1.2, 0.3)
        assert outcome.in_outage
        assert outcome.distortion == pytest.approx(1.0 / 31.0)

    def test_invalid_rates(self):
        with pytest.raises(DomainError):
            SSCC(rc=0.0, rs=1.0)
        with pytest.raises(DomainError):
            SSCC(rc=1.0, rs=-0.2)


class TestJdsConditional:
    def test_rate_boundary_is_outage(self):
        assert jds_conditional(3.0, 0.0, 1.0).in_outage

    def test_decode_region(self):
        outcome = jds_conditional(4.0, 30.0, 1.5)
        assert not outcome.in_outage
        assert outcome.distortion == pytest.approx(1.0 / 38.0)

    def test_joint_decoding_rescues_sscc_outage_state(self):
        # same state and total rate: SSCC in outage, JDS decodes and wins
        sscc = sscc_conditional(4.0, 30.0, 1.2, 0.3)
        jds = jds_conditional(4.0, 30.0, 1.5)
        assert sscc.in_outage and not jds.in_outage
        assert jds.distortion < sscc.distortion


class TestShdaConditional:
    def test_pure_digital_decode(self):
        outcome = shda_conditional(3.0, 0.0, 1.0, math.sqrt(0.5))
        assert not outcome.in_outage
        assert outcome.distortion == pytest.approx(1.0 / 3.0)

    def test_pure_digital_outage(self):
        outcome = shda_conditional(3.0, 0.0, 1.0, 1.0)
        assert outcome.in_outage
        assert outcome.distortion == pytest.approx(1.0)

    def test_zero_digital_power_is_uncoded(self):
        rng = np.random.default_rng(1)
        h = rng.uniform(0, 20, 100)
        gamma = rng.uniform(0, 20, 100)
        for eta in (0.0, 0.7, 3.0):
            d = conditional_distortion(SHDA(pd=0.0, eta=eta), h, gamma)
            np.testing.assert_array_equal(d, 1.0 / (1.0 + h + gamma))

    def test_full_digital_power_decode_formula(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            h, gamma = rng.uniform(0.1, 30, 2)
            eta = rng.uniform(0.05, 2.0)
            outcome = shda_conditional(h, gamma, 1.0, eta)
            if not outcome.in_outage:
                expected = 1.0 / (1.0 + gamma + eta ** 2 * (1.0 + h))
                assert outcome.distortion == pytest.approx(expected)

    def test_rate_power_relation(self):
        params = SHDA(pd=0.25, eta=1.5)
        assert params.eta ** 2 == pytest.approx(
            params.pd * (4.0 ** params.rate_h - 1.0))

    def test_invalid_parameters(self):
        with pytest.raises(DomainError):
            SHDA(pd=1.2, eta=1.0)
        with pytest.raises(DomainError):
            SHDA(pd=0.5, eta=-1.0)


class TestConditionalProperties:
    def test_distortions_bounded_and_monotone_on_decode_branch(self):
        rng = np.random.default_rng(3)
        params_list = [Uncoded(), SSCC(rc=0.8, rs=0.4), JDS(rj=1.1),
                       SHDA(pd=0.6, eta=0.9)]
        h = np.sort(rng.uniform(0.0, 50.0, 200))
        gamma = np.sort(rng.uniform(0.0, 50.0, 200))
        for params in params_list:
            d = conditional_distortion(params, h, gamma)
            assert np.all(d > 0.0) and np.all(d <= 1.0)
        # along increasing gamma at fixed h, decode-branch distortion shrinks
        d = conditional_distortion(JDS(rj=1.1), np.full_like(gamma, 9.0), gamma)
        assert np.all(np.diff(d) <= 1e-15)
        # and along increasing h at fixed gamma (constant for the purely
        # digital schemes, strictly shrinking for uncoded and hybrid)
        for params in params_list:
            d = conditional_distortion(params, h, np.full_like(h, 2.0))
            decode = ~_eval(params, h, np.full_like(h, 2.0))[0]
            d_decode = d[decode]
            assert np.all(np.diff(d_decode) <= 1e-15)

    def test_outage_containment_pointwise(self):
        # whenever SSCC decodes, JDS at the total rate decodes as well
        rng = np.random.default_rng(4)
        h = rng.uniform(0.0, 40.0, 10_000)
        gamma = rng.uniform(0.0, 40.0, 10_000)
        for rc, rs in ((0.5, 0.0), (1.0, 0.7), (2.0, 1.5)):
            sscc_out = np.array(
                [sscc_conditional(a, b, rc, rs).in_outage for a, b in
                 zip(h[:500], gamma[:500])])
            jds_out = np.array(
                [jds_conditional(a, b, rc + rs).in_outage for a, b in
                 zip(h[:500], gamma[:500])])
            assert not np.any(~sscc_out & jds_out)


class TestExpectedDistortion:
    def test_uncoded_matches_exponential_closed_form(self):
        for rho in (1.0, 31.6, 1000.0):
            cfg = SystemConfig(lc=1.0, ls=1.0, rho=rho)
            closed = uncoded_ed_exponential_side(cfg)
            assert abs(expected_distortion(Uncoded(), cfg) - closed) <= 1e-7

    def test_sscc_never_beats_jds_at_equal_total_rate(self):
        rng = np.random.default_rng(6)
        for _ in range(30):
            cfg = SystemConfig(
                lc=float(rng.uniform(0.3, 3.0)), ls=float(rng.uniform(0.3, 3.0)),
                rho=float(10 ** rng.uniform(0.0, 4.0)))
            rc = float(rng.uniform(0.05, 3.0))
            rs = float(rng.uniform(0.0, 3.0))
            ed_s = expected_distortion(SSCC(rc=rc, rs=rs), cfg)
            ed_j = expected_distortion(JDS(rj=rc + rs), cfg)
            assert ed_s >= ed_j - 1e-9

    def test_monte_carlo_cross_check(self):
        cfg = SystemConfig(lc=0.7, ls=1.3, rho=25.0)
        rng = make_stream(17, "ed-mc")
        h = cfg.rho * rng.gamma(cfg.lc, 1.0 / cfg.lc, size=10 ** 6)
        g = cfg.rho * rng.gamma(cfg.ls, 1.0 / cfg.ls, size=10 ** 6)
        for params in (Uncoded(), SSCC(rc=1.0, rs=0.3), JDS(rj=1.2),
                       SHDA(pd=0.4, eta=0.8)):
            d = conditional_distortion(params, h, g)
            stderr = d.std(ddof=1) / math.sqrt(d.size)
            assert abs(expected_distortion(params, cfg) - d.mean()) <= 4 * stderr

    def test_above_partially_informed_bound(self):
        cfg = SystemConfig(lc=1.0, ls=2.0, rho=31.6)
        floor = partially_informed_ed(cfg)
        for params in (Uncoded(), SSCC(rc=1.0, rs=0.5), JDS(rj=1.5),
                       SHDA(pd=0.9, eta=1.1)):
            assert expected_distortion(params, cfg) >= floor - 1e-7


class TestBinningRate:
    def test_zero_cases(self):
        assert sscc_binning_rate(1.0, 0.0) == 0.0
        assert sscc_binning_rate(0.0, 3.0) == 0.0

    def test_formula_value(self):
        expected = 0.5 * math.log2(13.0) - 1.0
        assert sscc_binning_rate(1.0, 3.0) == pytest.approx(expected)

    def test_consistent_with_grid_minimization(self):
        # at fixed rc the source stage sees an error-free link at rate rc,
        # so the matched binning rate (target solved at rc) should agree
        # with a brute scan of the expected distortion over rs
        cfg = SystemConfig(lc=1.0, ls=2.0, rho=10.0)
        rc = 1.0
        grid = np.linspace(0.0, 2.0, 801)
        eds = [_ed_sscc(cfg, rc, float(rs)) for rs in grid]
        rs_grid = float(grid[int(np.argmin(eds))])
        gamma_bar = solve_target(cfg.side_gain_law, rc, cfg.tol).gamma_bar
        rs_rule = sscc_binning_rate(rc, gamma_bar)
        assert abs(rs_rule - rs_grid) <= 2 * (grid[1] - grid[0])


class TestOptimizeScheme:
    def test_no_binning_for_exponential_side_information(self):
        cfg = SystemConfig(lc=1.0, ls=1.0, rho=100.0)
        params, _ = optimize_scheme("sscc", cfg)
        assert params.rs == 0.0

    @pytest.mark.parametrize("ls", [0.5, 1.0])
    def test_hybrid_reduces_to_uncoded_for_decreasing_side_laws(self, ls):
        cfg = SystemConfig(lc=1.0, ls=ls, rho=50.0)
        _, ed_shda = optimize_scheme("shda", cfg)
        ed_uncoded = expected_distortion(Uncoded(), cfg)
        assert abs(ed_shda - ed_uncoded) <= 1e-6 * ed_uncoded + 1e-12

    def test_jds_beats_sscc_after_optimization(self):
        for lc, ls, rho in ((1.0, 1.0, 100.0), (1.0, 2.0, 316.0), (0.5, 1.5, 100.0)):
            cfg = SystemConfig(lc=lc, ls=ls, rho=rho)
            _, ed_sscc = optimize_scheme("sscc", cfg)
            _, ed_jds = optimize_scheme("jds", cfg)
            assert ed_jds <= ed_sscc + 1e-9

    def test_optimizer_beats_exhaustive_grid(self):
        # 65 x 65 exhaustive scan of the SSCC objective as an oracle
        cfg = SystemConfig(lc=1.0, ls=2.0, rho=1e5)
        _, ed_opt = optimize_scheme("sscc", cfg)
        rates = np.geomspace(1e-3, 1.1 * math.log2(1.0 + cfg.rho), 65)
        grid_best = min(_ed_sscc(cfg, float(rc), float(rs))
                        for rc in rates for rs in np.concatenate([[0.0], rates]))
        assert ed_opt <= grid_best + 1e-6 * grid_best

    def test_monotone_in_snr(self):
        for kind in ("uncoded", "sscc", "jds", "hda", "shda"):
            previous = math.inf
            for rho in (3.16, 31.6, 316.0):
                cfg = SystemConfig(lc=1.0, ls=1.5, rho=rho)
                _, ed = optimize_scheme(kind, cfg)
                assert ed <= previous + 1e-12
                previous = ed

    def test_unknown_kind(self):
        with pytest.raises(DomainError):
            optimize_scheme("turbo", SystemConfig(lc=1, ls=1, rho=1))
