"""Tests for the informed and partially informed encoder lower bounds."""

import math

import pytest

from fadewz.bounds import (
    bound_gap_report,
    informed_conditional,
    informed_ed,
    partially_informed_ed,
)
from fadewz.fading import SystemConfig
from fadewz.numerics import exp_integral_e1
from fadewz.schemes import JDS, SSCC, SHDA, Uncoded, expected_distortion


class TestInformed:
    def test_conditional_at_unit_states(self):
        assert informed_conditional(1.0, 1.0) == 0.25

    def test_zero_snr_limit(self):
        cfg = SystemConfig(lc=1.0, ls=1.0, rho=1e-9)
        assert abs(informed_ed(cfg) - 1.0) <= 1e-6

    def test_exponential_closed_form(self):
        # separable: each factor is e^(1/rho) E1(1/rho) / rho at rho = 1
        cfg = SystemConfig(lc=1.0, ls=1.0, rho=1.0)
        expected = (math.e * exp_integral_e1(1.0)) ** 2
        assert abs(informed_ed(cfg) - expected) <= 1e-7


class TestPartiallyInformed:
    @pytest.mark.parametrize("ls", [0.5, 1.0])
    @pytest.mark.parametrize("lc", [0.5, 2.0])
    def test_uncoded_attains_it_for_decreasing_side_laws(self, ls, lc):
        cfg = SystemConfig(lc=lc, ls=ls, rho=100.0)
        assert abs(partially_informed_ed(cfg) -
                   expected_distortion(Uncoded(), cfg)) <= 1e-5

    def test_zero_snr_limit(self):
        cfg = SystemConfig(lc=1.0, ls=2.0, rho=1e-9)
        assert abs(partially_informed_ed(cfg) - 1.0) <= 1e-6

    def test_sandwiched_between_informed_and_schemes(self):
        cfg = SystemConfig(lc=1.0, ls=2.0, rho=100.0)
        partial = partially_informed_ed(cfg)
        assert informed_ed(cfg) <= partial + 1e-7
        for params in (Uncoded(), SSCC(rc=1.5, rs=0.4), JDS(rj=2.0),
                       SHDA(pd=0.8, eta=1.0), SHDA(pd=1.0, eta=0.5)):
            assert partial <= expected_distortion(params, cfg) + 1e-7

    def test_nonincreasing_in_snr(self):
        values = []
        for rho in (1.0, 10.0, 100.0, 1000.0):
            cfg = SystemConfig(lc=1.0, ls=1.5, rho=rho)
            values.append((informed_ed(cfg), partially_informed_ed(cfg)))
        for (inf_a, pi_a), (inf_b, pi_b) in zip(values, values[1:]):
            assert inf_b <= inf_a and pi_b <= pi_a


class TestGapReport:
    def test_gap_shrinks_with_side_diversity(self):
        rows = bound_gap_report(1.0, 10.0, [1.0, 2.0, 5.0, 20.0])
        for row in rows:
            assert row.gap >= 0.0
            assert row.gap <= row.analytic_bound
        gaps = [row.gap for row in rows]
        assert all(later <= earlier for earlier, later in zip(gaps, gaps[1:]))

    def test_envelope_formula(self):
        rows = bound_gap_report(0.5, 3.0, [4.0])
        assert rows[0].analytic_bound == pytest.approx((1 + 2 * 3.0) / 2.0)
