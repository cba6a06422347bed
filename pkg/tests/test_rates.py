import math

import numpy as np
import pytest

from _oracles import random_model
from spatialp2p.rates import (
    LINEAR_IN_C,
    RateModel,
    RateModelError,
    bare_rate,
    gamma,
    gamma_quadrature,
    pair_rate,
    partial_gamma,
    second_moment,
    second_moment_quadrature,
    typical_range,
)


class TestPairRate:
    def test_tcp_inverse_distance(self):
        assert pair_rate(RateModel.tcp(1.0, 1.0), 0.5) == pytest.approx(2.0)

    def test_out_of_range_is_zero(self):
        for m in (RateModel.tcp(1.0, 1.0), RateModel.udp(2.0, 1.0),
                  RateModel.snr(1.0, alpha=4.0, R=1.0)):
            assert pair_rate(m, 1.5) == 0.0

    def test_affine_rtt(self):
        assert pair_rate(RateModel.affine_rtt(2.0, q=1.0, R=2.0), 1.0) == pytest.approx(1.0)

    def test_exactly_at_range_included(self):
        assert pair_rate(RateModel.tcp(1.0, 1.0), 1.0) == pytest.approx(1.0)
        assert pair_rate(RateModel.udp(3.0, 0.5), 0.5) == pytest.approx(3.0)

    def test_coincident_points_stay_finite(self):
        for m in (RateModel.tcp(1.0, 1.0),
                  RateModel.overhead(1.0, c=0.5, R=1.0),
                  RateModel.per_flow_cap(1.0, U=4.0, R=1.0),
                  RateModel.snr(2.0, alpha=4.0, R=1.0),
                  RateModel.snr(2.0, alpha=4.0)):
            v = pair_rate(m, 0.0)
            assert math.isfinite(v) and v > 0

    def test_vectorized_matches_scalar(self):
        m = RateModel.per_flow_cap(1.5, U=2.0, R=1.2)
        r = np.array([0.0, 0.3, 0.74, 1.2, 1.3])
        vec = pair_rate(m, r)
        assert vec.shape == r.shape
        for ri, vi in zip(r, vec):
            assert vi == pytest.approx(pair_rate(m, float(ri)))

    def test_nonincreasing_and_nonnegative(self):
        rng = np.random.default_rng(11)
        for _ in range(40):
            m = random_model(rng)
            rmax = m.R if m.finite_range else 5.0 * m.C ** (1 / m.alpha)
            r = np.linspace(1e-6, rmax * 1.05, 400)
            v = pair_rate(m, r)
            assert np.all(v >= 0)
            assert np.all(np.diff(v) <= 1e-12)
            if m.finite_range:
                assert pair_rate(m, m.R * 1.0000001) == 0.0


class TestGammaClosedForms:
    def test_tcp(self):
        assert gamma(RateModel.tcp(1.0, 1.0)) == pytest.approx(2 * math.pi, rel=1e-14)

    def test_overhead_half_correction(self):
        # 2*pi*(RC - R^2 c/2) with C=c=R=1 -> pi
        assert gamma(RateModel.overhead(1.0, c=1.0, R=1.0)) == pytest.approx(math.pi, rel=1e-14)

    def test_snr_infinite(self):
        # pi^2 C^(2/alpha) / (2 sin(2 pi/alpha)) with alpha=4, C=4 -> pi^2
        assert gamma(RateModel.snr(4.0, alpha=4.0)) == pytest.approx(math.pi**2, rel=1e-14)

    def test_udp(self):
        assert gamma(RateModel.udp(2.0, 0.5)) == pytest.approx(math.pi / 2, rel=1e-14)

    def test_per_flow_cap_branches(self):
        # cap binding everywhere: g = U
        assert gamma(RateModel.per_flow_cap(10.0, U=2.0, R=1.0)) == pytest.approx(
            math.pi * 2.0, rel=1e-14
        )
        # cap binding only near the origin
        m = RateModel.per_flow_cap(1.0, U=4.0, R=1.0)
        assert gamma(m) == pytest.approx(math.pi * (2.0 - 0.25), rel=1e-14)

    def test_linear_in_C(self):
        rng = np.random.default_rng(5)
        for _ in range(60):
            m = random_model(rng)
            if m.kind not in LINEAR_IN_C:
                continue
            scaled = RateModel(m.kind, C=3.0 * m.C, R=m.R, q=m.q, c=m.c, U=m.U, alpha=m.alpha)
            assert gamma(scaled) == pytest.approx(3.0 * gamma(m), rel=1e-12)

    def test_overhead_not_linear_in_C(self):
        m = RateModel.overhead(2.0, c=1.0, R=1.0)
        m2 = RateModel.overhead(4.0, c=1.0, R=1.0)
        assert gamma(m2) != pytest.approx(2 * gamma(m), rel=1e-6)


class TestGammaQuadrature:
    def test_tcp(self):
        got = gamma_quadrature(RateModel.tcp(1.0, 1.0), rel_tol=1e-9)
        assert got == pytest.approx(2 * math.pi, rel=1e-8)

    def test_udp(self):
        got = gamma_quadrature(RateModel.udp(2.0, 0.5), rel_tol=1e-9)
        assert got == pytest.approx(math.pi / 2, rel=1e-8)

    def test_snr4_matches_closed_form(self):
        m = RateModel.snr(1.0, alpha=4.0, R=1.0)
        assert gamma_quadrature(m, rel_tol=1e-9) == pytest.approx(gamma(m), rel=1e-8)

    def test_closed_forms_match_quadrature_randomized(self):
        rng = np.random.default_rng(77)
        for _ in range(40):
            m = random_model(rng)
            assert gamma_quadrature(m, rel_tol=1e-10) == pytest.approx(gamma(m), rel=1e-8)

    def test_rel_tol_validated(self):
        with pytest.raises(RateModelError):
            gamma_quadrature(RateModel.tcp(1.0, 1.0), rel_tol=1e-3)


class TestTypicalRange:
    def test_tcp_half_range(self):
        for R in (0.1, 1.0, 2.7):
            assert typical_range(RateModel.tcp(3.0, R)) == pytest.approx(R / 2, rel=1e-12)

    def test_udp_two_thirds(self):
        assert typical_range(RateModel.udp(1.0, 0.9)) == pytest.approx(0.6, rel=1e-12)

    def test_affine_small_q_limit(self):
        m = RateModel.affine_rtt(1.0, q=1e-12, R=1.0)
        assert typical_range(m) == pytest.approx(0.5, rel=1e-8)

    def test_in_zero_R_interval(self):
        rng = np.random.default_rng(13)
        for _ in range(40):
            m = random_model(rng)
            if not m.finite_range:
                continue
            rt = typical_range(m)
            assert 0 < rt <= m.R

    def test_quadrature_cross_check(self):
        rng = np.random.default_rng(21)
        for _ in range(25):
            m = random_model(rng)
            if m.kind == "snr_infinite" and m.alpha <= 3.0:
                continue
            first = gamma_quadrature(m, rel_tol=1e-10) / (2 * math.pi)
            second = second_moment_quadrature(m, rel_tol=1e-10)
            assert typical_range(m) == pytest.approx(second / first, rel=1e-7)

    def test_snr_infinite_low_alpha_rejected(self):
        with pytest.raises(RateModelError):
            typical_range(RateModel.snr(1.0, alpha=2.5))

    def test_affine_large_q_asymptote(self):
        # gamma * q / (pi C R^2) -> 1 as q >> R
        R, C, q = 0.5, 2.0, 0.5 * 1e4
        m = RateModel.affine_rtt(C, q=q, R=R)
        assert gamma(m) * q / (math.pi * C * R**2) == pytest.approx(1.0, rel=0.01)


class TestPartialGamma:
    def test_full_radius_recovers_gamma(self):
        rng = np.random.default_rng(31)
        for _ in range(25):
            m = random_model(rng)
            if not m.finite_range:
                continue
            assert partial_gamma(m, m.R) == pytest.approx(gamma(m), rel=1e-12)
            assert partial_gamma(m, 10 * m.R) == pytest.approx(gamma(m), rel=1e-12)

    def test_zero_radius(self):
        assert partial_gamma(RateModel.tcp(1.0, 1.0), 0.0) == 0.0

    def test_monotone_in_radius(self):
        rng = np.random.default_rng(37)
        for _ in range(20):
            m = random_model(rng)
            rmax = m.R if m.finite_range else 3.0
            vals = [partial_gamma(m, a) for a in np.linspace(0, rmax, 30)]
            assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))

    def test_matches_quadrature_on_truncated_model(self):
        m = RateModel.snr(2.0, alpha=3.3, R=1.5)
        a = 0.4
        truncated = RateModel.snr(2.0, alpha=3.3, R=a)
        assert partial_gamma(m, a) == pytest.approx(
            gamma_quadrature(truncated, rel_tol=1e-10), rel=1e-8
        )


class TestSecondMoment:
    def test_closed_forms_match_quadrature(self):
        rng = np.random.default_rng(41)
        for _ in range(30):
            m = random_model(rng)
            if m.kind == "snr_infinite" and m.alpha <= 3.0:
                continue
            assert second_moment(m) == pytest.approx(
                second_moment_quadrature(m, rel_tol=1e-10), rel=1e-7
            )


class TestValidation:
    def test_overhead_range_cap(self):
        with pytest.raises(RateModelError):
            RateModel.overhead(1.0, c=1.0, R=1.5)

    def test_snr_alpha_floor(self):
        with pytest.raises(RateModelError):
            RateModel.snr(1.0, alpha=2.0, R=1.0)
        with pytest.raises(RateModelError):
            RateModel.snr(1.0, alpha=1.5)

    def test_positive_parameters(self):
        with pytest.raises(RateModelError):
            RateModel.tcp(-1.0, 1.0)
        with pytest.raises(RateModelError):
            RateModel.tcp(1.0, 0.0)
        with pytest.raises(RateModelError):
            RateModel.affine_rtt(1.0, q=0.0, R=1.0)
        with pytest.raises(RateModelError):
            RateModel.per_flow_cap(1.0, U=0.0, R=1.0)

    def test_finite_range_required_outside_snr(self):
        with pytest.raises(RateModelError):
            RateModel.tcp(1.0, math.inf)

    def test_negative_distance_rejected(self):
        with pytest.raises(RateModelError):
            pair_rate(RateModel.tcp(1.0, 1.0), -0.1)

    def test_bare_rate_used_beyond_range(self):
        m = RateModel.tcp(1.0, 1.0)
        assert bare_rate(m, 2.0) == pytest.approx(0.5)
        assert pair_rate(m, 2.0) == 0.0
