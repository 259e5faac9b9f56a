import numpy as np
import pytest

from ratemse import (
    InputDesign,
    StatePrior,
    alpha_atbcrb,
    alpha_bcrb,
    atbcrb_finite,
    bayesian_fisher,
    bcrb_finite,
    bound_report,
)
from ratemse.errors import BoundsError, ModelError
from ratemse.model import CustomChannel

from conftest import StateMeanChannel

# E[(S + 1/2)^-2] under beta(3,3); frozen from an exact symbolic integral,
# confirmed by adaptive quadrature to 14 digits.
E_INV_SQUARE = 1.1248940198701278
ALPHA_ATBCRB_T2_1 = 29.0 / 14.0
ALPHA_BCRB_T2_1 = 2.0 / E_INV_SQUARE  # 1.777945268329283

# Eq-by-eq regression target for the refined bound at n = 1e4, frozen from
# the dense-grid Riemann oracle below (grid-converged to 12 digits and
# independently confirmed with 30-digit adaptive quadrature).
ATBCRB_N1E4 = 2.049078268295e-04


def riemann_atbcrb(n, a=3.0, b=3.0, sig2=0.5, t2=1.0, m=2_000_000):
    """Independent midpoint-rule evaluation of the refined bound for the
    two-band model: everything in closed form, no shared code with the
    library path."""
    s = (np.arange(m) + 0.5) / m
    w = 30.0 * s**2 * (1 - s) ** 2 / m
    v = s + sig2
    sc = (a - 1) / s - (b - 1) / (1 - s)
    scp = -(a - 1) / s**2 - (b - 1) / (1 - s) ** 2
    scpp = 2 * (a - 1) / s**3 - 2 * (b - 1) / (1 - s) ** 3
    J = n * t2 / (2 * v**2) + sc**2
    Jp = -n * t2 / v**3 + 2 * sc * scp
    Jpp = 3 * n * t2 / v**4 + 2 * (scp**2 + sc * scpp)
    g = 1.0 / J
    Eg = np.sum(w * g)
    Egp2 = np.sum(w * (Jp / J**2) ** 2)
    Eg2pp = np.sum(w * (-2 * Jpp / J**3 + 6 * Jp**2 / J**4))
    return Eg**2 / (Eg + Egp2 + Eg2pp)


class TestBayesianFisher:
    def test_two_band_t2_one(self, model, sensing_design):
        # data term 0.5 * n * E[(S + 1/2)^-2] plus the prior's 40
        for n in (1, 1000):
            expected = 0.5 * n * E_INV_SQUARE + 40.0
            got = bayesian_fisher(model.channel, sensing_design, model.prior, n)
            assert got == pytest.approx(expected, rel=1e-9)

    def test_prior_only_at_n_zero(self, model):
        got = bayesian_fisher(model.channel, model.design(1.0), model.prior, 0)
        assert got == pytest.approx(40.0, abs=1e-8)

    def test_linear_in_n(self, model, sensing_design):
        j0 = bayesian_fisher(model.channel, sensing_design, model.prior, 0)
        j1 = bayesian_fisher(model.channel, sensing_design, model.prior, 500)
        j2 = bayesian_fisher(model.channel, sensing_design, model.prior, 1000)
        assert j2 - j0 == pytest.approx(2 * (j1 - j0), rel=1e-9)

    def test_regularity_enforced(self, model, sensing_design):
        with pytest.raises(ModelError, match="regularity"):
            bayesian_fisher(model.channel, sensing_design, StatePrior.beta(2, 2), 10)


class TestBcrbFinite:
    def test_prior_only_value(self, model, sensing_design):
        assert bcrb_finite(model.channel, sensing_design, model.prior, 0) == pytest.approx(
            1.0 / 40.0, abs=1e-10
        )

    def test_value_at_n_1000(self, model, sensing_design):
        expected = 1.0 / (0.5 * 1000 * E_INV_SQUARE + 40.0)
        got = bcrb_finite(model.channel, sensing_design, model.prior, 1000)
        assert got == pytest.approx(expected, rel=1e-9)
        assert got == pytest.approx(1.660e-3, rel=1e-3)

    def test_monotone_in_n(self, model, sensing_design):
        b1 = bcrb_finite(model.channel, sensing_design, model.prior, 1000)
        b2 = bcrb_finite(model.channel, sensing_design, model.prior, 2000)
        assert b2 < b1

    def test_scaled_convergence_to_alpha(self, model, sensing_design):
        n = 100_000
        scaled = n * bcrb_finite(model.channel, sensing_design, model.prior, n)
        assert scaled == pytest.approx(ALPHA_BCRB_T2_1, rel=0.02)


class TestAtbcrbFinite:
    def test_riemann_regression(self, model, sensing_design):
        got = atbcrb_finite(model.channel, sensing_design, model.prior, 10_000)
        assert got == pytest.approx(ATBCRB_N1E4, rel=1e-7)
        assert got == pytest.approx(riemann_atbcrb(10_000), rel=1e-7)
        assert 0.9 * 2.0714e-4 < got < 1.0 * 2.0714e-4

    def test_approaches_alpha(self, model, sensing_design):
        n = 100_000
        got = n * atbcrb_finite(model.channel, sensing_design, model.prior, n)
        assert got == pytest.approx(ALPHA_ATBCRB_T2_1, rel=0.02)

    def test_monotone_decreasing_in_n(self, model, sensing_design):
        vals = [
            atbcrb_finite(model.channel, sensing_design, model.prior, n)
            for n in (100, 1000, 10_000)
        ]
        assert vals[0] > vals[1] > vals[2]

    def test_constant_fisher_collapses_to_bcrb(self):
        # flat prior + state-independent information: the refinement's
        # derivative terms vanish and both bounds coincide
        channel = StateMeanChannel(0.5)
        prior = StatePrior.beta(1, 1)
        design = InputDesign.uniform([-1.0, 1.0])
        for n in (10, 10_000):
            t = atbcrb_finite(channel, design, prior, n)
            b = bcrb_finite(channel, design, prior, n)
            assert t == pytest.approx(b, rel=1e-9)

    def test_fd_fallback_matches_analytic(self, model, sensing_design):
        # strip the analytic Fisher hooks: the finite-difference path on the
        # combined information must agree with the analytic one
        band2 = model.channel
        stripped = CustomChannel(
            log_density=band2.log_density,
            output_interval=band2.output_interval,
            dlogd_ds=band2.dlogd_ds,
            d2logd_ds2=band2.d2logd_ds2,
        )
        got = atbcrb_finite(stripped, sensing_design, model.prior, 1000)
        want = atbcrb_finite(model.channel, sensing_design, model.prior, 1000)
        assert got == pytest.approx(want, rel=1e-5)


class TestAlphas:
    def test_alpha_atbcrb_closed_form(self, model, sensing_design):
        got = alpha_atbcrb(model.channel, sensing_design, model.prior)
        assert got == pytest.approx(ALPHA_ATBCRB_T2_1, rel=1e-9)

    def test_alpha_atbcrb_scales_with_t2(self, model):
        got = alpha_atbcrb(model.channel, model.design(0.5), model.prior)
        assert got == pytest.approx(2.0 * ALPHA_ATBCRB_T2_1, rel=1e-9)

    def test_alpha_atbcrb_a4(self):
        from ratemse import TwoBandModel

        m = TwoBandModel.default(a=4, b=4)
        got = alpha_atbcrb(m.channel, m.design(0.0), m.prior)
        assert got == pytest.approx(2.0 * (5.0 / 18.0 + 0.75), rel=1e-9)

    def test_alpha_bcrb_value(self, model, sensing_design):
        got = alpha_bcrb(model.channel, sensing_design, model.prior)
        assert got == pytest.approx(ALPHA_BCRB_T2_1, rel=1e-9)
        assert got == pytest.approx(1.77795, rel=1e-4)

    def test_ratio_constant_in_t2(self, model):
        ratios = []
        for t1 in (0.0, 0.25, 0.5, 0.75):
            design = model.design(t1)
            ratios.append(
                alpha_atbcrb(model.channel, design, model.prior)
                / alpha_bcrb(model.channel, design, model.prior)
            )
        assert max(ratios) - min(ratios) < 1e-9
        assert ratios[0] == pytest.approx(1.16507, rel=1e-4)

    def test_unidentifiable_design(self, model):
        with pytest.raises(BoundsError, match="not identifiable"):
            alpha_atbcrb(model.channel, model.design(1.0), model.prior)

    def test_jensen_ordering_randomized(self):
        from ratemse import TwoBandModel

        rng = np.random.default_rng(2024)
        for _ in range(25):
            a = rng.uniform(2.0, 6.0) + 1e-6
            sigma2 = rng.uniform(0.1, 2.0)
            t2 = rng.uniform(0.05, 1.0)
            m = TwoBandModel.default(a=a, b=a, sigma2=sigma2)
            design = m.design(1.0 - t2) if t2 < 1.0 else m.design(0.0)
            lo = alpha_bcrb(m.channel, design, m.prior)
            hi = alpha_atbcrb(m.channel, design, m.prior)
            assert lo <= hi + 1e-12

    def test_jensen_equality_for_constant_fisher(self):
        channel = StateMeanChannel(0.7)
        design = InputDesign.uniform([0.0, 1.0])
        prior = StatePrior.beta(3, 3)
        lo = alpha_bcrb(channel, design, prior)
        hi = alpha_atbcrb(channel, design, prior)
        assert abs(hi - lo) < 1e-9
        assert lo == pytest.approx(0.7, rel=1e-9)


class TestBoundReport:
    def test_fields_and_gap(self, model, sensing_design):
        rep = bound_report(model.channel, sensing_design, model.prior, 1000)
        assert rep.jensen_gap == pytest.approx(rep.alpha_atbcrb - rep.alpha_bcrb)
        assert rep.jensen_gap > 0
        for value in (rep.bcrb_finite, rep.atbcrb_finite, rep.alpha_atbcrb, rep.alpha_bcrb):
            assert np.isfinite(value) and value > 0
