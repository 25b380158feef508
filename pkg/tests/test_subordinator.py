"""Tempered-stable Sato subordinator tests.

Every analytic formula is checked against an independent route: the inverse
Gaussian closed forms, brute-force quadrature of the Levy density, numerical
differentiation of the scaled marginal, or sampling statistics.
"""

import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import gamma as spgamma

from addsub.numerics import RngStream, finite_diff_derivative, integrate, invert_cf_to_cdf
from addsub.subordinator import (
    SatoSubordinatorSpec,
    TemperedStableSpec,
    etas_log_cf,
    frozen_levy_log_cf,
    increment_law,
    increment_sampler,
    levy_density_t,
    marginal_levy_density,
    sample_increment,
    sato_marginal_cf,
    self_similarity_check,
    truncated_first_moment,
)

XI_GRID = np.linspace(-8.0, 8.0, 33)


def ig_sub(lam=1.0, beta=1.0, rho=1.5, t0=0.0, k=1):
    comp = TemperedStableSpec.from_ig(lam, beta)
    return SatoSubordinatorSpec((comp,) * k, rho, t0)


class TestSpecs:
    @pytest.mark.parametrize("alpha", [0.0, 1.0, 1.2, -0.3])
    def test_alpha_range(self, alpha):
        with pytest.raises(ValueError):
            TemperedStableSpec(alpha, 1.0, 1.0)

    def test_positive_params(self):
        with pytest.raises(ValueError):
            TemperedStableSpec(0.5, 0.0, 1.0)
        with pytest.raises(ValueError):
            TemperedStableSpec(0.5, 1.0, -1.0)

    def test_regularization_rule(self):
        with pytest.raises(ValueError):
            SatoSubordinatorSpec((TemperedStableSpec(0.5, 1.0, 1.0),), 0.8, 0.0)
        assert SatoSubordinatorSpec((TemperedStableSpec(0.5, 1.0, 1.0),), 0.8).t0 == 0.1
        assert SatoSubordinatorSpec((TemperedStableSpec(0.5, 1.0, 1.0),), 1.5).t0 == 0.0
        with pytest.raises(ValueError):
            SatoSubordinatorSpec((TemperedStableSpec(0.5, 1.0, 1.0),), -1.0)

    def test_ig_bridge_roundtrip(self):
        comp = TemperedStableSpec.from_ig(1.3, 2.1)
        assert comp.ig_params() == pytest.approx((1.3, 2.1))

    def test_moments_vs_levy_quadrature(self):
        # oracle: moments of the Levy density lam e^{-beta s} s^{-1-alpha}
        comp = TemperedStableSpec(0.5, 4.0, 1.0)
        m1 = quad(lambda s: s * comp.lam * math.exp(-comp.beta * s) * s ** -1.5,
                  0, np.inf)[0]
        m2 = quad(lambda s: s ** 2 * comp.lam * math.exp(-comp.beta * s) * s ** -1.5,
                  0, np.inf)[0]
        assert comp.mean == pytest.approx(m1, rel=1e-9)
        assert comp.var == pytest.approx(m2, rel=1e-9)


class TestLogCf:
    def test_normalization(self):
        comp = TemperedStableSpec(0.3, 2.0, 0.7)
        assert etas_log_cf(comp, 0.0) == 0.0

    def test_matches_ig_closed_form(self):
        # alpha = 1/2 equals the IG log-CF under the parameter bridge
        lam_ig, beta_ig = 1.3, 2.1
        comp = TemperedStableSpec.from_ig(lam_ig, beta_ig)
        target = -lam_ig * (np.sqrt(beta_ig - 2j * XI_GRID) - math.sqrt(beta_ig))
        np.testing.assert_allclose(etas_log_cf(comp, XI_GRID), target, atol=1e-13)

    def test_explicit_half_alpha_form(self):
        # lam * Gamma(-1/2) = -2 sqrt(pi) lam
        comp = TemperedStableSpec(0.5, 3.0, 0.8)
        target = -2.0 * math.sqrt(math.pi) * comp.lam * (
            np.sqrt(comp.beta - 1j * XI_GRID) - math.sqrt(comp.beta))
        np.testing.assert_allclose(etas_log_cf(comp, XI_GRID), target, atol=1e-13)

    def test_first_order_term_is_mean(self):
        # d/dxi log cf at 0 equals i * mean, mean = lam Gamma(1-a) beta^(a-1)
        comp = TemperedStableSpec(0.5, 4.0, 1.0)
        h = 1e-7
        deriv = (etas_log_cf(comp, h) - etas_log_cf(comp, -h)) / (2.0 * h)
        assert deriv == pytest.approx(1j * comp.mean, abs=1e-7)

    def test_real_part_nonpositive(self):
        comp = TemperedStableSpec(0.7, 0.5, 2.0)
        vals = etas_log_cf(comp, XI_GRID)
        assert np.all(vals.real <= 1e-15)
        nonzero = XI_GRID != 0.0
        assert np.all(vals.real[nonzero] < 0.0)

    def test_hermitian_symmetry(self):
        comp = TemperedStableSpec(0.4, 1.5, 1.1)
        np.testing.assert_allclose(etas_log_cf(comp, -XI_GRID),
                                   np.conj(etas_log_cf(comp, XI_GRID)), atol=1e-14)


class TestMarginalCf:
    def test_zero_time(self):
        sub = ig_sub()
        np.testing.assert_allclose(sato_marginal_cf(sub, 0, 0.0, XI_GRID), 1.0, atol=1e-14)

    def test_unregularized_definition(self):
        sub = ig_sub(rho=1.5, t0=0.0)
        t = 1.7
        target = np.exp(etas_log_cf(sub.components[0], t ** 1.5 * XI_GRID))
        np.testing.assert_allclose(sato_marginal_cf(sub, 0, t, XI_GRID), target, atol=1e-14)

    def test_ig_sato_frozen_value(self):
        # exp(-(sqrt(1 - 0.6i) - 1)), from the IG closed form at t^rho = 1
        sub = ig_sub(lam=1.0, beta=1.0, rho=1.5, t0=0.0)
        val = complex(sato_marginal_cf(sub, 0, 1.0, 0.3))
        assert val == pytest.approx(0.9204849123585852 + 0.27294346631576677j, abs=1e-12)

    def test_cf_bounded(self):
        sub = ig_sub(rho=0.7, t0=0.2)
        vals = sato_marginal_cf(sub, 0, 2.0, XI_GRID)
        assert np.all(np.abs(vals) <= 1.0 + 1e-12)


class TestIncrementLaw:
    def test_degenerate(self):
        law = increment_law(ig_sub(), 0, 1.0, 1.0)
        np.testing.assert_allclose(law.cf(XI_GRID), 1.0, atol=1e-15)
        assert law.degenerate

    def test_composition_identity(self):
        # Chapman-Kolmogorov in CF form: exact exponent identity
        sub = ig_sub(rho=1.2, t0=0.3)
        c01 = increment_law(sub, 0, 0.0, 1.0).cf(XI_GRID)
        c12 = increment_law(sub, 0, 1.0, 2.0).cf(XI_GRID)
        c02 = increment_law(sub, 0, 0.0, 2.0).cf(XI_GRID)
        np.testing.assert_allclose(c01 * c12, c02, atol=1e-12)

    def test_increment_from_zero_is_marginal(self):
        sub = ig_sub(t0=0.0)
        law = increment_law(sub, 0, 0.0, 1.0)
        np.testing.assert_allclose(law.cf(XI_GRID),
                                   sato_marginal_cf(sub, 0, 1.0, XI_GRID), atol=1e-14)

    def test_ordering_validation(self):
        with pytest.raises(ValueError):
            increment_law(ig_sub(), 0, 2.0, 1.0)

    def test_moments_vs_cf_derivative(self):
        law = increment_law(ig_sub(rho=1.3, t0=0.1), 0, 0.5, 2.0)
        h = 1e-4
        d1 = complex((law.log_cf(h) - law.log_cf(-h)) / (2.0 * h))
        d2 = complex((law.log_cf(h) - 2.0 * law.log_cf(0.0) + law.log_cf(-h)) / h ** 2)
        assert d1.imag == pytest.approx(law.mean, rel=1e-6)
        assert -d2.real == pytest.approx(law.var, rel=1e-4)

    def test_laplace_real(self):
        law = increment_law(ig_sub(), 0, 0.0, 1.5)
        vals = law.laplace(np.array([0.0, 0.5, 3.0]))
        assert vals[0] == pytest.approx(1.0)
        assert np.all(np.diff(vals) < 0.0)

    def test_chernoff_bound_covers_tail(self):
        law = increment_law(ig_sub(), 0, 0.0, 1.0)
        x_hi = law.chernoff_x_hi(1e-9)
        assert invert_cf_to_cdf(law.cf, x_hi).value > 1.0 - 1e-8


class TestLevyDensity:
    SUB = SatoSubordinatorSpec((TemperedStableSpec(0.5, 2.0, 1.0),), 1.2, 0.0)

    def test_time_derivative_identity(self):
        # nu(t, s) equals d/dt of the scaled marginal Levy density
        for s in (0.5, 0.1, 2.0):
            res = finite_diff_derivative(
                lambda t: float(marginal_levy_density(self.SUB, 0, t, s)), 1.0)
            assert res.ok
            assert float(levy_density_t(self.SUB, 0, 1.0, s)) == pytest.approx(
                res.value, abs=1e-7)

    def test_exponential_tail_decay(self):
        v = levy_density_t(self.SUB, 0, 1.0, np.array([5.0, 10.0, 20.0, 40.0]))
        assert np.all(np.diff(np.log(v)) < -5.0)

    def test_integrability_one_wedge(self):
        # int (1 ^ s) nu(t, ds) < inf despite the s^{-1-alpha} singularity
        res = integrate(lambda s: min(s, 1.0) * float(levy_density_t(self.SUB, 0, 1.0, s)),
                        (0.0, np.inf))
        assert math.isfinite(res.value) and res.value > 0.0

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            levy_density_t(self.SUB, 0, 1.0, -0.5)
        with pytest.raises(ValueError):
            levy_density_t(self.SUB, 0, -1.0, 0.5)

    def test_truncated_first_moment_vs_quadrature(self):
        sub = SatoSubordinatorSpec((TemperedStableSpec(0.5, 2.0, 1.3),), 1.5, 0.0)
        for eps in (1e-6, 1e-2, 1.0):
            oracle = quad(lambda s: s * float(levy_density_t(sub, 0, 0.7, s)),
                          0.0, eps, points=[0.0])[0]
            assert truncated_first_moment(sub, 0, 0.7, eps) == pytest.approx(
                oracle, rel=1e-9)

    def test_frozen_exponent_vs_quadrature(self):
        # oracle: int (e^{i xi s} - 1) nu(tau, ds) by direct quadrature
        sub = SatoSubordinatorSpec((TemperedStableSpec(0.5, 2.0, 1.3),), 1.5, 0.0)
        tau, xi = 0.7, 1.7
        re = quad(lambda s: (math.cos(xi * s) - 1.0) * float(levy_density_t(sub, 0, tau, s)),
                  0, np.inf)[0]
        im = quad(lambda s: math.sin(xi * s) * float(levy_density_t(sub, 0, tau, s)),
                  0, np.inf)[0]
        assert complex(frozen_levy_log_cf(sub, 0, tau, 1.0, xi)) == pytest.approx(
            re + 1j * im, abs=1e-9)


class TestSampling:
    def test_degenerate_increment(self):
        assert sample_increment(ig_sub(), 0, 1.0, 1.0, RngStream(1)) == 0.0

    def test_non_negative_and_monotone_paths(self):
        sub = ig_sub(rho=1.2)
        gen = RngStream(7).generator()
        sampler01 = increment_sampler(sub, 0, 0.0, 0.5)
        sampler12 = increment_sampler(sub, 0, 0.5, 1.5)
        a = sampler01.sample(gen, 4000)
        b = sampler12.sample(gen, 4000)
        assert np.all(a >= 0.0) and np.all(b >= 0.0)
        assert np.all(a + b >= a)

    def test_inverse_cdf_ks_against_inversion(self):
        # empirical CDF of draws vs the Gil-Pelaez CDF at the 99% KS band
        sub = ig_sub()
        law = increment_law(sub, 0, 0.0, 1.0)
        n = 100_000
        draws = increment_sampler(sub, 0, 0.0, 1.0).sample(RngStream(2025).generator(), n)
        xs = np.sort(draws)
        probe = np.linspace(xs[n // 200], xs[-n // 200], 60)
        ecdf = np.searchsorted(xs, probe, side="right") / n
        F = np.array([invert_cf_to_cdf(law.cf, float(x)).value for x in probe])
        assert np.max(np.abs(ecdf - F)) < 1.63 / math.sqrt(n)

    def test_frozen_levy_converges_to_exact(self):
        # partition refinement shrinks both the KS distance to the exact
        # sampler and the (provably negative) mean bias of the frozen scheme
        sub = ig_sub(rho=1.5)
        n = 20_000
        law = increment_law(sub, 0, 0.5, 1.5)
        exact = increment_sampler(sub, 0, 0.5, 1.5).sample(RngStream(11).generator(), n)
        ks, means = {}, {}
        for m in (4, 16):
            fr = increment_sampler(sub, 0, 0.5, 1.5, "frozen-levy", m).sample(
                RngStream(12, 100 + m).generator(), n)
            pooled = np.sort(np.concatenate([exact, fr]))
            fa = np.searchsorted(np.sort(exact), pooled, side="right") / n
            fb = np.searchsorted(np.sort(fr), pooled, side="right") / n
            ks[m] = np.max(np.abs(fa - fb))
            means[m] = fr.mean()
        assert ks[4] > ks[16]
        assert means[4] < means[16] < law.mean + 0.02

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            sample_increment(ig_sub(), 0, 0.0, 1.0, RngStream(1), method="bogus")


class TestSelfSimilarity:
    def test_identical_law_at_unit_time(self):
        ks = self_similarity_check(ig_sub(), 0, 1.0, 20_000, RngStream(3))
        assert ks < 1.63 * math.sqrt(2.0 / 20_000)

    def test_scaling_at_t2(self):
        ks = self_similarity_check(ig_sub(rho=1.5), 0, 2.0, 20_000, RngStream(4))
        assert ks < 1.63 * math.sqrt(2.0 / 20_000)

    def test_requires_unregularized(self):
        with pytest.raises(ValueError):
            self_similarity_check(ig_sub(rho=0.8, t0=0.1), 0, 2.0, 100, RngStream(5))
