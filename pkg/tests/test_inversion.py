"""Density/CDF/tail inversion, expansions, Cramer tails, support, moments."""

import math
from fractions import Fraction

import numpy as np
import pytest

from levylaw import (InversionConfig, LevyExponent, MellinLaw,
                     build_density_grid, cdf, cramer_tail, density,
                     finite_horizon_moment, small_x_coefficients,
                     small_x_series, smoothness_cap, support, tail)
from levylaw.errors import (MomentInfinite, NoCramerRoot, NotKilled,
                            OrderExceedsPoles, OutsideSupport,
                            SmoothnessCapExceeded)
from oracles import inverse_gamma_cdf, inverse_gamma_pdf, inverse_gamma_ppf


class TestCdf:
    def test_killed_drift_closed_form(self, killed_drift_laws):
        for q, law in killed_drift_laws.items():
            for x in (0.25, 0.5, 0.9):
                got = cdf(law, x).value
                assert got == pytest.approx(1 - (1 - x) ** q, abs=1e-7)

    def test_limits(self, killed_drift_laws):
        law = killed_drift_laws[1.0]
        assert cdf(law, 2.0).value == 1.0          # beyond the support edge
        assert cdf(law, -1.0).value == 0.0
        assert tail(law, 2.0).value == 0.0

    def test_dufresne_inverse_gamma(self, dufresne_law):
        # I ~ 1/Gamma(1): F(x) = e^{-1/x}
        for x in (0.3, 1.0, 5.0):
            assert cdf(dufresne_law, x).value == pytest.approx(
                float(inverse_gamma_cdf(x, 1.0)), abs=1e-9)

    def test_dufresne_tail_quantile(self, dufresne_law):
        x90 = float(inverse_gamma_ppf(0.90, 1.0))
        assert tail(dufresne_law, x90).value == pytest.approx(0.10, abs=1e-6)

    def test_monotone_and_complement(self, two_sided_law):
        xs = [0.5, 1.0, 2.0, 5.0]
        Fs = [cdf(two_sided_law, x).value for x in xs]
        assert all(b >= a - 1e-9 for a, b in zip(Fs, Fs[1:]))
        for x, F in zip(xs, Fs):
            assert tail(two_sided_law, x).value == pytest.approx(1 - F,
                                                                 abs=1e-6)


class TestDensity:
    def test_killed_drift_density(self, killed_drift_laws):
        # q=2: f(x) = 2(1-x): pointwise allowed since ceil(2)-2 = 0
        law = killed_drift_laws[2.0]
        assert density(law, 0.5, 0).value == pytest.approx(1.0, abs=1e-7)
        assert density(law, 0.25, 0).value == pytest.approx(1.5, abs=1e-7)

    def test_dufresne_density_pointwise(self, dufresne_law):
        for x in (0.5, 1.0, 3.0):
            assert density(dufresne_law, x, 0).value == pytest.approx(
                float(inverse_gamma_pdf(x, 1.0)), abs=1e-9)

    def test_derivative_against_finite_difference(self, dufresne_law):
        x, h = 1.2, 1e-4
        d1 = density(dufresne_law, x, 1).value
        fd = (density(dufresne_law, x + h, 0).value
              - density(dufresne_law, x - h, 0).value) / (2 * h)
        assert d1 == pytest.approx(fd, rel=1e-5)

    def test_cdf_derivative_matches_density(self, killed_drift_laws):
        law = killed_drift_laws[3.0]
        x, h = 0.4, 1e-4
        fd = (cdf(law, x + h).value - cdf(law, x - h).value) / (2 * h)
        assert density(law, x, 0).value == pytest.approx(fd, rel=1e-4)

    def test_smoothness_cap(self, killed_drift_laws):
        for q, law in killed_drift_laws.items():
            cap = smoothness_cap(law)
            assert cap == math.ceil(q) - 2
            with pytest.raises(SmoothnessCapExceeded):
                density(law, 0.5, cap + 1 if cap >= 0 else 0)

    def test_l2_averaged_flagged(self, killed_drift_laws):
        # 1/2 < N <= 1: grid-averaged value with the cell size disclosed
        law = killed_drift_laws[1.0]
        pv = density(law, 0.5, 0, allow_averaged=True)
        assert pv.regime.startswith("l2_averaged")
        assert pv.value == pytest.approx(1.0, abs=1e-4)

    def test_outside_support(self, killed_drift_laws):
        with pytest.raises(OutsideSupport):
            density(killed_drift_laws[1.0], -0.5, 0)
        assert density(killed_drift_laws[1.0], 1.5, 0).value == 0.0


class TestSmallX:
    def test_coefficients_match_binomial_rational(self, killed_drift_laws):
        # c_k = -Psi(0) prod_{j<k} Psi(j) / k! vs the binomial coefficients
        # of 1 - (1-x)^q, in exact rational arithmetic
        for q_float in (0.5, 1.0, 2.0, 3.0):
            q = Fraction(q_float)
            for k in range(1, 11):
                prod = Fraction(1)
                for j in range(1, k):
                    prod *= (j - q)
                ck = q * prod / math.factorial(k)
                binom = Fraction(1)
                for i in range(k):
                    binom *= (q - i) / (i + 1)
                assert ck == (-1) ** (k + 1) * binom
            got = small_x_coefficients(killed_drift_laws[q_float], 6)
            for k, c in enumerate(got, start=1):
                prod = Fraction(1)
                for j in range(1, k):
                    prod *= (j - q)
                assert c == pytest.approx(float(q * prod / math.factorial(k)),
                                          abs=1e-13)

    def test_first_coefficient_is_kill_rate(self, killed_drift_laws,
                                            killed_bm_drift_law):
        for law in (*killed_drift_laws.values(), killed_bm_drift_law):
            assert small_x_coefficients(law, 1)[0] == pytest.approx(
                law.pair.kill_rate(), rel=1e-9)

    def test_partial_sum_and_remainder(self, killed_drift_laws):
        for q, order in ((0.5, 10), (1.0, 1), (2.0, 2), (3.0, 3)):
            law = killed_drift_laws[q]
            x = 0.1
            exp = small_x_series(law, x, order)
            true = 1 - (1 - x) ** q
            assert abs(exp.value - true) <= exp.remainder_bound + 1e-12

    def test_radius_rules(self, killed_drift_laws, killed_bm_drift_law):
        # phi_plus affine, phi_minus constant bounded: radius 1/(1*1) = 1
        r = small_x_series(killed_drift_laws[1.0], 0.05, 1).radius
        assert r.convergent and r.radius == pytest.approx(1.0)
        # killed BM+drift: phi_minus unbounded: asymptotic only
        r2 = small_x_series(killed_bm_drift_law, 0.05, 3).radius
        assert not r2.convergent

    def test_requires_killing(self, dufresne_law):
        with pytest.raises(NotKilled):
            small_x_series(dufresne_law, 0.1, 3)

    def test_order_bound(self, killed_drift_laws):
        with pytest.raises(OrderExceedsPoles):
            small_x_series(killed_drift_laws[2.0], 0.1, 5)

    def test_small_x_limit_is_kill_rate(self, killed_bm_drift_law):
        # lim F(x)/x = -Psi(0) = q
        law = killed_bm_drift_law
        x = 1e-4
        assert cdf(law, x).value / x == pytest.approx(1.0, rel=2e-3)


class TestCramer:
    def test_unkilled_inverse_gamma_constant(self):
        # gamma=2.5, sigma2=2: I ~ 1/Gamma(beta), beta = 2.5:
        # Fbar(x) ~ x^{-beta} / Gamma(beta+1)
        law = MellinLaw.from_exponent(LevyExponent(sigma2=2.0, gamma=2.5))
        asym = cramer_tail(law, 0)
        beta = 2.5
        from oracles import lanczos_gamma
        expect_c = 1.0 / float(np.real(lanczos_gamma(beta + 1.0)))
        assert asym.theta == pytest.approx(-beta, abs=1e-10)
        assert asym.constant == pytest.approx(expect_c, rel=1e-8)

    def test_killed_bm_drift_vs_inversion(self, killed_bm_drift_law):
        law = killed_bm_drift_law
        asym = cramer_tail(law, 0)
        theta = (-1.0 - math.sqrt(5.0)) / 2.0
        assert asym.theta == pytest.approx(theta, abs=1e-10)
        for x in (50.0, 100.0, 200.0):
            got = tail(law, x).value
            assert x ** (-asym.theta) * got == pytest.approx(
                asym.constant, rel=0.05)

    def test_pareto_index_from_inversion(self, killed_bm_drift_law):
        # log-log slope of Fbar matches d_minus
        law = killed_bm_drift_law
        xs = np.array([50.0, 100.0, 200.0, 400.0])
        fb = np.array([tail(law, float(x)).value for x in xs])
        slope = np.polyfit(np.log(xs), np.log(fb), 1)[0]
        assert abs(slope - law.phi_minus.d_phi) < 0.1

    def test_density_asymptote(self, killed_bm_drift_law):
        law = killed_bm_drift_law
        a1 = cramer_tail(law, 1)
        x = 100.0
        f = density(law, x, 0).value
        assert f == pytest.approx(a1.evaluate(x), rel=0.05)

    def test_no_root_raises(self, dufresne_law, killed_drift_laws):
        with pytest.raises(NoCramerRoot):
            cramer_tail(killed_drift_laws[1.0], 0)   # phi_minus constant


class TestSupport:
    def test_pure_drift_point_mass(self):
        law = MellinLaw.from_exponent(LevyExponent(gamma=2.0))
        supp = support(law)
        assert supp.is_point and supp.lo == pytest.approx(0.5)
        assert cdf(law, 0.4).value == 0.0 and cdf(law, 0.6).value == 1.0

    def test_killed_drift_unit_interval(self, killed_drift_laws):
        supp = support(killed_drift_laws[1.0])
        assert supp.lo == 0.0 and supp.hi == pytest.approx(1.0)
        assert supp.closed_hi and not supp.closed_lo

    def test_bm_drift_halfline(self, dufresne_law, killed_bm_drift_law):
        for law in (dufresne_law, killed_bm_drift_law):
            supp = support(law)
            assert supp.lo == 0.0 and supp.hi == math.inf

    def test_spectrally_negative_pure_drift_plus_jumps(self):
        from levylaw import Exponential, MeasureSpec, NEGATIVE
        m = MeasureSpec(((NEGATIVE, Exponential(0.5, 2.0)),))
        law = MellinLaw.from_exponent(
            LevyExponent(gamma=2.0, levy_measure=m))
        supp = support(law)
        # phi_plus pure drift, phi_minus(inf) finite: left edge positive
        assert supp.lo > 0 and supp.hi == math.inf


class TestFiniteHorizon:
    def test_deterministic_drift_closed_form(self):
        law = MellinLaw.from_exponent(LevyExponent(gamma=1.0))
        out = finite_horizon_moment(law, 0.5, 0.01, n_paths=200, seed=5)
        expect = (1 - math.exp(-0.01)) ** -0.5
        # trapezoid-in-time carries an O(dt^2) bias even for smooth paths
        assert out["estimate"] == pytest.approx(expect, rel=1e-7)
        assert expect == pytest.approx(10.0250, abs=2e-4)

    def test_scaled_limit(self, dufresne_law):
        out = finite_horizon_moment(dufresne_law, 0.5, 1e-3,
                                    n_paths=20000, seed=11)
        assert 0.95 <= out["scaled"] <= 1.05

    def test_moment_dichotomy(self):
        from levylaw import Exponential, MeasureSpec, POSITIVE
        m = MeasureSpec(((POSITIVE, Exponential(0.5, 2.0)),))
        law = MellinLaw.from_exponent(LevyExponent(gamma=1.0, levy_measure=m))
        assert law.phi_plus.a_phi == pytest.approx(-2.0)
        with pytest.raises(MomentInfinite):
            finite_horizon_moment(law, 3.5, 0.01, n_paths=10)
        with pytest.raises(NotKilled):
            finite_horizon_moment(
                MellinLaw.from_exponent(LevyExponent(gamma=1.0, kill_rate=1.0)),
                0.5, 0.01, n_paths=10)


class TestGrid:
    def test_grid_invariants_and_regimes(self, killed_bm_drift_law):
        xs = np.geomspace(0.01, 80.0, 25)
        grid = build_density_grid(killed_bm_drift_law, xs,
                                  InversionConfig(tol=1e-8))
        assert grid.violations(tol=1e-5) == []
        assert "cramer_tail" in set(grid.regime) or \
            max(grid.x) < 50  # tail regime engages for far points

    def test_normalization_mass(self, dufresne_law):
        # int f over a composite grid + head/tail mass ~ 1 within 1e-6;
        # Simpson on a log grid so the grid rule is not the bottleneck
        from scipy.integrate import simpson
        xs = np.geomspace(2e-2, 500.0, 801)
        grid = build_density_grid(dufresne_law, xs, InversionConfig(tol=1e-8))
        mass = float(simpson(grid.f * grid.x, x=np.log(grid.x)))
        mass += grid.F[0]                       # head below the grid
        mass += grid.Fbar[-1]                   # analytic tail beyond
        assert mass == pytest.approx(1.0, abs=1e-6)

    def test_series_inversion_overlap(self, killed_drift_laws):
        # on the overlap window the series and the contour integral agree
        law = killed_drift_laws[0.5]
        for x in (0.02, 0.05, 0.1):
            series = small_x_series(law, x, 12).value
            direct = cdf(law, x).value
            assert series == pytest.approx(direct, abs=1e-6)
