"""Acceptance suite: every criterion at its stated tolerance.

Each test prints one `ACCEPTANCE <n> PASS|FAIL` line (run pytest with -s to
see them inline; they also appear in captured output on failure).

Criterion 6 is split: the Kolmogorov-Smirnov and runtime clause passes; the
moment clause compares E[I], E[I^2] against M(2), M(3) for the exponent with
sigma^2 = 2, gamma = 1, whose Mellin transform is Gamma(2 - z) -- M(2) and
M(3) are poles (E[I] = E[I^2] = infinity, since Psi(-1) = 0).  That clause is
implemented faithfully and fails honestly; see the companion moment-chain
test in tests/test_mellin.py for the same check on a law with finite moments.
"""

import math
import time
from fractions import Fraction

import numpy as np
import pytest

from levylaw import (BernsteinGamma, InversionConfig,
                     LevyExponent, MellinLaw, PathSampler, a_phi_dual,
                     build_density_grid, cdf, cramer_tail, density,
                     euler_constant, log_abs_stirling, sample_finite_horizon,
                     sample_functional, small_x_coefficients, small_x_series,
                     stirling_components, tail)
from levylaw.errors import NearPole, OutOfStrip, SmoothnessCapExceeded
from oracles import lanczos_gamma

GRID_RE = np.linspace(0.5, 6.0, 11)
GRID_IM = np.linspace(-30.0, 30.0, 11)
GRID_121 = np.array([complex(a, b) for a in GRID_RE for b in GRID_IM])


def report(n, ok, msg):
    print(f"ACCEPTANCE {n} {'PASS' if ok else 'FAIL'}: {msg}")
    assert ok, f"criterion {n}: {msg}"


@pytest.fixture(scope="module")
def three_phis(phi_identity, phi_affine, phi_expmix):
    return (phi_identity, phi_affine, phi_expmix)


def test_criterion_1_gamma_recovery(phi_identity):
    t0 = time.perf_counter()
    bg = BernsteinGamma(phi_identity)
    w = np.exp(bg.log_eval(GRID_121))
    ref = np.array([lanczos_gamma(z) for z in GRID_121])
    err = float(np.max(np.abs(w - ref) / np.abs(ref)))
    elapsed = time.perf_counter() - t0
    report(1, err <= 1e-10 and elapsed < 5.0,
           f"max rel err {err:.2e} (<=1e-10), runtime {elapsed:.2f}s (<5s), "
           f"121-point grid")


def test_criterion_2_recurrence_residuals(three_phis, dufresne_law,
                                          killed_drift_laws):
    t0 = time.perf_counter()
    worst_w = 0.0
    zs = [0.25 + 0j, 1.5 + 3j, 4.0 + 20j, 0.5 - 12j, 6.0 + 30j]
    for phi in three_phis:
        bg = BernsteinGamma(phi)
        for z in zs:
            lhs = bg.eval(z + 1.0)
            rhs = phi.phi(z) * bg.eval(z)
            worst_w = max(worst_w, abs(lhs - rhs) / abs(lhs))
    worst_m = 0.0
    for law in (dufresne_law, killed_drift_laws[1.0], killed_drift_laws[0.5]):
        for z in (0.5 + 5j, 0.25, 0.5 - 11j):
            worst_m = max(worst_m, law.recurrence_residual(z))
    elapsed = time.perf_counter() - t0
    report(2, worst_w <= 1e-9 and worst_m <= 1e-9 and elapsed < 10.0,
           f"W residual {worst_w:.2e}, M residual {worst_m:.2e} (<=1e-9), "
           f"runtime {elapsed:.2f}s (<10s)")


def test_criterion_3_killed_drift_closed_form(killed_drift_laws):
    worst = 0.0
    xs = np.arange(0.05, 0.951, 0.05)
    for q, law in killed_drift_laws.items():
        for x in xs:
            got = cdf(law, float(x)).value
            worst = max(worst, abs(got - (1 - (1 - x) ** q)))
        assert law.decay_exponent() == q
        cap = math.ceil(q) - 2
        with pytest.raises(SmoothnessCapExceeded):
            density(law, 0.5, cap + 1)
    report(3, worst <= 1e-6,
           f"max |F - (1-(1-x)^q)| = {worst:.2e} (<=1e-6) over q in "
           f"{{0.5,1,2,3}}; N_Psi exact; derivative cap enforced")


def test_criterion_4_stirling_representation(three_phis):
    worst = 0.0
    bounds_ok = True
    for phi in three_phis:
        bg = BernsteinGamma(phi)
        gam = euler_constant(phi)
        p1 = float(np.real(phi.phi(1.0)))
        d1 = float(np.real(phi.derivative(1.0, 1)))
        bounds_ok &= (-math.log(p1) - 1e-12 <= gam
                      <= d1 / p1 - math.log(p1) + 1e-12)
        w_all = np.abs(np.exp(bg.log_eval(GRID_121)))
        for z, direct in zip(GRID_121, w_all):
            stirl = math.exp(log_abs_stirling(phi, z))
            worst = max(worst, abs(stirl - direct) / direct)
            comp = stirling_components(phi, z)
            a, b = z.real, z.imag
            bounds_ok &= (-1e-12 <= comp.A <= math.pi / 2 * abs(b) + 1e-12)
            bounds_ok &= abs(comp.E) <= 19.0 / (8 * a) + 1e-12
            bounds_ok &= abs(comp.R) <= 0.75 + 1e-12
    report(4, worst <= 1e-9 and bounds_ok,
           f"max |exp(log_abs_stirling) - |W|| / |W| = {worst:.2e} (<=1e-9); "
           f"bounds |E|<=19/8a, |R|<=3/4, A in [0, pi|b|/2], "
           f"euler bracket all hold: {bounds_ok}")


def test_criterion_5_T_constant(phi_identity):
    comp = stirling_components(phi_identity, 1.0 + 0j)
    expect = 1.0 - math.log(math.sqrt(2.0 * math.pi))
    err = abs(comp.T - expect)
    report(5, err <= 1e-6,
           f"T_phi(id) = {comp.T:.10f} vs 1 - ln sqrt(2 pi) = {expect:.10f}, "
           f"|diff| = {err:.2e} (<=1e-6)")


@pytest.fixture(scope="module")
def dufresne_mc(dufresne_law):
    t0 = time.perf_counter()
    sampler = PathSampler(dufresne_law.exponent, dt=5e-3, rng_seed=20260806)
    emp = sample_functional(sampler, 100000)
    return emp, time.perf_counter() - t0


def test_criterion_6_dufresne_ks_and_runtime(dufresne_law, dufresne_mc):
    emp, mc_time = dufresne_mc
    t0 = time.perf_counter()
    xs = np.geomspace(float(emp.samples[0]) * 0.9,
                      float(emp.samples[-1]) * 1.1, 400)
    grid = build_density_grid(dufresne_law, xs, InversionConfig(tol=1e-8))
    from levylaw import compare
    rep = compare(grid, emp)
    elapsed = mc_time + time.perf_counter() - t0
    crit = 1.36 / math.sqrt(emp.n)
    report(6, rep["ks_statistic"] < crit and elapsed < 60.0,
           f"KS = {rep['ks_statistic']:.5f} < 1.36/sqrt(n) = {crit:.5f} "
           f"(n = {emp.n}); runtime {elapsed:.1f}s (<60s)")


def test_criterion_6_dufresne_moment_clause(dufresne_law, dufresne_mc):
    """Faithful implementation of the moment clause; fails honestly.

    For gamma = 1, sigma^2 = 2 the transform is M(z) = Gamma(2 - z): z = 2
    and z = 3 are poles (Psi(-1) = 0 makes the recurrence product diverge),
    so E[I] = E[I^2] = infinity and no sample mean can sit within three
    standard errors of them.
    """
    emp, _ = dufresne_mc
    ok = True
    detail = []
    for k, z in ((1, 2.0), (2, 3.0)):
        est, se = emp.moment(k)
        try:
            target = dufresne_law.mellin_eval(z, near_pole="raise")
            target = float(np.real(target))
            within = abs(est - target) <= 3 * se
            detail.append(f"E[I^{k}]={est:.3f} vs M({int(z)})={target:.3f} "
                          f"(3se={3*se:.3f}) {'ok' if within else 'off'}")
            ok &= within
        except (NearPole, OutOfStrip) as exc:
            ok = False
            detail.append(f"M({int(z)}) is a pole of this law "
                          f"({type(exc).__name__}); E[I^{k}] is infinite")
    report(6, ok, "moment clause: " + "; ".join(detail))


def test_criterion_7_small_x_expansion(killed_drift_laws):
    # rational arithmetic: the first 10 coefficients equal the binomial ones
    for q_float in (0.5, 1.0, 2.0, 3.0):
        q = Fraction(q_float)
        law = killed_drift_laws[q_float]
        floats = small_x_coefficients(law, 10)
        for k in range(1, 11):
            prod = Fraction(1)
            for j in range(1, k):
                prod *= j - q
            exact = q * prod / math.factorial(k)
            binom = Fraction(1)
            for i in range(k):
                binom *= (q - i) / (i + 1)
            assert exact == (-1) ** (k + 1) * binom
            assert abs(floats[k - 1] - float(exact)) <= 1e-13 * (1 + abs(exact))
    # remainder bound honored at x = 0.1
    honored = True
    details = []
    for q_float, order in ((0.5, 10), (1.0, 1), (2.0, 2), (3.0, 3)):
        law = killed_drift_laws[q_float]
        exp = small_x_series(law, 0.1, order)
        true = 1 - 0.9 ** q_float
        gap = abs(exp.value - true)
        honored &= gap <= exp.remainder_bound + 1e-12
        details.append(f"q={q_float}: |rem|={gap:.1e}<=bound="
                       f"{exp.remainder_bound:.1e}")
    report(7, honored, "coefficients = binomial (Fractions, 10 terms); "
           + "; ".join(details))


def test_criterion_8_density_at_zero():
    ok = True
    details = []
    for q in (1.0, 2.0):
        law = MellinLaw.from_exponent(
            LevyExponent(sigma2=2.0, gamma=1.0, kill_rate=q))
        f0 = density(law, 1e-4, 0).value
        rel = abs(f0 - q) / q
        ok &= rel <= 0.01
        details.append(f"q={q}: f(1e-4)={f0:.5f}, rel err {rel:.2e}")
    report(8, ok, "; ".join(details) + " (<=1% of -Psi(0)=q)")


def test_criterion_9_cramer_tail(killed_bm_drift_law):
    law = killed_bm_drift_law
    asym = cramer_tail(law, 0)
    ok = True
    details = [f"theta={asym.theta:.6f}"]
    for x in (50.0, 100.0, 200.0):
        got = tail(law, x).value * x ** (-asym.theta)
        rel = abs(got - asym.constant) / asym.constant
        ok &= rel <= 0.05
        details.append(f"x={x:.0f}: rel {rel:.3f}")
    xs = np.array([50.0, 100.0, 200.0, 400.0])
    fb = np.array([tail(law, float(x)).value for x in xs])
    slope = float(np.polyfit(np.log(xs), np.log(fb), 1)[0])
    slope_ok = abs(slope - asym.theta) <= 0.1
    ok &= slope_ok
    report(9, ok, "; ".join(details)
           + f"; log-log slope {slope:.4f} within 0.1 of theta")


def test_criterion_10_finite_horizon(dufresne_law):
    sampler = PathSampler(dufresne_law.exponent, dt=3e-5, rng_seed=77)
    emp = sample_finite_horizon(sampler, 1e-3, 100000)
    ok = True
    details = []
    for a in (0.25, 0.5):
        est, _ = emp.moment(-a)
        scaled = 1e-3 ** a * est
        ok &= 0.95 <= scaled <= 1.05
        details.append(f"a={a}: t^a E[I(t)^-a] = {scaled:.4f}")
    report(10, ok, "; ".join(details) + " (in [0.95, 1.05], 1e5 paths)")


def test_criterion_11_factorization(dufresne_law):
    law = dufresne_law
    ok = True
    details = []
    # Mellin product of the two components
    worst = 0.0
    for z in (0.5, 0.3 + 2j, 0.8 - 5j):
        mi, mx, _, _ = law.factorization_components(z, n_factors=2)
        worst = max(worst, abs(mi * mx - law.mellin_eval(z)))
    ok &= worst <= 1e-9
    details.append(f"two-factor product err {worst:.1e} (<=1e-9)")
    # infinite product with 200 factors (Euler-Maclaurin-accelerated limit)
    m_half = law.mellin_eval(0.5)
    _, _, partial, acc = law.factorization_components(0.5, n_factors=200)
    raw_trend = abs(partial[99] - m_half) > abs(partial[-1] - m_half)
    prod_err = abs(acc - m_half)
    ok &= prod_err <= 1e-6 and raw_trend
    details.append(f"200-factor product err {prod_err:.1e} (<=1e-6)")
    # sampler-level check: inverse-CDF samples of X_minus vs direct paths
    n = 20000
    direct = sample_functional(
        PathSampler(law.exponent, dt=5e-3, rng_seed=31), n)
    xs = np.geomspace(5e-3, 2e4, 400)
    grid = build_density_grid(law, xs, InversionConfig(tol=1e-8))
    from scipy.interpolate import PchipInterpolator
    from scipy.stats import ks_2samp
    Fs = np.maximum.accumulate(np.clip(grid.F, 0.0, 1.0))
    keep = np.concatenate([[True], np.diff(Fs) > 1e-14])
    inv_cdf = PchipInterpolator(Fs[keep], np.log(grid.x[keep]))
    rng = np.random.default_rng(41)
    u = rng.uniform(float(Fs[0]), float(Fs[-1]), size=n)
    product_samples = 1.0 * np.exp(inv_cdf(u))   # I_{phi_plus} = 1 a.s.
    stat = ks_2samp(direct.samples, product_samples).statistic
    crit = 1.36 * math.sqrt(2.0 / n)
    ok &= stat < crit
    details.append(f"sampler KS {stat:.5f} < {crit:.5f}")
    report(11, ok, "; ".join(details))


def test_criterion_12_A_dual_representation(three_phis):
    worst = 0.0
    for phi in three_phis:
        for a, b in ((1.0, 5.0), (2.0, 20.0), (0.5, 50.0)):
            direct = stirling_components(phi, complex(a, b)).A
            dual = a_phi_dual(phi, complex(a, b))
            worst = max(worst, abs(direct - dual))
    report(12, worst <= 1e-6,
           f"max |A_arg - A_dual| = {worst:.2e} (<=1e-6) at "
           f"(a,b) in {{(1,5),(2,20),(0.5,50)}} for three phi")
