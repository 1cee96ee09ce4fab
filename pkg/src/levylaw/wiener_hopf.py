"""Wiener-Hopf factorization Psi(z) = -phi_plus(-z) phi_minus(z).

Supported classes
-----------------
* ``rational``          -- sigma^2 >= 0, drift, killing, exponential-mixture
                           jumps: the factors are rational Bernstein functions
                           obtained by splitting the zeros of Psi by the sign
                           of their real part (conjugate pairs stay together);
* ``brownian_drift``    -- the quadratic special case, tagged separately;
* ``spectrally_negative`` -- no positive jumps, unkilled, non-negative mean:
                           phi_plus(z) = z, phi_minus(z) = Psi(z)/z with an
                           exact triplet (Pi-bar as the descending density);
* ``explicit``          -- a user-supplied pair, validated only.

The factors are unique up to (c phi_plus, phi_minus / c); we fix phi_plus to
be monic (leading coefficient one) so every example in the docs reproduces the
familiar textbook pairs, and all exposed law-level quantities downstream are
normalization invariant.

The module also hosts the potential-density series u(y) for factors with
positive drift and the friendly-inverse (Vigon) reconstruction of the
descending tail from it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

from .bernstein import BernsteinFunction
from .errors import (FactorValidationFailure, NotBernstein, SeriesDivergence,
                     UnsupportedClass)
from .levyexp import LevyExponent
from .measures import (NEGATIVE, POSITIVE, Atom, Exponential, MeasureSpec,
                       PolyDensity)

GRID_POINTS = 64
GRID_BMAX = 50.0
GRID_TOL = 1e-9


@dataclass(frozen=True)
class FactorPair:
    phi_plus: BernsteinFunction
    phi_minus: BernsteinFunction
    normalization: float
    class_tag: str

    def psi(self, z):
        """-phi_plus(-z) phi_minus(z): the exponent induced by the pair."""
        z = np.asarray(z, dtype=complex)
        out = -self.phi_plus.phi(-z) * self.phi_minus.phi(z)
        return out if out.shape else complex(out)

    def rescaled(self, c):
        if c <= 0:
            raise ValueError("rescaling constant must be positive")
        return FactorPair(self.phi_plus.scaled(c), self.phi_minus.scaled(1.0 / c),
                          self.normalization * c, self.class_tag)

    @property
    def in_finiteness_class(self):
        """Psi in N: the perpetuity is finite a.s. iff phi_minus(0) > 0."""
        return self.phi_minus.kappa > 0

    def kill_rate(self):
        return self.phi_plus.kappa * self.phi_minus.kappa


def grid_identity_residual(exponent: LevyExponent, pair: FactorPair,
                           n=GRID_POINTS, b_max=GRID_BMAX):
    """max over z = ib of |Psi(z) + phi_plus(-z) phi_minus(z)| / (1 + |Psi(z)|)."""
    b = np.linspace(-b_max, b_max, n)
    z = 1j * b
    psi = exponent.psi(z, check_strip=False)
    rec = pair.psi(z)
    return float(np.max(np.abs(psi - rec) / (1.0 + np.abs(psi))))


def bernstein_violations(phi: BernsteinFunction, u_grid=None):
    """Numeric probes of Bernstein-function behaviour; returns messages."""
    if u_grid is None:
        u_grid = np.geomspace(1e-3, 1e3, 31)
    bad = []
    vals = np.real(phi.phi(u_grid))
    d1 = np.real(phi.derivative(u_grid, 1))
    d2 = np.real(phi.derivative(u_grid, 2))
    tol = 1e-10 * np.maximum(1.0, np.abs(vals))
    if np.any(vals < -tol):
        bad.append("phi negative on (0, inf)")
    if np.any(d1 < -1e-12):
        bad.append("phi not increasing")
    if np.any(u_grid * d1 > vals + tol):
        bad.append("u phi'(u) <= phi(u) violated")
    if np.any(np.abs(d2) > 2 * vals / u_grid**2 + tol):
        bad.append("|phi''(u)| <= 2 phi(u)/u^2 violated")
    b = np.linspace(-25, 25, 21)
    a = 1.0 + max(0.0, phi.d_phi)
    zz = a + 1j * b
    w = phi.phi(zz)
    if np.any(np.real(w) < np.real(phi.phi(a)) - 1e-9 * np.abs(w)):
        bad.append("Re phi(a+ib) >= phi(a) violated")
    if np.any(np.abs(np.angle(w)) > np.abs(np.angle(zz)) + 1e-9):
        bad.append("|arg phi(z)| <= |arg z| violated")
    return bad


# -- rational factorization ----------------------------------------------------


def _poly_mul(p, q):
    return np.convolve(p, q)


def _psi_numerator(exponent: LevyExponent):
    """(N, pos_rates, neg_rates): Psi(z) = N(z) / prod(lam-z) prod(lam'+z)."""
    pos, neg = [], []
    for side, comp in exponent.levy_measure.components:
        if isinstance(comp, Exponential):
            (pos if side == POSITIVE else neg).append(comp)
        else:
            raise UnsupportedClass(
                "rational factorization needs exponential-mixture jumps; "
                "nearest supported class: spectrally_negative (tabulated "
                "negative jumps) or explicit")
    pos_d = [np.array([-1.0, c.rate]) for c in pos]       # (lam - z)
    neg_d = [np.array([1.0, c.rate]) for c in neg]        # (lam + z)
    den = np.array([1.0])
    for p in pos_d + neg_d:
        den = _poly_mul(den, p)
    # polynomial part: sigma^2/2 z^2 + gamma z - q
    base = np.array([0.5 * exponent.sigma2, exponent.gamma, -exponent.kill_rate])
    num = _poly_mul(np.trim_zeros(base, "f") if np.any(base) else np.array([0.0]),
                    den)
    for i, c in enumerate(pos):
        other = np.array([1.0])
        for j, p in enumerate(pos_d):
            if j != i:
                other = _poly_mul(other, p)
        for p in neg_d:
            other = _poly_mul(other, p)
        num = np.polyadd(num, _poly_mul(np.array([c.weight, 0.0]), other))
    for i, c in enumerate(neg):
        other = np.array([1.0])
        for p in pos_d:
            other = _poly_mul(other, p)
        for j, p in enumerate(neg_d):
            if j != i:
                other = _poly_mul(other, p)
        num = np.polyadd(num, _poly_mul(np.array([-c.weight, 0.0]), other))
    return num, [c.rate for c in pos], [c.rate for c in neg]


def _split_zero_roots(roots, exponent, scale):
    """Cluster roots at the origin and assign them to the factors."""
    tol = 1e-9 * scale
    at_zero = [r for r in roots if abs(r) < tol]
    rest = [r for r in roots if abs(r) >= tol]
    n_plus = n_minus = 0
    if len(at_zero) == 1:
        mean = float(np.real(exponent.psi_derivative(0.0, 1)))
        if mean > 0:
            n_plus = 1     # drifts to +inf: ascending ladder unkilled
        else:
            n_minus = 1    # drifts to -inf (or zero-mean edge)
    elif len(at_zero) == 2:
        n_plus = n_minus = 1   # oscillating: both ladders unkilled
    elif len(at_zero) > 2:
        raise FactorValidationFailure("more than a double root at the origin")
    return rest, n_plus, n_minus


def _real_poly_from_roots(roots):
    p = np.array([1.0 + 0j])
    for r in roots:
        p = _poly_mul(p, np.array([1.0, r], dtype=complex))
    if np.max(np.abs(p.imag)) > 1e-9 * max(1.0, np.max(np.abs(p.real))):
        raise FactorValidationFailure("conjugate root pairing failed")
    return p.real


def _partial_fractions_bernstein(num, den_rates, tag):
    """Bernstein triplet of P(u) / prod(u + lam) with P real, deg P <= deg+1."""
    den = np.array([1.0])
    for lam in den_rates:
        den = _poly_mul(den, np.array([1.0, lam]))
    dn, dd = len(num) - 1, len(den) - 1
    if dn > dd + 1:
        raise NotBernstein(f"{tag}: numerator degree too high")
    quot, rem = (np.polydiv(num, den) if dn >= dd else
                 (np.zeros(1), num))
    delta = float(quot[0]) if len(quot) == 2 else 0.0
    c_inf = float(quot[-1]) if len(quot) >= 1 and dn >= dd else 0.0
    if delta < -1e-12:
        raise NotBernstein(f"{tag}: negative drift")
    delta = max(delta, 0.0)
    weights = []
    for lam in den_rates:
        others = np.array([1.0])
        for mu in den_rates:
            if mu != lam:
                others = _poly_mul(others, np.array([1.0, mu]))
        res = np.polyval(rem, -lam) / np.polyval(others, -lam)
        b = -res / lam
        if b < -1e-10 * (1.0 + abs(c_inf)):
            raise NotBernstein(f"{tag}: negative mixture weight at rate {lam}")
        weights.append((max(float(b), 0.0), lam))
    kappa = c_inf - sum(w for w, _ in weights)
    if kappa < -1e-10 * (1.0 + abs(c_inf)):
        raise NotBernstein(f"{tag}: negative phi(0)")
    kappa = max(kappa, 0.0)
    mix = [(w, lam) for w, lam in weights if w > 0]
    mu = MeasureSpec.one_sided(*(Exponential(w, lam) for w, lam in mix))
    return BernsteinFunction(kappa, delta, mu)


def _factorize_rational(exponent: LevyExponent):
    num, pos_rates, neg_rates = _psi_numerator(exponent)
    num = np.trim_zeros(num, "f")
    if len(num) == 0:
        raise UnsupportedClass("Psi is identically zero")
    roots = np.roots(num) if len(num) > 1 else np.array([])
    scale = 1.0 + max([abs(r) for r in roots] + pos_rates + neg_rates, default=1.0)
    roots, n0_plus, n0_minus = _split_zero_roots(list(roots), exponent, scale)
    plus_roots, minus_roots = [], []
    for r in roots:
        if r.real > 0:
            plus_roots.append(r)       # phi_plus factor (u + r)
        elif r.real < 0:
            minus_roots.append(-r)     # phi_minus factor (u - r) = (u + |..|)
        else:
            raise FactorValidationFailure(
                f"purely imaginary zero of Psi at {r}: lattice-type exponent")
    p_plus = _real_poly_from_roots(plus_roots + [0.0] * n0_plus)
    p_minus = _real_poly_from_roots(minus_roots + [0.0] * n0_minus)
    # normalization: phi_plus monic; phi_minus absorbs the matching constant
    z0 = 0.7321j
    denom_p = np.polyval(p_plus, -z0)
    for lam in pos_rates:
        denom_p = denom_p / (lam - z0)
    denom_m = np.polyval(p_minus, z0)
    for lam in neg_rates:
        denom_m = denom_m / (lam + z0)
    ratio = exponent.psi(z0, check_strip=False) / (-denom_p * denom_m)
    if abs(ratio.imag) > 1e-9 * abs(ratio) or ratio.real <= 0:
        raise FactorValidationFailure(
            f"normalization constant not positive real: {ratio}")
    c = float(ratio.real)
    phi_plus = _partial_fractions_bernstein(p_plus, pos_rates, "phi_plus")
    phi_minus = _partial_fractions_bernstein(c * p_minus, neg_rates, "phi_minus")
    tag = "brownian_drift" if (exponent.sigma2 > 0
                               and not exponent.has_jumps()) else "rational"
    return FactorPair(phi_plus, phi_minus, c, tag)


# -- spectrally negative class ---------------------------------------------------


def _descending_measure_from_pi(levy_measure: MeasureSpec):
    """mu_minus(dy) = Pi-bar_minus(y) dy, represented exactly.

    The descending-ladder density of an unkilled spectrally negative
    exponent is the tail of the negative jump measure; exponential tails map
    to exponential components, atom/tabulated tails to linear-density pieces,
    so the identity Psi(z) = z phi_minus(z) holds to machine precision.
    """
    comps = []
    for side, comp in levy_measure.components:
        if side != NEGATIVE:
            continue
        if isinstance(comp, Exponential):
            # Pi-bar contribution w e^{-lam y}: exponential density w/lam
            comps.append(Exponential(comp.weight / comp.rate, comp.rate))
        elif isinstance(comp, Atom):
            # Pi-bar = w 1{y <= x0}: constant density on [0, x0]
            comps.append(PolyDensity(0.0, comp.location, comp.weight, 0.0))
        else:
            g = list(comp.grid)
            t = list(comp.tail)
            if g[0] > 0:
                g.insert(0, 0.0)
                t.insert(0, t[0])
            for i in range(len(g) - 1):
                lo, hi = g[i], g[i + 1]
                c1 = (t[i + 1] - t[i]) / (hi - lo)
                if t[i] > 0 or t[i + 1] > 0:
                    comps.append(PolyDensity(lo, hi, t[i], c1))
    return MeasureSpec.one_sided(*comps)


def _factorize_spectrally_negative(exponent: LevyExponent):
    mean = float(np.real(exponent.psi_derivative(0.0, 1)))
    if mean < 0:
        raise UnsupportedClass(
            "spectrally negative exponent drifts to -infinity; the pair "
            "phi_plus = id requires a non-negative mean")
    mu_minus = _descending_measure_from_pi(exponent.levy_measure)
    phi_minus = BernsteinFunction(mean, 0.5 * exponent.sigma2, mu_minus)
    return FactorPair(BernsteinFunction.identity(), phi_minus, 1.0,
                      "spectrally_negative")


# -- public API --------------------------------------------------------------------


def factorize(exponent: LevyExponent) -> FactorPair:
    """Factor Psi into a validated Bernstein pair.

    Dispatch: rational classes (Brownian/drift/killing + exponential-mixture
    jumps) go through the root-splitting factorizer; spectrally negative
    unkilled exponents with general negative jumps use phi_plus(z) = z.
    Anything else raises :class:`UnsupportedClass` naming the nearest class.
    """
    rational_ok = all(isinstance(c, Exponential)
                      for _, c in exponent.levy_measure.components)
    if rational_ok:
        pair = _factorize_rational(exponent)
    elif exponent.is_spectrally_negative() and exponent.kill_rate == 0:
        pair = _factorize_spectrally_negative(exponent)
    else:
        raise UnsupportedClass(
            "unsupported exponent: supported classes are rational "
            "(exponential-mixture jumps with Brownian/drift/killing), "
            "unkilled spectrally-negative, and explicit pairs")
    return validate_pair(exponent, pair)


def validate_pair(exponent: LevyExponent, pair: FactorPair,
                  tol=GRID_TOL) -> FactorPair:
    """Grid-identity and Bernstein checks for a (possibly explicit) pair."""
    for name, phi in (("phi_plus", pair.phi_plus), ("phi_minus", pair.phi_minus)):
        bad = bernstein_violations(phi)
        if bad:
            raise NotBernstein(f"{name}: " + "; ".join(bad))
    res = grid_identity_residual(exponent, pair)
    if res > tol:
        raise FactorValidationFailure(
            f"grid identity residual {res:.3e} exceeds {tol:.1e}")
    return pair


def kill(exponent: LevyExponent, q: float) -> LevyExponent:
    """Psi - q: same triplet, kill rate increased by q > 0."""
    return exponent.killed(q)


# -- potential density and the friendly inverse ------------------------------------


def potential_density_grid(phi: BernsteinFunction, h=1e-3, y_max=30.0,
                           tol=1e-12, max_terms=200):
    """u(y) on a uniform grid from the alternating convolution series

        u(y) = sum_j (-1)^j delta^{-j-1} (1 * (phi(0) + mubar)^{*j})(y),

    valid for factors with positive drift.  Trapezoid-weight convolutions on
    a uniform grid; each term is bounded by (g(0) y)^j / (delta^{j+1} j!), so
    truncation is driven by the sup-norm of the running term.
    """
    if phi.delta <= 0:
        raise UnsupportedClass("potential density series needs delta > 0")
    g0 = phi.kappa + phi.mu.total_mass()
    if g0 > 0:
        # the alternating terms peak at e^{g0 y / delta}; cap the horizon so
        # round-off noise stays below ~1e-9 (u itself decays at least as fast
        # as the terms, so the far tail carries no usable information anyway)
        y_max = min(y_max, 15.3 * phi.delta / g0)
        h = min(h, y_max / 50.0)
    ys = np.arange(0.0, y_max + h / 2, h)
    g = phi.kappa + np.asarray(phi.mu.tail(ys))
    u = np.full(ys.shape, 1.0 / phi.delta)
    if g0 == 0.0:
        return ys, u
    # analytic term bound: |term_j| <= (g(0) y_max)^j / (delta^{j+1} j!);
    # the numeric sup-norm cannot be trusted once round-off noise from the
    # large alternating terms dominates, so truncation uses the bound.
    x = g0 * y_max / phi.delta
    term = np.ones(ys.shape)  # represents (1 * g^{*0}) = Heaviside
    sign = 1.0
    scale = 1.0 / phi.delta
    log_bound = -math.log(phi.delta)
    for j in range(1, max_terms + 1):
        conv = fftconvolve(term, g)[:ys.size] * h
        conv -= 0.5 * h * (term[0] * g[:ys.size] + g[0] * term[:ys.size])
        term = conv
        sign = -sign
        scale = scale / phi.delta
        u += sign * scale * term
        log_bound += math.log(x) - math.log(j)
        peak = scale * float(np.max(np.abs(term)))
        if peak < tol or log_bound < math.log(max(tol, 1e-300)):
            return ys, u
    raise SeriesDivergence("potential-density series failed to settle "
                           f"within {max_terms} terms")


def friendly_inverse_tail(pair: FactorPair, pi_minus: MeasureSpec, y,
                          h=1e-3, y_max=30.0, tol=1e-10):
    """mu-bar_minus(y) = int_0^inf Pi-bar_minus(y + v) U_plus(dv).

    Uses the potential-density series for U_plus (requires delta_plus > 0)
    and trapezoid integration against the tabulated tail of Pi_minus.
    """
    ys, u = potential_density_grid(pair.phi_plus, h=h, y_max=y_max, tol=tol)
    y_arr = np.atleast_1d(np.asarray(y, dtype=float))
    out = np.empty(y_arr.shape)
    for i, yv in enumerate(y_arr):
        vals = np.asarray(pi_minus.tail(yv + ys, side=NEGATIVE))
        trap = np.trapezoid if hasattr(np, "trapezoid") else np.trapz
        out[i] = float(trap(vals * u, ys))
    return out if np.ndim(y) else float(out[0])


def upsilon_minus_at_zero(pair: FactorPair, levy_measure: MeasureSpec,
                          h=1e-3, y_max=30.0):
    """v_minus(0+) = int_0^inf u_plus(y) Pi_minus(dy) (needs delta_plus > 0)."""
    if not levy_measure.side(NEGATIVE):
        return 0.0
    ys, u = potential_density_grid(pair.phi_plus, h=h, y_max=y_max)
    # Stieltjes sum of u against Pi_minus through its tail function; the mass
    # beyond y_max is negligible for exponentially decaying jump tails
    tails = np.asarray(levy_measure.tail(ys, side=NEGATIVE))
    incr = tails[:-1] - tails[1:]          # Pi_minus mass per cell
    mids = 0.5 * (u[:-1] + u[1:])
    return float(np.sum(mids * incr))