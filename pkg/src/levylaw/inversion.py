"""Distribution of the exponential functional by Mellin-Barnes inversion.

Density (and derivatives), CDF and tail are recovered from vertical-line
contour integrals of the law's Mellin transform:

    f^(n)(x) = (-1)^n / (2 pi) int_R x^{-a-ib-n} poly_n(a+ib) M(a+ib) db,
    F(x)     = -1/(2 pi) int_R x^{-a-ib} M(a+1+ib) / (a+ib) db,  a in (-1, 0),
    Fbar(x)  = +1/(2 pi) int_R x^{-a-ib} M(a+1+ib) / (a+ib) db,  a in (0, -d-),

with poly_n(z) = prod_{j<n} (z+j) = Gamma(z+n)/Gamma(z).  The integrand is
evaluated once per contour (vectorized) and shared across x; truncation uses
the decay class of M, and the tail beyond the truncation height is summed by
an integration-by-parts series in the oscillation e^{-ib ln x} (fitted power
tail when x is too close to one for that series to converge).

Small-x behaviour comes from the residue expansion at the left poles, the
large-x behaviour from the Cramer root of phi_minus; the grid builder picks
the regime per point and records it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (ConditionUnverifiable, MomentInfinite, NoCramerRoot,
                     NotKilled, OrderExceedsPoles, OutOfStrip, OutsideSupport,
                     SmoothnessCapExceeded, TruncationFailure)
from .mellin import MellinLaw

_B_CAP = 4000.0
_L_MIN_IBP = 0.04      # min |ln x| for the integration-by-parts tail series
_POLE_MARGIN = 0.08


# -- configuration and results -----------------------------------------------


@dataclass(frozen=True)
class InversionConfig:
    contour_re: float | None = None     # None: saddle-lite automatic choice
    trunc_b: float | None = None        # None: from the decay class
    step: float | None = None           # None: oscillation-resolving default
    tol: float = 1e-8
    max_derivative: int | None = None   # None: decay-class cap

    def with_tol(self, tol):
        return replace(self, tol=tol)


@dataclass(frozen=True)
class PointValue:
    value: float
    err_est: float
    regime: str
    contour_re: float | None = None


@dataclass(frozen=True)
class Support:
    lo: float
    hi: float
    closed_lo: bool = False
    closed_hi: bool = False

    @property
    def is_point(self):
        return self.lo == self.hi

    def contains(self, x, tol=1e-12):
        if self.is_point:
            return abs(x - self.lo) <= tol * max(1.0, self.lo)
        above = x > self.lo or (self.closed_lo and x >= self.lo)
        below = x < self.hi or (self.closed_hi and x <= self.hi)
        return above and below


def support(law: MellinLaw) -> Support:
    """Support of the law from the shape of the factors."""
    plus, minus = law.phi_plus, law.phi_minus
    minus_const = minus.is_constant
    plus_drift = plus.is_pure_drift
    if minus_const:
        edge = 1.0 / (minus.phi_at_infinity() * plus.delta) \
            if plus.delta > 0 else math.inf
        if plus_drift:
            return Support(edge, edge, True, True)
        return Support(0.0, edge, False, True)
    if plus_drift:
        pinf = minus.phi_at_infinity()
        lo = 1.0 / (plus.delta * pinf) if math.isfinite(pinf) else 0.0
        return Support(lo, math.inf, lo > 0, False)
    return Support(0.0, math.inf, False, False)


def smoothness_cap(law: MellinLaw):
    """Highest pointwise derivative order of the density, or inf."""
    n_psi = law.decay.n_psi
    if not math.isfinite(n_psi):
        return math.inf
    return math.ceil(n_psi) - 2


# -- contour engine -------------------------------------------------------------


class _Contour:
    """Cached evaluation of a smooth contour factor g(b) on a uniform grid."""

    def __init__(self, gfun, a, b_max, h):
        self.a = a
        self.h = h
        n = 4 * int(math.ceil(b_max / h / 4.0))  # strides 4/2/1 share endpoint
        self.b = h * np.arange(n + 1)
        self.g = gfun(a + 1j * self.b)
        self.gfun = gfun

    def oscillatory_sum(self, L):
        """int_0^B e^{-ibL} g(b) db: trapezoid at strides 4, 2, 1 with double
        Richardson extrapolation (h^2 and h^4 terms removed)."""
        phase = np.exp(-1j * L * self.b)
        vals = phase * self.g
        out = []
        for stride in (4, 2, 1):
            v = vals[::stride]
            hh = self.h * stride
            out.append(hh * (np.sum(v) - 0.5 * (v[0] + v[-1])))
        r_fine = out[2] + (out[2] - out[1]) / 3.0
        r_coarse = out[1] + (out[1] - out[0]) / 3.0
        richardson = r_fine + (r_fine - r_coarse) / 15.0
        err = abs(r_fine - r_coarse) / 15.0 \
            + 1e3 * np.finfo(float).eps * float(np.sum(np.abs(vals))) * self.h
        return richardson, err

    def tail_completion(self, L):
        """int_B^inf e^{-ibL} g(b) db via IBP series or fitted power tail."""
        B = float(self.b[-1])
        hfd = max(4.0 * self.h, 1e-2 * B)
        a = self.a
        gs = self.gfun(a + 1j * np.array([B - 2 * hfd, B - hfd, B, B + hfd,
                                          B + 2 * hfd]))
        g0 = gs[2]
        d1 = (gs[3] - gs[1]) / (2 * hfd)
        d2 = (gs[3] - 2 * gs[2] + gs[1]) / hfd**2
        d3 = (gs[4] - 2 * gs[3] + 2 * gs[1] - gs[0]) / (2 * hfd**3)
        if abs(L) >= _L_MIN_IBP:
            iL = 1j * L
            series = g0 / iL + d1 / iL**2 + d2 / iL**3 + d3 / iL**4
            tail = np.exp(-1j * B * L) * series
            err = abs(d3 / L**4) * 2.0
            return tail, err
        # |ln x| tiny: e^{-ibL} ~ e^{-iBL} on the scale where g still matters;
        # fit |g| ~ c / b^p and integrate the fitted tail
        gh = self.gfun(a + 1j * np.array([0.5 * B]))[0]
        if abs(g0) == 0 or abs(gh) == 0:
            return 0.0, 0.0
        p = max(1.2, math.log(abs(gh) / abs(g0)) / math.log(2.0))
        tail = np.exp(-1j * B * L) * g0 * B / (p - 1.0)
        err = abs(L) * abs(g0) * B**2 / max((p - 1.0) * (p - 2.0), 0.3) \
            + abs(tail) * 0.1
        return tail, err


class _Inverter:
    """Shared contour machinery bound to one MellinLaw."""

    def __init__(self, law: MellinLaw):
        self.law = law
        self._cache = {}

    # -- contour placement ------------------------------------------------------

    def _interval(self, kind):
        lo_s, hi_s = self.law.strip
        if kind == "density":
            return (max(lo_s, 0.0), hi_s)
        if kind == "cdf":
            return (-1.0, 0.0)
        if kind == "tail":
            d_minus = self.law.phi_minus.d_phi
            if d_minus >= 0:
                raise OutOfStrip("direct tail inversion needs d_minus < 0")
            return (0.0, -d_minus)
        raise ValueError(kind)

    def _candidates(self, kind):
        lo, hi = self._interval(kind)
        if not math.isfinite(hi):
            hi = max(4.0, lo + 4.0)
        if not math.isfinite(lo):
            lo = min(-4.0, hi - 4.0)
        pad = _POLE_MARGIN * (hi - lo) if hi - lo < 4 else _POLE_MARGIN * 4
        qs = np.linspace(lo + pad, hi - pad, 5)
        return qs

    def _m_on_line(self, z):
        """The smooth factor by kind, vectorized on a vertical line."""
        return np.exp(self.law.log_mellin(z))

    def _g_factory(self, kind, n):
        if kind == "density":
            def g(z):
                poly = np.ones(np.shape(z), dtype=complex)
                for j in range(n):
                    poly = poly * (z + j)
                return poly * self._m_on_line(z)
            return g
        # cdf and tail share the factor M(z+1)/z
        def g(z):
            return self._m_on_line(z + 1.0) / z
        return g

    def pick_contour(self, kind, n, L):
        """Contour placement: the interval midpoint by default; for extreme
        x a saddle-lite scan minimizing -a L + log |g(a)| over candidates
        (small x favours the left edge, large x the right edge)."""
        cands = self._candidates(kind)
        if abs(L) <= 4.0:
            return float(cands[len(cands) // 2])
        best, best_val = None, math.inf
        for a in cands:
            try:
                mag = abs(self._g_factory(kind, n)(
                    np.array([a + 0.0j], dtype=complex))[0])
            except (OutOfStrip, FloatingPointError):
                continue
            if not (mag > 0 and math.isfinite(mag)):
                continue
            val = -a * L + math.log(mag)
            if val < best_val:
                best, best_val = float(a), val
        if best is None:
            raise OutOfStrip(f"no admissible contour for {kind}")
        return best

    def _trunc_height(self, kind, n, tol, L_scale):
        decay = self.law.decay
        if decay.kind == "exponential":
            return min(_B_CAP, math.log(1.0 / tol) / decay.theta + 12.0)
        if decay.kind == "polynomial":
            p = decay.n_psi - n if kind == "density" else decay.n_psi + 1.0
            if p <= 0.2:
                raise TruncationFailure(
                    f"integrand decay exponent {p:.2f} too small")
            want = (1.0 / tol) ** (1.0 / (p - min(0.1, p / 2)))
            if L_scale >= _L_MIN_IBP:
                # four IBP tail terms leave a remainder ~ p^3 B^{-p-3} / L^4
                ibp = (10.0 * p**3 / (tol * L_scale**4)) ** (1.0 / (p + 3.0))
                want = min(want, max(100.0, ibp))
            else:
                # near x = 1 only the fitted power tail applies; its honest
                # error estimate replaces brute truncation height
                want = min(want, 2048.0)
            # bucket to powers of two so nearby x share cached contours
            want = 2.0 ** math.ceil(math.log2(max(64.0, want)))
            return float(min(_B_CAP, want))
        return 60.0  # rapid: doubled on demand in contour()

    def contour(self, kind, n, a, tol, L_scale, b_override=None,
                h_override=None):
        if h_override is not None:
            h = h_override
        else:
            h_raw = min(0.05, 0.3 / (1.0 + L_scale))
            h = 0.3 * 2.0 ** -math.ceil(math.log2(0.3 / h_raw))  # bucketed
        B = b_override if b_override is not None \
            else self._trunc_height(kind, n, tol, L_scale)
        key = (kind, n, round(a, 12), round(h, 12), round(B, 6))
        got = self._cache.get(key)
        if got is None:
            g = self._g_factory(kind, n)
            got = _Contour(g, a, B, h)
            if self.law.decay.kind == "rapid" and b_override is None:
                for _ in range(6):
                    if abs(got.g[-1]) < tol * 1e-2:
                        break
                    B *= 2.0
                    got = _Contour(g, a, B, h)
            self._cache[key] = got
        return got

    # -- main entry ---------------------------------------------------------------

    def invert(self, kind, x, n, cfg: InversionConfig):
        L = math.log(x)
        a = cfg.contour_re if cfg.contour_re is not None \
            else self.pick_contour(kind, n, L)
        lo, hi = self._interval(kind)
        if not (lo < a < hi):
            raise OutOfStrip(f"contour Re = {a} outside ({lo}, {hi})")
        if cfg.trunc_b is not None:
            ct = self.contour(kind, n, a, cfg.tol, abs(L),
                              b_override=cfg.trunc_b)
        else:
            ct = self.contour(kind, n, a, cfg.tol, abs(L))
        if cfg.step is not None and cfg.step < ct.h:
            ct = _Contour(ct.gfun, a, ct.b[-1], cfg.step)

        def assemble(ctv):
            main, err_main = ctv.oscillatory_sum(L)
            tail_v, err_tail = ctv.tail_completion(L)
            pref = {"density": (-1.0) ** n * x ** (-a - n) / math.pi,
                    "cdf": -x ** (-a) / math.pi,
                    "tail": x ** (-a) / math.pi}[kind]
            return (pref * float(np.real(main + tail_v)),
                    abs(pref) * err_main, abs(pref) * err_tail)

        value, err_main, err_tail = assemble(ct)
        target = 50 * max(cfg.tol, cfg.tol * abs(value)) + 1e-13
        if err_main + err_tail > target:
            if err_tail >= err_main and abs(L) >= _L_MIN_IBP:
                # truncation-limited: double the height (the IBP remainder
                # shrinks like B^{-p-3}; pointless in the fitted-power zone)
                ct = self.contour(kind, n, a, cfg.tol, abs(L),
                                  b_override=2.0 * float(ct.b[-1]),
                                  h_override=ct.h)
                value, err_main, err_tail = assemble(ct)
            elif err_main > err_tail:  # oscillation-limited: halve the step
                ct = self.contour(kind, n, a, cfg.tol, abs(L),
                                  b_override=float(ct.b[-1]),
                                  h_override=ct.h / 2)
                value, err_main, err_tail = assemble(ct)
        return PointValue(value, err_main + err_tail, "inversion", a)


def _inverter(law) -> _Inverter:
    inv = getattr(law, "_inverter", None)
    if inv is None:
        inv = _Inverter(law)
        law._inverter = inv
    return inv


# -- public operations -------------------------------------------------------------


def density(law: MellinLaw, x, n=0, cfg: InversionConfig | None = None,
            allow_averaged=False):
    """n-th derivative of the density at x > 0 (pointwise).

    In the polynomial decay class the pointwise order is capped at
    ceil(N_psi) - 2; for 1/2 < N_psi <= 1 and n = 0 a grid-averaged value is
    returned when ``allow_averaged`` is set (L^2-sense inversion), otherwise
    the request errors out rather than returning noise.
    """
    cfg = cfg or InversionConfig()
    if x <= 0:
        raise OutsideSupport("density needs x > 0")
    supp = support(law)
    if not supp.contains(x):
        return PointValue(0.0, 0.0, "outside_support")
    if supp.is_point:
        raise OutsideSupport("the law is a point mass; no density exists")
    cap = smoothness_cap(law)
    hard_cap = cap if cfg.max_derivative is None \
        else min(cap, cfg.max_derivative)
    if n > hard_cap:
        n_psi = law.decay.n_psi
        if allow_averaged and n == 0 and n_psi > 0.5:
            cell = max(1e-3 * x, 1e-6)
            lo = cdf(law, max(x - cell / 2, 1e-300), cfg)
            hi = cdf(law, x + cell / 2, cfg)
            val = (hi.value - lo.value) / cell
            return PointValue(val, lo.err_est + hi.err_est + cell,
                              f"l2_averaged(cell={cell:.2e})")
        raise SmoothnessCapExceeded(
            f"derivative order {n} exceeds the decay-class cap {hard_cap}")
    return _inverter(law).invert("density", x, n, cfg)


def cdf(law: MellinLaw, x, cfg: InversionConfig | None = None):
    """F(x) by inversion of -M(z+1)/z on Re z in (-1, 0)."""
    cfg = cfg or InversionConfig()
    if x <= 0:
        return PointValue(0.0, 0.0, "outside_support")
    supp = support(law)
    if supp.is_point:
        return PointValue(0.0 if x < supp.lo else 1.0, 0.0, "point_mass")
    if x >= supp.hi:
        return PointValue(1.0, 0.0, "outside_support")
    if x <= supp.lo:
        return PointValue(0.0, 0.0, "outside_support")
    return _inverter(law).invert("cdf", x, 0, cfg)


def tail(law: MellinLaw, x, cfg: InversionConfig | None = None):
    """Fbar(x): direct inversion on (0, -d_minus) when d_minus < 0, else 1-F."""
    cfg = cfg or InversionConfig()
    supp = support(law)
    if supp.is_point:
        return PointValue(1.0 if x < supp.lo else 0.0, 0.0, "point_mass")
    if x <= supp.lo:
        return PointValue(1.0, 0.0, "outside_support")
    if x >= supp.hi:
        return PointValue(0.0, 0.0, "outside_support")
    if law.phi_minus.d_phi < 0:
        return _inverter(law).invert("tail", x, 0, cfg)
    f = cdf(law, x, cfg)
    return PointValue(1.0 - f.value, f.err_est, f.regime, f.contour_re)


# -- small-x expansion ---------------------------------------------------------------


@dataclass(frozen=True)
class SmallXRadius:
    convergent: bool
    radius: float
    reason: str


@dataclass(frozen=True)
class SmallXExpansion:
    value: float
    terms: tuple
    remainder_bound: float
    radius: SmallXRadius


def small_x_coefficients(law: MellinLaw, order):
    """c_k = -Psi(0) prod_{j<k} Psi(j) / k!, k = 1..order (F ~ sum c_k x^k)."""
    q = law.pair.kill_rate()
    coeffs = []
    prod = 1.0
    for k in range(1, order + 1):
        if k > 1:
            prod *= float(np.real(law.psi(float(k - 1))))
        coeffs.append(q * prod / math.factorial(k))
    return coeffs


def pole_count_bound(law: MellinLaw):
    """Largest admissible expansion order of the shifted-contour expansion.

    For integer -theta_plus the Mellin transform of F has poles exactly at
    -1, ..., theta_plus (the residues vanish beyond), so shifting past all of
    them is admissible and the order may reach |theta_plus|; otherwise the
    analyticity edge a_plus caps the shift.
    """
    plus = law.phi_plus
    th = plus.theta_phi
    if th > -math.inf and abs(th - round(th)) < 1e-9 * (1 + abs(th)) \
            and round(th) < 0 and plus.a_phi == -math.inf:
        return int(abs(round(th)))
    if plus.a_phi == -math.inf:
        return math.inf
    return int(math.ceil(abs(plus.a_phi) + 1.0)) - 1


def small_x_radius(law: MellinLaw) -> SmallXRadius:
    plus, minus = law.phi_plus, law.phi_minus
    if plus.is_constant and minus.delta > 0:
        r = 1.0 / (plus.phi_at_infinity() * minus.delta)
        return SmallXRadius(True, r, "phi_plus constant")
    if plus.mu.is_empty and plus.delta > 0 \
            and math.isfinite(minus.phi_at_infinity()):
        r = 1.0 / (minus.phi_at_infinity() * plus.delta)
        return SmallXRadius(True, r, "phi_plus affine, phi_minus bounded")
    return SmallXRadius(False, 0.0, "asymptotic expansion only")


def small_x_series(law: MellinLaw, x, order,
                   cfg: InversionConfig | None = None) -> SmallXExpansion:
    """Partial sums of F(x) = -Psi(0) sum_k prod_{j<k} Psi(j) / k! x^k.

    Requires a killed exponent; ``order`` must stay below the pole-count
    bound of the shifted contour.  The remainder bound is the absolute
    integral of the shifted Mellin-Barnes remainder.
    """
    cfg = cfg or InversionConfig()
    q = law.pair.kill_rate()
    if q <= 1e-14:
        raise NotKilled("small-x expansion requires Psi(0) < 0")
    bound = pole_count_bound(law)
    if math.isfinite(bound) and order > bound:
        raise OrderExceedsPoles(f"order {order} > pole bound {bound}")
    coeffs = small_x_coefficients(law, order)
    terms = tuple(c * x**k for k, c in zip(range(1, order + 1), coeffs))
    value = float(sum(terms))
    a = max(-order - 1.0, law.phi_plus.a_phi - 1.0, -order - 1.0 + 1e-9)
    a = 0.5 * (a + (-order))         # interior of ((-M-1) v (a+ - 1), -M)
    rem = _remainder_bound(law, x, a)
    return SmallXExpansion(value, terms, rem, small_x_radius(law))


def _remainder_bound(law: MellinLaw, x, a, b_lim=2000.0):
    """x^{-a}/(2 pi) int |M(a+1+ib)/(a+ib)| db along the shifted line.

    The integral does not depend on x, so it is cached per contour line.
    """
    cache = getattr(law, "_remainder_cache", None)
    if cache is None:
        cache = law._remainder_cache = {}
    key = round(a, 12)
    total = cache.get(key)
    if total is None:
        b = np.linspace(0.0, b_lim, 4001)
        z = a + 1j * b
        vals = np.abs(np.exp(law.log_mellin(z + 1.0)) / z)
        trap = np.trapezoid if hasattr(np, "trapezoid") else np.trapz
        integral = 2.0 * float(trap(vals, b))
        p_est = math.log(max(vals[-2], 1e-300) / max(vals[-1], 1e-300)) \
            / math.log(b[-1] / b[-2]) if vals[-1] > 0 else 2.0
        tail = 2.0 * vals[-1] * b[-1] / max(p_est - 1.0, 0.3)
        total = cache[key] = integral + tail
    return x ** (-a) / (2 * math.pi) * total


# -- Cramer tail -------------------------------------------------------------------


@dataclass(frozen=True)
class CramerAsymptote:
    theta: float
    constant: float
    order: int

    def evaluate(self, x):
        """C x^theta (order 0) or the derivative asymptote C x^{theta-1-n}."""
        if self.order == 0:
            return self.constant * x**self.theta
        return self.constant * x ** (self.theta - self.order)


def cramer_tail(law: MellinLaw, n=0) -> CramerAsymptote:
    """Tail asymptote under the Cramer condition.

    Returns theta = theta_minus and the constant C with Fbar(x) ~ C x^theta
    for n = 0; for n >= 1 the constant of f^(n-1)(x) ~ C x^{theta - n}
    carries the sign (-1)^(n-1).
    """
    minus, plus = law.phi_minus, law.phi_plus
    th = minus.theta_phi
    if th in (-math.inf, 0.0) or th >= 0:
        raise NoCramerRoot("phi_minus has no negative root")
    if minus.d_phi != th:
        raise NoCramerRoot("d_minus != theta_minus: only the Pareto index "
                           "is available")
    if th <= minus.a_phi + 1e-6:
        raise ConditionUnverifiable(
            "theta_minus sits at the analyticity edge of phi_minus")
    if law.exponent is not None:
        _, lattice = law.exponent.zero_scan()
        if lattice:
            raise ConditionUnverifiable("lattice exponent: Cramer asymptotics "
                                        "need the non-lattice class")
    dminus = float(np.real(minus.derivative(complex(th), 1)))
    if not (math.isfinite(dminus) and dminus > 0):
        raise ConditionUnverifiable("phi_minus'(theta+) not finite/positive")
    w_minus = law.bg_minus.eval_extended(1.0 + th)
    if hasattr(w_minus, "residue"):
        raise ConditionUnverifiable("W_minus has a pole at 1 + theta")
    w_plus = law.bg_plus.eval(1.0 - th)
    gamma_minus_th = law.bg_gamma.eval_extended(-th)
    base = minus.kappa * float(np.real(w_minus)) \
        / (dminus * float(np.real(w_plus)))
    if n == 0:
        c = float(np.real(gamma_minus_th)) * base
        return CramerAsymptote(th, c, 0)
    gam = law.bg_gamma.eval(float(n) - th)
    c = (-1.0) ** (n - 1) * float(np.real(gam)) * base
    return CramerAsymptote(th, c, n)


# -- finite-horizon moments -----------------------------------------------------------


def finite_horizon_moment(law: MellinLaw, a, t, n_paths=20000, seed=12345,
                          dt=2e-3):
    """E[I(t)^{-a}] by simulation, with the t^a-scaled value and its SE.

    Validates the moment dichotomy: finite for a in (0, 1 - a_plus),
    infinite for a > 1 - a_plus.  Requires an unkilled exponent.
    """
    from .simulate import PathSampler, sample_finite_horizon
    if law.exponent is None:
        raise ConditionUnverifiable("finite-horizon moments need the exponent")
    if law.exponent.kill_rate != 0:
        raise NotKilled("finite-horizon moment limit requires Psi(0) = 0")
    a_plus = law.phi_plus.a_phi
    limit = 1.0 - a_plus
    if a <= 0:
        raise MomentInfinite("need a > 0")
    if a > limit:
        raise MomentInfinite(
            f"E[I(t)^-a] = inf for a = {a} > 1 - a_plus = {limit}")
    sampler = PathSampler(law.exponent, dt=min(dt, t / 30.0), rng_seed=seed)
    emp = sample_finite_horizon(sampler, t, n_paths)
    vals = emp.samples ** (-a)
    est = float(np.mean(vals))
    se = float(np.std(vals, ddof=1) / math.sqrt(len(vals)))
    return {"estimate": est, "se": se, "scaled": t**a * est,
            "scaled_se": t**a * se, "t": t, "a": a}


# -- density grid ---------------------------------------------------------------------


@dataclass
class DensityGrid:
    x: np.ndarray
    f: np.ndarray
    F: np.ndarray
    Fbar: np.ndarray
    regime: list
    err_est: np.ndarray
    derivatives: dict = field(default_factory=dict)

    def violations(self, tol=1e-6):
        """Invariant probes: f >= -tol, F monotone, F + Fbar = 1, mass ~ 1."""
        bad = []
        if np.any(self.f < -tol):
            bad.append("negative density")
        if np.any(np.diff(self.F) < -tol):
            bad.append("F not non-decreasing")
        if np.any(np.abs(self.F + self.Fbar - 1.0) > tol):
            bad.append("F + Fbar != 1")
        return bad


def build_density_grid(law: MellinLaw, xs, cfg: InversionConfig | None = None,
                       derivatives=0, regimes="auto") -> DensityGrid:
    """Tabulate f, F, Fbar (and derivative columns) with per-point regimes."""
    cfg = cfg or InversionConfig()
    xs = np.asarray(sorted(xs), dtype=float)
    n = xs.size
    f = np.zeros(n)
    F = np.zeros(n)
    err = np.zeros(n)
    regime = ["inversion"] * n
    dcols = {k: np.full(n, np.nan) for k in range(1, derivatives + 1)}
    cap = smoothness_cap(law)
    q = law.pair.kill_rate()
    radius = small_x_radius(law)
    cram = None
    if regimes in ("auto", "tail"):
        try:
            cram = cramer_tail(law, 0)
        except (NoCramerRoot, ConditionUnverifiable):
            cram = None
    for i, x in enumerate(xs):
        use_series = (regimes in ("auto", "series") and q > 0
                      and radius.convergent and x < 0.5 * radius.radius)
        use_tail = (regimes in ("auto", "tail") and cram is not None
                    and cram.evaluate(x) < 1e-3)
        if regimes == "series" and not use_series:
            use_series = q > 0
        if use_series:
            order = min(30, pole_count_bound(law))
            exp_f = small_x_series(law, x, order=order, cfg=cfg)
            F[i] = exp_f.value
            fc = small_x_coefficients(law, order)
            f[i] = float(sum(k * c * x ** (k - 1)
                             for k, c in zip(range(1, order + 1), fc)))
            err[i] = exp_f.remainder_bound
            regime[i] = "small_series"
        elif use_tail:
            F[i] = 1.0 - cram.evaluate(x)
            fd = cramer_tail(law, 1)
            f[i] = fd.evaluate(x)
            err[i] = 0.05 * cram.evaluate(x)
            regime[i] = "cramer_tail"
        else:
            pv_f = cdf(law, x, cfg)
            F[i] = pv_f.value
            err[i] = pv_f.err_est
            regime[i] = pv_f.regime
            try:
                pv = density(law, x, 0, cfg, allow_averaged=True)
                f[i] = pv.value
                err[i] = max(err[i], pv.err_est)
                if pv.regime.startswith("l2_averaged"):
                    regime[i] = pv.regime
            except SmoothnessCapExceeded:
                f[i] = np.nan
        for k in range(1, derivatives + 1):
            if k <= cap:
                dcols[k][i] = density(law, x, k, cfg).value
    Fbar = np.empty(n)
    for i, x in enumerate(xs):
        if regime[i] == "cramer_tail":
            Fbar[i] = cram.evaluate(x)
        else:
            Fbar[i] = tail(law, x, cfg).value
    return DensityGrid(xs, f, F, Fbar, regime, err, dcols)
