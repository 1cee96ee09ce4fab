"""The Mellin transform of the exponential functional.

For a factor pair with phi_minus(0) > 0 the law of I = int_0^inf e^{-xi} dt
has Mellin transform (normalized so M(1) = 1)

    M(z) = phi_minus(0) * Gamma(z) / W_{phi_plus}(z) * W_{phi_minus}(1 - z),

analytic on the strip (a_Psi, 1 - d_minus) with a_Psi = a_plus 1{d_plus = 0},
meromorphic on (a_plus, 1 - a_minus), and satisfying

    M(z + 1) = (-z / Psi(-z)) M(z).

Gamma itself is evaluated as W of the identity Bernstein function through the
same code path; an independent Lanczos reference exists only in the tests.
All combinations are assembled in log space, so exponential decay along
vertical lines never underflows intermediate ratios.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import quadrature as quad
from .berngamma import BernsteinGamma, decay_class
from .bernstein import BernsteinFunction
from .errors import (NearPole, NotInClass, OutOfStrip, Unclassifiable,
                     ZeroDenominator)
from .levyexp import LevyExponent
from .measures import NEGATIVE
from .wiener_hopf import FactorPair, factorize, upsilon_minus_at_zero

_POLE_RADIUS = 1e-3


@dataclass(frozen=True)
class MellinPole:
    location: float
    residue: float


@dataclass(frozen=True)
class MellinDecay:
    kind: str              # 'exponential' | 'polynomial' | 'rapid'
    theta: float = 0.0     # exponential rate along vertical lines
    n_psi: float = math.inf


class MellinLaw:
    """Evaluator for the Mellin transform of I_Psi and its structure."""

    def __init__(self, pair: FactorPair, exponent: LevyExponent | None = None,
                 tol=1e-12):
        self.pair = pair
        self.exponent = exponent
        self.tol = float(tol)
        self.bg_plus = BernsteinGamma(pair.phi_plus, tol=tol)
        self.bg_minus = BernsteinGamma(pair.phi_minus, tol=tol)
        self.bg_gamma = BernsteinGamma(BernsteinFunction.identity(), tol=tol)

    @staticmethod
    def from_exponent(exponent: LevyExponent, tol=1e-12):
        return MellinLaw(factorize(exponent), exponent, tol=tol)

    # -- structure -----------------------------------------------------------

    @property
    def phi_plus(self):
        return self.pair.phi_plus

    @property
    def phi_minus(self):
        return self.pair.phi_minus

    @cached_property
    def strip(self):
        """Analyticity interval (a_Psi, 1 - d_minus).

        a_Psi = a_plus when d_plus = 0 (the zeros of 1/W_plus cancel every
        Gamma pole), and 0 otherwise (the pole at the origin survives).
        """
        plus = self.phi_plus
        a_psi = plus.a_phi if plus.d_phi == 0 else 0.0
        return (a_psi, 1.0 - self.phi_minus.d_phi)

    @cached_property
    def meromorphic_band(self):
        return (self.phi_plus.a_phi, 1.0 - self.phi_minus.a_phi)

    def psi(self, z):
        """Psi reconstructed from the pair (exact for produced pairs)."""
        if self.exponent is not None:
            return self.exponent.psi(z, check_strip=False)
        return self.pair.psi(z)

    # -- poles ------------------------------------------------------------------

    def poles_and_residues(self, band):
        """Simple poles -n of M in ``band=(lo, hi)`` with law-level residues.

        Residues equal phi_plus(0) phi_minus(0) prod_{k<=n} Psi(k) / n!
        (the product convention is empty = 1); when -theta_plus is a positive
        integer the poles at -n, n >= |theta_plus|, disappear, which the
        residue formula reproduces by vanishing.
        """
        lo, hi = band
        plus = self.phi_plus
        if lo <= plus.a_phi:
            raise OutOfStrip(f"band start {lo} must exceed a_plus={plus.a_phi}")
        if plus.d_phi >= 0:
            return []
        th = plus.theta_phi
        integer_theta = (th > -math.inf
                         and abs(th - round(th)) < 1e-9 * (1 + abs(th)))
        excluded_from = abs(round(th)) if integer_theta else math.inf
        out = []
        prefactor = plus.kappa * self.phi_minus.kappa
        n = 0
        prod = 1.0
        while -n > lo:
            if -n < hi and n < excluded_from:
                out.append(MellinPole(-float(n), prefactor * prod
                                      / math.factorial(n)))
            n += 1
            prod *= float(np.real(self.psi(float(n))))
        return out

    def right_poles(self, hi):
        """Poles 1 - theta_minus + k of M inherited from W_minus(1 - z)."""
        out = []
        for rep in self.bg_minus.poles():
            z0 = 1.0 - rep.location            # 1 - (theta - k)
            if z0 > hi:
                break
            gam = complex(np.exp(self.bg_gamma.log_eval(complex(z0))))
            wplus = complex(np.exp(self.bg_plus.log_eval(complex(z0))))
            res = -self.phi_minus.kappa * gam * rep.residue / wplus
            out.append(MellinPole(z0, float(np.real(res))))
        return out

    def all_poles(self, lo, hi):
        left = self.poles_and_residues((max(self.meromorphic_band[0], lo), hi))
        return left + [p for p in self.right_poles(hi) if p.location >= lo]

    def _nearest_pole(self, z):
        z = complex(z)
        best = None
        for pole in self.all_poles(z.real - 2.0, z.real + 2.0):
            d = abs(z - pole.location)
            if best is None or d < best[0]:
                best = (d, pole)
        return best

    # -- evaluation ---------------------------------------------------------------

    def _log_ratio_plus(self, z):
        """log [Gamma(z) / W_plus(z)] with the zero/pole collisions removed.

        Shift with the recurrence until Re z >= 0.5; each shift step
        contributes log(phi_plus(z+j) / (z+j)), finite except at genuine
        poles of M.
        """
        z = np.asarray(z, dtype=complex)
        scalar = z.shape == ()
        z = np.atleast_1d(z)
        n = np.maximum(0, np.ceil(0.5 - z.real).astype(int))
        nmax = int(n.max())
        zs = z + n
        out = self.bg_gamma.log_eval(zs) - self.bg_plus.log_eval(zs)
        for j in range(nmax):
            sel = n > j
            w = z[sel] + j
            ratio = np.empty(w.shape, dtype=complex)
            tiny = np.abs(w) < 1e-9
            if np.any(tiny):
                # phi(w)/w -> phi'(0+); phi'(w/2) matches it to O(w^2)
                ratio[tiny] = self.phi_plus.derivative(w[tiny] * 0.5, 1)
            ratio[~tiny] = self.phi_plus.phi(w[~tiny]) / w[~tiny]
            out[sel] = out[sel] + np.log(ratio)
        return complex(out[0]) if scalar else out.reshape(np.shape(z))

    def log_mellin(self, z):
        """log M(z) on the meromorphic band minus poles (vectorized)."""
        if self.phi_minus.kappa <= 0:
            raise NotInClass("phi_minus(0) = 0: the perpetuity is infinite "
                             "a.s.; the law transform is undefined")
        z_arr = np.asarray(z, dtype=complex)
        scalar = z_arr.shape == ()
        z_arr = np.atleast_1d(z_arr)
        lo, hi = self.meromorphic_band
        if np.any(z_arr.real <= lo) or np.any(z_arr.real >= hi):
            raise OutOfStrip(
                f"Re z must lie in the meromorphic band ({lo}, {hi})")
        out = math.log(self.phi_minus.kappa) \
            + self._log_ratio_plus(z_arr) \
            + self.bg_minus.log_eval_extended(1.0 - z_arr)
        return complex(out[0]) if scalar else out.reshape(np.shape(z))

    def mellin_eval(self, z, near_pole="laurent"):
        """M(z); near a pole (within 1e-3) a Laurent value or NearPole.

        ``near_pole``: 'laurent' substitutes residue/(z - z0) + c0 with c0
        the symmetric average of M at distance 1e-2 (the contour integrators
        need bounded values near the band edges); 'raise' raises
        :class:`NearPole`.
        """
        z_arr = np.asarray(z, dtype=complex)
        scalar = z_arr.shape == ()
        z_flat = np.atleast_1d(z_arr).astype(complex)
        out = np.empty(z_flat.shape, dtype=complex)
        hard = np.zeros(z_flat.shape, dtype=bool)
        # only points near the real axis can sit near a (real) pole
        suspects = np.abs(z_flat.imag) < 2 * _POLE_RADIUS
        if np.any(suspects):
            res = np.min(z_flat.real[suspects]) - 1.5
            poles = self.all_poles(float(res),
                                   float(np.max(z_flat.real[suspects])) + 1.5)
            flat_out = out.reshape(-1)
            flat_hard = hard.reshape(-1)
            for i, zv in enumerate(z_flat.reshape(-1)):
                if abs(zv.imag) >= 2 * _POLE_RADIUS or not poles:
                    continue
                d, pole = min(((abs(zv - p.location), p) for p in poles),
                              key=lambda t: t[0])
                if d >= _POLE_RADIUS:
                    continue
                if near_pole == "raise" or d < 1e-12:
                    raise NearPole(
                        f"z = {zv} is within {d:.2e} of the pole at "
                        f"{pole.location}", location=pole.location,
                        residue=pole.residue)
                h = 10 * _POLE_RADIUS
                c0 = 0.5 * (np.exp(self.log_mellin(pole.location + h))
                            + np.exp(self.log_mellin(pole.location - h)))
                flat_out[i] = pole.residue / (zv - pole.location) + c0
                flat_hard[i] = True
        rest = ~hard
        if np.any(rest):
            out[rest] = np.exp(self.log_mellin(z_flat[rest]))
        return complex(out.reshape(-1)[0]) if scalar else out.reshape(np.shape(z))

    def recurrence_residual(self, z):
        """|M(z+1) Psi(-z) + z M(z)| / (|M(z+1) Psi(-z)| + |z M(z)|)."""
        z = complex(z)
        psi = complex(self.psi(-z))
        if abs(psi) < 1e-14:
            raise ZeroDenominator(f"Psi(-z) = 0 at z = {z}")
        a = self.mellin_eval(z + 1.0) * psi
        b = z * self.mellin_eval(z)
        denom = abs(a) + abs(b)
        return abs(a + b) / denom if denom > 0 else 0.0

    # -- decay ------------------------------------------------------------------

    @cached_property
    def decay(self) -> MellinDecay:
        try:
            n_psi = self.decay_exponent()
        except Unclassifiable:
            n_psi = math.inf
        if math.isfinite(n_psi):
            return MellinDecay("polynomial", n_psi=n_psi)
        theta = self._exponential_rate()
        if theta is not None:
            return MellinDecay("exponential", theta=theta)
        return MellinDecay("rapid")

    def decay_exponent(self):
        """N_Psi: the polynomial decay rate of |M| along vertical lines.

        Finite exactly when delta_plus > 0, delta_minus = 0 and the jump
        measure is finite; then
        N = v_minus(0+) / (phi_minus(0) + mubar_minus(0))
            + (phi_plus(0) + mubar_plus(0)) / delta_plus.
        """
        plus, minus = self.phi_plus, self.phi_minus
        if not (plus.delta > 0 and minus.delta == 0):
            return math.inf
        if self.exponent is None:
            raise Unclassifiable("decay exponent needs the originating "
                                 "exponent (jump measure)")
        if not math.isfinite(self.exponent.jump_activity()):
            return math.inf
        if self.exponent.levy_measure.side(NEGATIVE):
            upsilon0 = upsilon_minus_at_zero(self.pair,
                                             self.exponent.levy_measure)
        else:
            upsilon0 = 0.0
        return upsilon0 / (minus.kappa + minus.mu.total_mass()) \
            + (plus.kappa + plus.mu.total_mass()) / plus.delta

    def _exponential_rate(self):
        """Exponential decay rate Theta of |M(a+ib)|, when classifiable."""
        dminus = decay_class(self.phi_minus)
        if dminus.kind == "exponential":
            return dminus.rate  # pi/2 (drift) or pi alpha / 2 (RV tag)
        # Theta = pi/2 + liminf A_minus/b - limsup A_plus/b, estimated at a
        # finite height; conservative because A/b is monotone-ish in b
        from .berngamma import _arg_integral
        b_est = 160.0
        t_plus = _arg_integral(self.phi_plus, 1.0, b_est, abstol=1e-8) / b_est
        t_minus = _arg_integral(self.phi_minus, 1.0, b_est, abstol=1e-8) / b_est
        theta = math.pi / 2 + t_minus - t_plus
        return theta if theta > 1e-3 else None

    # -- entrance law -------------------------------------------------------------

    def entrance_law_mellin(self, z):
        """Mellin transform of the self-similar entrance law at time one:

        M_V(z) = M_Psi(1 - z) / phi_plus'(0+) on Re z in (d_minus, 1),
        satisfying M_V(z+1) = (Psi(z)/z) M_V(z) and M_V(1) = 1.
        """
        if abs(self.pair.kill_rate()) > 1e-12:
            raise NotInClass("entrance law needs an unkilled exponent")
        dplus0 = float(np.real(self.phi_plus.derivative(1e-9, 1)))
        if not math.isfinite(dplus0) or dplus0 <= 0:
            raise NotInClass("phi_plus'(0+) must be finite and positive")
        if self.exponent is not None:
            _, lattice = self.exponent.zero_scan()
            if lattice:
                raise NotInClass("lattice exponent: entrance law undefined")
        z_arr = np.asarray(z, dtype=complex)
        scalar = z_arr.shape == ()
        z_arr = np.atleast_1d(z_arr)
        # analytic on (d_minus, 1); evaluable on the meromorphic window
        if np.any(z_arr.real <= self.phi_minus.a_phi) \
                or np.any(z_arr.real >= 1.0 - self.phi_plus.a_phi):
            raise OutOfStrip("entrance law is evaluable on "
                             "(a_minus, 1 - a_plus) only")
        out = self._log_ratio_plus(1.0 - z_arr) \
            + self.bg_minus.log_eval_extended(z_arr) - math.log(dplus0)
        out = np.exp(out)
        return complex(out[0]) if scalar else out.reshape(np.shape(z))

    # -- factorization components ---------------------------------------------------

    def factorization_constant(self, k):
        """C_Psi(k): C(0) = e^{g_plus + g_minus - g_euler},
        C(k) = e^{1/k - phi_plus'(k)/phi_plus(k) - phi_minus'(k)/phi_minus(k)}."""
        if k == 0:
            return math.exp(self.bg_plus.euler_const + self.bg_minus.euler_const
                            - self.bg_gamma.euler_const)
        lp = float(np.real(self.phi_plus.log_derivatives(float(k), 1)[0]))
        lm = float(np.real(self.phi_minus.log_derivatives(float(k), 1)[0]))
        return math.exp(1.0 / k - lp - lm)

    def _log_factor(self, k, z):
        """log of the k-th term of the infinite multiplicative factorization."""
        z = complex(z)
        plus, minus = self.phi_plus, self.phi_minus
        if k == 0:
            return ((z - 1.0) * math.log(self.factorization_constant(0))
                    + math.log(minus.kappa) - cmath.log(minus.phi(1.0 - z))
                    + cmath.log(plus.phi(z)) - cmath.log(plus.phi(1.0))
                    - cmath.log(z))
        return ((z - 1.0) * math.log(self.factorization_constant(k))
                + cmath.log(minus.phi(float(k)))
                - cmath.log(minus.phi(k + 1.0 - z))
                + math.log(k + 1.0) + cmath.log(plus.phi(k + z))
                - cmath.log(plus.phi(k + 1.0)) - cmath.log(complex(k) + z))

    def factorization_components(self, z, n_factors=200):
        """The two Mellin factors and the infinite-product partial products.

        Returns ``(mellin_i_plus, mellin_x_minus, partial, accelerated)``:
        the transform Gamma(z)/W_plus(z) of the subordinator perpetuity, the
        transform phi_minus(0) W_minus(1-z) of the residual factor, the raw
        partial products P_K(z) for K = 1..n_factors, and the
        Euler-Maclaurin-accelerated limit of the product (the raw partial
        products converge only at rate O(1/K)).
        """
        z = complex(z)
        mi = cmath.exp(self._log_ratio_plus(z))
        mx = self.phi_minus.kappa * complex(
            np.exp(self.bg_minus.log_eval_extended(1.0 - z)))
        logs = np.array([self._log_factor(k, z) for k in range(n_factors)])
        partial = np.exp(np.cumsum(logs))
        # Euler-Maclaurin tail: sum_{k >= K} log f_k
        #   = int_K^inf log f_u du + (log f_K)/2 - (log f)'(K)/12 + O(K^-4)
        K = float(n_factors)
        h = 1e-2
        val_k = self._log_factor(K, z)
        d1 = (self._log_factor(K + h, z) - self._log_factor(K - h, z)) / (2 * h)
        integral = self._integral_log_factor(K, z)
        tail = integral + 0.5 * val_k - d1 / 12.0  # = sum_{k >= K} log f_k
        accelerated = partial[-1] * cmath.exp(tail)
        return mi, mx, partial, accelerated

    def _integral_log_factor(self, K, z):
        """int_K^inf log f_u(z) du.

        Numeric on [K, 50K] via the substitution u = K/s (the factor decays
        like u^-2, so exponential substitutions cluster poorly); beyond 50K
        the log-factor is evaluated near round-off, so the remainder uses a
        two-term power fit c2/u^2 + c3/u^3 integrated in closed form.
        """
        U = 50.0 * K

        def f(s):
            s = np.atleast_1d(s)
            return np.array([self._log_factor(K / sv, z) * K / sv**2
                             for sv in s])

        v, _ = quad.integrate(f, K / U, 1.0, abstol=1e-13)
        g1 = self._log_factor(U / 2.0, z)
        g2 = self._log_factor(U, z)
        c3 = U * (g1 * (U / 2.0) ** 2 - g2 * U**2)
        c2 = g2 * U**2 - c3 / U
        return v + c2 / U + c3 / (2.0 * U**2)
