"""Bernstein functions phi(z) = kappa + delta z + int (1 - e^{-zy}) mu(dy).

Evaluation, derivatives up to order six, log-derivatives, the analyticity
thresholds (a_phi, theta_phi, d_phi) and the quadrature-backed dual forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import quadrature as quad
from .errors import OutOfStrip, RootBracketFailure
from .measures import POSITIVE, Atom, Exponential, MeasureSpec, Tabulated

_NEG_INF = -math.inf

# coefficients of (log phi)^(n) in terms of r_k = phi^(k)/phi, n = 1..6
# (standard moment-to-cumulant signs)


def _log_derivatives(r, n_max):
    """Return [(log phi)^(1), ..., (log phi)^(n_max)] from r[k] = phi^(k)/phi."""
    out = []
    r1, r2, r3, r4, r5, r6 = (r + [None] * 6)[:6]
    if n_max >= 1:
        out.append(r1)
    if n_max >= 2:
        out.append(r2 - r1**2)
    if n_max >= 3:
        out.append(r3 - 3 * r2 * r1 + 2 * r1**3)
    if n_max >= 4:
        out.append(r4 - 4 * r3 * r1 - 3 * r2**2 + 12 * r2 * r1**2 - 6 * r1**4)
    if n_max >= 5:
        out.append(r5 - 5 * r4 * r1 - 10 * r3 * r2 + 20 * r3 * r1**2
                   + 30 * r2**2 * r1 - 60 * r2 * r1**3 + 24 * r1**5)
    if n_max >= 6:
        out.append(r6 - 6 * r5 * r1 - 15 * r4 * r2 + 30 * r4 * r1**2
                   - 10 * r3**2 + 120 * r3 * r2 * r1 - 120 * r3 * r1**3
                   + 30 * r2**3 - 270 * r2**2 * r1**2 + 360 * r2 * r1**4
                   - 120 * r1**6)
    return out


@dataclass(frozen=True)
class Thresholds:
    a_phi: float
    theta_phi: float
    d_phi: float
    a_phi_approximate: bool = False


@dataclass(frozen=True)
class BernsteinFunction:
    """The triplet (kappa, delta, mu) with kappa = phi(0), delta the drift."""

    kappa: float = 0.0
    delta: float = 0.0
    mu: MeasureSpec = field(default_factory=MeasureSpec)

    def __post_init__(self):
        if self.kappa < 0 or self.delta < 0:
            raise ValueError("kappa and delta must be non-negative")
        if not self.mu.is_one_sided():
            raise ValueError("Bernstein measure must be one-sided (positive)")
        if self.kappa == 0 and self.delta == 0 and self.mu.is_empty:
            raise ValueError("phi must not be identically zero")

    # -- constructors ---------------------------------------------------------

    @staticmethod
    def identity():
        return BernsteinFunction(0.0, 1.0)

    @staticmethod
    def affine(kappa, delta=1.0):
        return BernsteinFunction(kappa, delta)

    @staticmethod
    def constant(c):
        return BernsteinFunction(c, 0.0)

    @staticmethod
    def exponential_mixture(kappa, delta, weights_rates):
        mu = MeasureSpec.one_sided(*(Exponential(w, r) for w, r in weights_rates))
        return BernsteinFunction(kappa, delta, mu)

    # -- structure flags -------------------------------------------------------

    @property
    def is_constant(self):
        return self.delta == 0 and self.mu.is_empty

    @property
    def is_pure_drift(self):
        return self.kappa == 0 and self.mu.is_empty and self.delta > 0

    def phi_at_infinity(self):
        """phi(inf) = kappa + mu(0, inf) when delta == 0, else inf."""
        if self.delta > 0:
            return math.inf
        return self.kappa + self.mu.total_mass()

    # -- thresholds ------------------------------------------------------------

    @cached_property
    def thresholds(self) -> Thresholds:
        a_phi, approx = self.mu.abscissa(POSITIVE)
        theta = self._largest_root(a_phi)
        return Thresholds(a_phi, theta, max(a_phi, theta), approx)

    @property
    def a_phi(self):
        return self.thresholds.a_phi

    @property
    def theta_phi(self):
        return self.thresholds.theta_phi

    @property
    def d_phi(self):
        return self.thresholds.d_phi

    def _largest_root(self, a_phi):
        """Largest u in (a_phi, 0] with phi(u) = 0; phi is increasing there."""
        if self.kappa == 0:
            return 0.0
        if self.is_constant:
            return _NEG_INF
        # phi(0) = kappa > 0; a root exists iff phi goes negative to the left.
        if a_phi == _NEG_INF:
            lo = -1.0
            for _ in range(80):
                if self._phi_real(lo) < 0:
                    break
                lo *= 2.0
            else:
                return _NEG_INF  # phi stays positive: no root
        else:
            lo = None
            eps0 = max(1e-13, abs(a_phi) * 1e-13)
            for k in range(1, 48):
                cand = a_phi + abs(a_phi) * 2.0 ** (-k) + (0 if a_phi else eps0)
                val = self._phi_real(cand)
                if not math.isfinite(val):
                    continue
                if val < 0:
                    lo = cand
                    break
            if lo is None:
                # phi(a_phi+) >= 0: provably no root in (a_phi, 0]
                probe = self._phi_real(a_phi + eps0)
                if math.isfinite(probe) and probe >= 0:
                    return _NEG_INF
                raise RootBracketFailure(
                    "could not bracket the root of phi above a_phi")
        hi = 0.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if mid == lo or mid == hi:
                break
            if self._phi_real(mid) < 0:
                lo = mid
            else:
                hi = mid
            if hi - lo < 1e-13 * max(1.0, abs(lo)):
                break
        return 0.5 * (lo + hi)

    def _phi_real(self, u):
        return float(np.real(self.phi(complex(u, 0.0))))

    # -- evaluation -------------------------------------------------------------

    def phi(self, z):
        """phi(z) for Re z > a_phi (closed form, vectorized)."""
        z_arr = np.asarray(z, dtype=complex)
        out = self.kappa + self.delta * z_arr + self.mu.bernstein_integral(z_arr)
        return out if out.shape else complex(out)

    def __call__(self, z):
        return self.phi(z)

    def derivative(self, z, n=1):
        """phi^(n)(z) for n >= 1 (closed form, vectorized)."""
        if n < 1:
            raise ValueError("derivative order must be >= 1")
        z_arr = np.asarray(z, dtype=complex)
        out = np.zeros(z_arr.shape, dtype=complex)
        if n == 1:
            out = out + self.delta
        sign = (-1.0) ** (n + 1)
        out = out + sign * self.mu.bernstein_moment(z_arr, n)
        return out if out.shape else complex(out)

    def log_derivatives(self, z, n_max):
        """[(log phi)'(z), ..., (log phi)^(n_max)(z)] (vectorized)."""
        z_arr = np.asarray(z, dtype=complex)
        val = self.phi(z_arr)
        r = [self.derivative(z_arr, k) / val for k in range(1, n_max + 1)]
        return _log_derivatives(r, n_max)

    def log_phi(self, z):
        """Principal log of phi(z); single-valued on Re z > d_phi."""
        return np.log(self.phi(z))

    # -- quadrature-backed dual forms (independent evaluation paths) -----------

    def phi_by_quadrature(self, z, form="tail", abstol=1e-12):
        """Evaluate phi along an integral form: 'measure' or 'tail'.

        The measure form integrates (1 - e^{-zy}) against the density/atoms
        (valid for Re z > a_phi); the tail form evaluates
        kappa + delta z + z * int_0^inf e^{-zy} mubar(y) dy (Re z > max(0, a_phi)).
        """
        z = complex(z)
        if form == "measure":
            if z.real <= self.a_phi:
                raise OutOfStrip(f"Re z = {z.real} <= a_phi = {self.a_phi}")
            total = self.kappa + self.delta * z
            for comp in self.mu.side(POSITIVE):
                if isinstance(comp, Exponential):
                    w, lam = comp.weight, comp.rate
                    # integrand decays like the density itself once e^{-zy} dies
                    decay = lam + min(z.real, 0.0)
                    v, _ = quad.integrate_to_inf(
                        lambda y, w=w, lam=lam: (1.0 - np.exp(-z * y))
                        * w * lam * np.exp(-lam * y),
                        0.0, rate=max(decay, 1e-2), abstol=abstol)
                    total += v
                elif isinstance(comp, Atom):
                    total += comp.weight * (1.0 - np.exp(-z * comp.location))
                else:
                    pieces, atom_w = comp.pieces()
                    for lo, hi, c in pieces:
                        v, _ = quad.integrate(
                            lambda y, c=c: c * (1.0 - np.exp(-z * y)),
                            lo, hi, abstol=abstol)
                        total += v
                    if atom_w > 0:
                        total += atom_w * (1.0 - np.exp(-z * comp.grid[-1]))
            return total
        if form == "tail":
            if z.real <= max(0.0, self.a_phi):
                raise OutOfStrip(
                    f"tail form needs Re z > max(0, a_phi); got {z.real}")
            rate = max(z.real, 0.25)
            v, _ = quad.integrate_to_inf(
                lambda y: np.exp(-z * y) * self.mu.tail(y),
                0.0, rate=rate, abstol=abstol)
            return self.kappa + self.delta * z + z * v
        raise ValueError(f"unknown form {form!r}")

    def derivative_by_quadrature(self, z, n=1, abstol=1e-12):
        """phi^(n)(z) via quadrature of int y^n e^{-zy} mu(dy) (oracle path)."""
        z = complex(z)
        if z.real <= self.a_phi:
            raise OutOfStrip(f"Re z = {z.real} <= a_phi = {self.a_phi}")
        total = self.delta if n == 1 else 0.0
        sign = (-1.0) ** (n + 1)
        for comp in self.mu.side(POSITIVE):
            if isinstance(comp, Exponential):
                w, lam = comp.weight, comp.rate
                v, _ = quad.integrate_to_inf(
                    lambda y, w=w, lam=lam: y**n * np.exp(-z * y)
                    * w * lam * np.exp(-lam * y),
                    0.0, rate=max(lam + z.real, lam * 0.5, 0.25),
                    abstol=abstol)
                total += sign * v
            elif isinstance(comp, Atom):
                total += sign * comp.weight * comp.location**n \
                    * np.exp(-z * comp.location)
            else:
                pieces, atom_w = comp.pieces()
                for lo, hi, c in pieces:
                    v, _ = quad.integrate(
                        lambda y, c=c: c * y**n * np.exp(-z * y),
                        lo, hi, abstol=abstol)
                    total += sign * v
                if atom_w > 0:
                    total += sign * atom_w * comp.grid[-1]**n \
                        * np.exp(-z * comp.grid[-1])
        return total

    # -- misc -------------------------------------------------------------------

    def scaled(self, c):
        """c * phi as a Bernstein function (c > 0)."""
        if c <= 0:
            raise ValueError("scale must be positive")
        comps = []
        for side, comp in self.mu.components:
            if isinstance(comp, Exponential):
                comps.append((side, Exponential(c * comp.weight, comp.rate)))
            elif isinstance(comp, Atom):
                comps.append((side, Atom(c * comp.weight, comp.location)))
            else:
                comps.append((side, Tabulated(
                    comp.grid, tuple(c * t for t in comp.tail), comp.rv_alpha)))
        return BernsteinFunction(c * self.kappa, c * self.delta,
                                 MeasureSpec(tuple(comps)))

    def shifted(self, q):
        """phi(q + .) as a Bernstein function for q >= theta_phi (exact).

        Only exponential mixtures and atoms support the exact shift.
        """
        comps = []
        for side, comp in self.mu.components:
            if isinstance(comp, Exponential):
                # density w lam e^{-lam y} -> shift multiplies by e^{-q y}
                w2 = comp.weight * comp.rate / (comp.rate + q)
                comps.append((side, Exponential(w2, comp.rate + q)))
            elif isinstance(comp, Atom):
                comps.append((side, Atom(comp.weight * math.exp(-q * comp.location),
                                         comp.location)))
            else:
                raise ValueError("shift of tabulated measures is not supported")
        kappa2 = float(np.real(self.phi(complex(q))))
        return BernsteinFunction(kappa2, self.delta, MeasureSpec(tuple(comps)))
