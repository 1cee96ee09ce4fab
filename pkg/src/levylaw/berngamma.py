"""Bernstein-gamma functions W_phi.

W_phi solves W(z+1) = phi(z) W(z), W(1) = 1 on the right half-plane and is
given by the generalized Weierstrass product

    W_phi(z) = e^{-g z} / phi(z) * prod_k [phi(k) / phi(k+z)] e^{z phi'(k)/phi(k)}

with g the phi-analogue of the Euler-Mascheroni constant.  Two evaluation
branches are provided:

* ``product`` -- the truncated product with an Euler-Maclaurin tail
  correction (fast and sharp for moderate |z|);
* ``stirling`` -- an exact Stirling-type form obtained by summing the
  product with the Euler-Maclaurin formula at order one,

      log W(z) = -log phi(z) - (1/2) log(phi(1+z)/phi(1))
                 + int_1^{1+z} log phi(u) du
                 - (1/2) int_1^inf P(u) [(log phi)''(u+z) - (log phi)''(u)] du,

  whose cost is independent of |z|.

Both branches agree to ~1e-12; the crossover (default |z| = 40) is a speed
choice, and the seam agreement is part of the test suite.  The modulus-only
Stirling representation through the components (A, G, E, R, T, H, H*) is
implemented separately in :func:`stirling_components` /
:func:`log_abs_stirling` and serves as an independent cross-check.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from . import quadrature as quad
from .bernstein import BernsteinFunction
from .errors import (ConvergenceFailure, NearPole, NoExplicitPotential,
                     OutOfStrip, SlowConvergence, Unclassifiable)

EULER_MASCHERONI = 0.5772156649015328606

_CHUNK = 8192


def euler_constant(phi: BernsteinFunction, tol=2e-15, n_start=64, n_max=32768):
    """gamma_phi = lim_n [sum_{k<=n} phi'(k)/phi(k) - log phi(n)].

    Euler-Maclaurin acceleration turns the harmonically slow limit into an
    O(n^-6) one; n is doubled until two estimates agree within ``tol``.  The
    constant multiplies z inside log W, so it is pushed to full precision
    (compensated summation) to keep tall-contour evaluations sharp.
    Always lies in [-log phi(1), phi'(1)/phi(1) - log phi(1)].
    """
    if phi.is_constant:
        return -math.log(phi.kappa)

    def estimate(n):
        k = np.arange(1, n + 1, dtype=float)
        h1 = phi.log_derivatives(k, 1)[0].real
        s = math.fsum(h1) - float(np.log(phi.phi(float(n)).real))
        d = [g.real if hasattr(g, "real") else g
             for g in phi.log_derivatives(float(n), 6)]
        s += -d[0] / 2.0 - d[1] / 12.0 + d[3] / 720.0 - d[5] / 30240.0
        return float(np.real(s))

    n = n_start
    prev = estimate(n)
    while n < n_max:
        n *= 2
        cur = estimate(n)
        if abs(cur - prev) < tol:
            return cur
        prev = cur
    raise SlowConvergence("euler constant iteration stalled",
                          estimate=prev, error_bound=abs(cur - prev))


@dataclass(frozen=True)
class PoleReport:
    """A simple pole of the meromorphic extension of W_phi."""
    location: float
    index: int        # pole sits at theta_phi - index
    residue: float


@dataclass(frozen=True)
class DecayClass:
    kind: str               # 'exponential' | 'polynomial' | 'rapid'
    rate: float = 0.0       # exponential rate theta: |W(a+ib)| <~ e^{-theta |b|}
    exponent: float = 0.0   # polynomial exponent
    lattice: bool = False
    lattice_step: float = 0.0


class BernsteinGamma:
    """Evaluator for W_phi; immutable after construction, evaluations pure."""

    def __init__(self, phi: BernsteinFunction, tol=1e-12, crossover=40.0):
        self.phi = phi
        self.tol = float(tol)
        self.crossover = float(crossover)
        self.euler_const = euler_constant(phi, tol=min(tol, 1e-12))
        self._k_cache = {}
        self._n_cache = {}   # |z| bucket -> certified product truncation

    # -- plumbing ---------------------------------------------------------------

    def _k_terms(self, n):
        """Cached (log phi(k), phi'(k)/phi(k)) on k = 1..n."""
        got = self._k_cache.get(n)
        if got is None:
            k = np.arange(1, n + 1, dtype=float)
            val = self.phi.phi(k)
            logk = np.log(val.real)
            h1 = (self.phi.derivative(k, 1) / val).real
            got = (logk, h1)
            self._k_cache[n] = got
        return got

    def _log_eval_product(self, z, n_terms):
        """Product branch on an array of z with Re z > 0."""
        phi = self.phi
        out = np.empty(z.shape, dtype=complex)
        logk, h1 = self._k_terms(n_terms)
        kk = np.arange(1, n_terms + 1, dtype=float)
        n1 = float(n_terms + 1)
        log_n1 = float(np.log(phi.phi(n1).real))
        dlog_n1 = [complex(v) for v in phi.log_derivatives(n1, 6)]
        x_gl, w_gl = np.polynomial.legendre.leggauss(24)
        s_gl = 0.5 * (x_gl + 1.0)
        for i0 in range(0, z.size, _CHUNK):
            zc = z.reshape(-1)[i0:i0 + _CHUNK]
            acc = -self.euler_const * zc - np.log(phi.phi(zc))
            acc = acc + np.sum(
                logk[:, None] - np.log(phi.phi(kk[:, None] + zc[None, :]))
                + zc[None, :] * h1[:, None], axis=0)
            # Euler-Maclaurin tail at N+1
            seg_nodes = n1 + np.outer(s_gl, zc)
            seg = zc * np.einsum("i,ij->j", 0.5 * w_gl, np.log(phi.phi(seg_nodes)))
            # refine the segment integral once; log phi is smooth there but the
            # 24-node rule can lose digits for very long segments
            acc = acc + seg - zc * log_n1
            dz = phi.log_derivatives(n1 + zc, 6)

            def t_deriv(m):
                # m-th derivative of t(u) = z h'(u) - log phi(u+z) + log phi(u)
                if m == 0:
                    return zc * dlog_n1[0] - np.log(phi.phi(n1 + zc)) + log_n1
                return zc * dlog_n1[m] - dz[m - 1] + dlog_n1[m - 1]

            acc = acc + t_deriv(0) / 2.0 - t_deriv(1) / 12.0 \
                + t_deriv(3) / 720.0 - t_deriv(5) / 30240.0
            out.reshape(-1)[i0:i0 + _CHUNK] = acc
        return out

    def _certify_n(self, zp, z_scale):
        """Find a truncation N whose doubling is within tolerance.

        The Euler-Maclaurin tail error grows with |z| and shrinks like N^-7,
        so the certificate obtained at the bucket scale ``z_scale`` covers
        every smaller |z|; it is checked on a subsample dominated by the
        largest arguments.
        """
        n = max(32, int(math.ceil((z_scale / self.tol) ** (1.0 / 7.0))),
                int(math.ceil(0.6 * min(z_scale, 80.0))))
        eps = np.finfo(float).eps
        if zp.size > 512:
            idx = np.argsort(np.abs(zp))
            probe = np.concatenate([idx[-48:], idx[:: max(1, zp.size // 48)]])
            probe = np.unique(probe)
        else:
            probe = np.arange(zp.size)
        for _ in range(5):
            ref = self._log_eval_product(zp[probe], 2 * n)
            cur = self._log_eval_product(zp[probe], n)
            gap = np.abs(ref - cur) - 100.0 * eps * np.abs(ref)
            if float(np.max(gap)) < 10 * self.tol:
                return n
            n *= 2
        raise ConvergenceFailure("Weierstrass product failed to settle")

    def _log_eval_stirling(self, z):
        """Exact Stirling-form branch on an array of z with Re z > 0."""
        phi = self.phi
        out = np.empty(z.shape, dtype=complex)
        flat = z.reshape(-1)
        for i, zv in enumerate(flat):
            zv = complex(zv)
            seg, _ = quad.integrate(
                lambda t: zv * np.log(phi.phi(1.0 + t * zv)), 0.0, 1.0,
                abstol=1e-14, reltol=1e-14)
            U = 64.0

            def s(u):
                return phi.log_derivatives(u + zv, 2)[1] \
                    - phi.log_derivatives(u, 2)[1]

            def s_tail(Uv):
                return -phi.log_derivatives(Uv + zv, 1)[0] \
                    + phi.log_derivatives(Uv, 1)[0]

            def s_der(Uv, k):
                a = phi.log_derivatives(Uv + zv, 2 + k)[1 + k]
                b = phi.log_derivatives(Uv, 2 + k)[1 + k]
                return a - b

            estar = 0.5 * quad.sawtooth_integral(s, s_tail, s_der, 1.0, U)
            out.reshape(-1)[i] = (
                -np.log(phi.phi(zv))
                - 0.5 * (np.log(phi.phi(1.0 + zv)) - np.log(phi.phi(1.0)))
                + seg - estar)
        return out

    # -- public evaluation --------------------------------------------------------

    def log_eval(self, z, branch="auto"):
        """log W_phi(z) on Re z > 0 (vectorized; no branch-cut ambiguity).

        ``branch`` in {'auto', 'product', 'stirling'}.
        """
        z_arr = np.asarray(z, dtype=complex)
        scalar = z_arr.shape == ()
        z_arr = np.atleast_1d(z_arr)
        if np.any(z_arr.real <= 0):
            raise OutOfStrip("log_eval requires Re z > 0; "
                             "use eval_extended for the meromorphic extension")
        out = np.empty(z_arr.shape, dtype=complex)
        if branch == "auto":
            # product everywhere for arrays: its Euler-Maclaurin tail error
            # scales like |z| N^-7, so a moderate N covers tall contours; the
            # Stirling form serves scalar far-field calls and the seam test
            mask = (np.ones(z_arr.shape, dtype=bool) if z_arr.size > 4
                    else np.abs(z_arr) <= self.crossover)
        elif branch == "product":
            mask = np.ones(z_arr.shape, dtype=bool)
        elif branch == "stirling":
            mask = np.zeros(z_arr.shape, dtype=bool)
        else:
            raise ValueError(f"unknown branch {branch!r}")
        if np.any(mask):
            zp = z_arr[mask]
            zmax = float(np.max(np.abs(zp)))
            bucket = max(6, math.ceil(math.log2(max(zmax, 1.0))))
            n = self._n_cache.get(bucket)
            if n is None:
                n = self._certify_n(zp, 2.0 ** bucket)
                self._n_cache[bucket] = n
            out[mask] = self._log_eval_product(zp, n)
        if np.any(~mask):
            out[~mask] = self._log_eval_stirling(z_arr[~mask])
        return complex(out[0]) if scalar else out.reshape(np.shape(z))

    def eval(self, z, branch="auto"):
        """W_phi(z) on Re z > 0."""
        lw = self.log_eval(z, branch=branch)
        return np.exp(lw) if np.ndim(lw) else cmath.exp(lw)

    # -- meromorphic extension ------------------------------------------------------

    def poles(self, lo=None):
        """Simple poles theta - k of the extension above ``lo`` (> a_phi)."""
        th = self.phi.theta_phi
        a = self.phi.a_phi
        if lo is None:
            lo = a
        lo = max(lo, a)
        if th == -math.inf or th <= a:
            return []
        reports = []
        k = 0
        w1th = self.eval(1.0 + th) if th > -1.0 else self._extended_value(1.0 + th)
        w1th = float(np.real(w1th))
        dphi = float(np.real(self.phi.derivative(complex(th), 1)))
        denom = dphi
        while th - k > lo:
            reports.append(PoleReport(th - k, k, w1th / denom))
            k += 1
            nxt = float(np.real(self.phi.phi(complex(th - k))))
            denom *= nxt
            if k > 10000:
                break
        return reports

    def _extended_value(self, z):
        z = complex(z)
        n = int(math.ceil(0.5 - z.real)) if z.real < 0.5 else 0
        if n == 0:
            return self.eval(z)
        shifted = self.eval(z + n)
        for j in range(n):
            shifted = shifted / self.phi.phi(z + j)
        return shifted

    def eval_extended(self, z):
        """W_phi on Re z > a_phi via the recurrence; PoleReport at poles."""
        z = complex(z)
        a = self.phi.a_phi
        if z.real <= a:
            raise OutOfStrip(f"Re z = {z.real} <= a_phi = {a}")
        if z.real > 0:
            return self.eval(z)
        th = self.phi.theta_phi
        if th > -math.inf:
            k_near = round(th - z.real)
            if 0 <= k_near and abs(z - (th - k_near)) < 1e-9 * (1 + abs(th)):
                for rep in self.poles():
                    if rep.index == k_near:
                        return rep
        value = self._extended_value(z)
        if not np.isfinite(value.real) or not np.isfinite(value.imag):
            raise NearPole("recurrence hit a zero of phi", location=z)
        return value

    def log_eval_extended(self, z):
        """log W_phi on Re z > a_phi (away from poles), via shifted logs."""
        z = np.asarray(z, dtype=complex)
        scalar = z.shape == ()
        z = np.atleast_1d(z)
        a = self.phi.a_phi
        if np.any(z.real <= a):
            raise OutOfStrip(f"Re z <= a_phi = {a}")
        n = np.maximum(0, np.ceil(0.5 - z.real).astype(int))
        nmax = int(n.max())
        out = self.log_eval(z + n)
        for j in range(nmax):
            sel = n > j
            out[sel] = out[sel] - np.log(self.phi.phi(z[sel] + j))
        return complex(out[0]) if scalar else out.reshape(np.shape(z))


# -- Stirling components --------------------------------------------------------

@dataclass(frozen=True)
class StirlingComponents:
    """Components of the exact modulus representation

    |W(z)| = sqrt(phi(1) / (phi(a) phi(1+a) |phi(z)|)) e^{G - A} e^{-E - R},
    z = a + ib, together with the large-a pieces H, H* and the constant T.
    """
    A: float
    G: float
    E: float
    R: float
    T: float
    H: float
    Hstar: float

    @staticmethod
    def sawtooth_weight(u):
        return quad.sawtooth_P(u)


def _arg_integral(phi, a, b_abs, abstol=1e-12):
    if b_abs == 0:
        return 0.0
    v, _ = quad.integrate(
        lambda u: np.angle(phi.phi(a + 1j * u)), 0.0, b_abs,
        abstol=abstol, reltol=1e-12, max_panels=8000)
    return float(np.real(v))


def stirling_components(phi: BernsteinFunction, z, abstol=1e-12):
    """Compute (A, G, E, R, T, H, H*) at z = a + ib with a > 0."""
    z = complex(z)
    a, b = z.real, z.imag
    if a <= 0:
        raise OutOfStrip("stirling components need Re z > 0")
    A = _arg_integral(phi, a, abs(b), abstol)
    G, _ = quad.integrate(lambda u: np.log(phi.phi(u).real), 1.0, 1.0 + a,
                          abstol=abstol)
    G = float(np.real(G))
    H, _ = quad.integrate(
        lambda u: u * (phi.derivative(u, 1) / phi.phi(u)).real, 1.0, 1.0 + a,
        abstol=abstol)
    H = float(np.real(H))
    pa = phi.phi(complex(a)).real
    Hstar = a * (phi.phi(complex(a + 1.0)).real - pa) / pa

    U = 64.0
    zc = complex(z)

    if phi.is_constant:
        E = R = T = 0.0
        return StirlingComponents(A, G, E, R, T, H, Hstar)

    def h(u, order):
        return phi.log_derivatives(u, order)[order - 1]

    # E: (1/2) int_0^inf P(u) d^2/du^2 [ ln|phi(u+z)| - ln phi(u+a) ] du
    def sE(u):
        return np.real(h(u + zc, 2)) - np.real(h(u + a, 2))

    def sE_tail(Uv):
        return -np.real(h(Uv + zc, 1)) + np.real(h(Uv + a, 1))

    def sE_der(Uv, k):
        return np.real(h(Uv + zc, 2 + k)) - np.real(h(Uv + a, 2 + k))

    E = 0.5 * float(np.real(quad.sawtooth_integral(sE, sE_tail, sE_der, 0.0, U)))

    # R: (1/2) int_1^inf P(u) d^2/du^2 ln(phi(u+a)/phi(u)) du
    def sR(u):
        return np.real(h(u + a, 2) - h(u, 2))

    def sR_tail(Uv):
        return float(np.real(-h(Uv + a, 1) + h(Uv, 1)))

    def sR_der(Uv, k):
        return float(np.real(h(Uv + a, 2 + k) - h(Uv, 2 + k)))

    R = 0.5 * float(np.real(quad.sawtooth_integral(sR, sR_tail, sR_der, 1.0, U)))

    # T: -(1/2) int_1^inf P(u) (ln phi)''(u) du
    def sT(u):
        return np.real(h(u, 2))

    def sT_tail(Uv):
        return float(np.real(-h(Uv, 1)))

    def sT_der(Uv, k):
        return float(np.real(h(Uv, 2 + k)))

    T = -0.5 * float(np.real(quad.sawtooth_integral(sT, sT_tail, sT_der, 1.0, U)))
    return StirlingComponents(A, G, E, R, T, H, Hstar)


def log_abs_stirling(phi: BernsteinFunction, z, abstol=1e-12):
    """ln|W_phi(z)| assembled from the Stirling components (exact identity)."""
    z = complex(z)
    a = z.real
    if a <= 0:
        raise OutOfStrip("log_abs_stirling needs Re z > 0")
    c = stirling_components(phi, z, abstol=abstol)
    p1 = phi.phi(1.0).real
    pa = phi.phi(complex(a)).real
    pa1 = phi.phi(complex(a + 1.0)).real
    pz = abs(phi.phi(z))
    return 0.5 * (math.log(p1) - math.log(pa) - math.log(pa1) - math.log(pz)) \
        + c.G - c.A - c.E - c.R


def real_stirling_log_abs(phi: BernsteinFunction, z, abstol=1e-12):
    """Large-a asymptotic form of ln|W(a+ib)| built from T, H, H* and A.

    ln|W| = -T - (1/2) ln(|phi(z)| phi(1)) + a ln phi(a) - H(a) + H*(a) - A(z)
    up to O(1/a); exposed for the asymptotic agreement tests.
    """
    z = complex(z)
    a = z.real
    c = stirling_components(phi, z, abstol=abstol)
    pa = phi.phi(complex(a)).real
    return -c.T - 0.5 * (math.log(abs(phi.phi(z))) + math.log(phi.phi(1.0).real)) \
        + a * math.log(pa) - c.H + c.Hstar - c.A


def a_phi_dual(phi: BernsteinFunction, z, abstol=1e-10):
    """A_phi via the dual representation int_a^inf ln(|phi(u+ib)|/phi(u)) du.

    The tail beyond U is summed analytically through the even expansion
    ln|phi(u+ib)| - ln phi(u) = -(b^2/2) h'' + (b^4/24) h'''' - ... .
    """
    z = complex(z)
    a, b = z.real, abs(z.imag)
    if a <= 0:
        raise OutOfStrip("dual representation needs Re z > 0")
    if b == 0:
        return 0.0
    if phi.is_constant:
        return 0.0
    U = max(25.0 * b, 25.0 * a, 200.0)

    def f(u):
        return np.log(np.abs(phi.phi(u + 1j * b))) - np.log(phi.phi(u).real)

    v, _ = quad.integrate(f, a, U, abstol=abstol, max_panels=16000)
    d1 = complex(phi.log_derivatives(U, 1)[0]).real
    d3 = complex(phi.log_derivatives(U, 3)[2]).real
    d5 = complex(phi.log_derivatives(U, 5)[4]).real
    tail = (b**2 / 2.0) * d1 - (b**4 / 24.0) * d3 + (b**6 / 720.0) * d5
    return float(np.real(v)) + tail


# -- decay classification ---------------------------------------------------------


def _lattice_step(locations, tol=1e-9):
    """Greatest common step of atom locations (None if not a lattice)."""
    locs = sorted(locations)
    h = locs[0]
    for x in locs[1:]:
        a_, b_ = h, x
        while b_ > tol * locs[-1]:
            a_, b_ = b_, a_ % b_
        h = a_
    if h <= tol * locs[-1]:
        return None
    for x in locs:
        k = round(x / h)
        if abs(x - k * h) > tol * max(1.0, x):
            return None
    return h


def decay_class(phi: BernsteinFunction) -> DecayClass:
    """Classify the decay of |W_phi(a+ib)| as |b| -> inf."""
    if phi.is_constant:
        return DecayClass("polynomial", exponent=0.0)
    if phi.delta > 0:
        return DecayClass("exponential", rate=math.pi / 2.0)
    comps = phi.mu.side("positive")
    from .measures import Atom, Tabulated  # local import avoids a cycle
    rv = [c.rv_alpha for c in comps
          if isinstance(c, Tabulated) and c.rv_alpha is not None]
    if rv:
        alpha = rv[0]
        if not (0 < alpha < 1):
            raise Unclassifiable(f"rv_alpha tag {alpha} outside (0,1)")
        return DecayClass("exponential", rate=math.pi * alpha / 2.0)
    atoms = [c for c in comps if isinstance(c, Atom)]
    dens = [c for c in comps if not isinstance(c, Atom)]
    if atoms and not dens:
        step = _lattice_step([c.location for c in atoms])
        if phi.kappa == 0 and step is not None:
            return DecayClass("polynomial", exponent=0.0, lattice=True,
                              lattice_step=step)
        return DecayClass("polynomial", exponent=0.0)
    if atoms and dens:
        raise Unclassifiable("mixed atomic and continuous jump parts")
    v0 = phi.mu.density_at_zero()
    pinf = phi.phi_at_infinity()
    if not math.isfinite(v0):
        return DecayClass("rapid")
    return DecayClass("polynomial", exponent=v0 / pinf)


# -- Malmsten-type integral --------------------------------------------------------


def malmsten_log(phi: BernsteinFunction, z, abstol=1e-12):
    """log W_phi(z+1) via the Malmsten-type integral (explicit potentials only).

    Supported: affine phi = c (beta + .) including phi(z) = z and
    phi(z) = q + z, whose potential measure has the closed-form density
    e^{-beta y} / c.  Then kappa(dy) = c U(dy) = e^{-beta y} dy and

        log W(z+1) = z log phi(1)
                     + int_0^inf (e^{-zy} - 1 - z (e^{-y} - 1)) e^{-beta y}
                       / (y (e^y - 1)) dy.
    """
    if not (phi.mu.is_empty and phi.delta > 0):
        raise NoExplicitPotential(
            "Malmsten form implemented for affine phi = c(beta + z) only")
    z = complex(z)
    if z.real <= -1.0:
        raise OutOfStrip("need Re z > -1")
    c = phi.delta
    beta = phi.kappa / c

    def integrand(y):
        y = np.asarray(y, dtype=float)
        ys = np.where(y < 1e-5, 1.0, y)  # keep the division well-defined
        w = np.exp(-z * ys) - 1.0 - z * np.expm1(-ys)
        den = ys * np.expm1(ys)
        series = 0.5 * (z * z - z) \
            + y * ((z - z**3) / 6.0 - (z * z - z) / 4.0)
        out = np.where(y < 1e-5, series, w / den)
        return out * np.exp(-beta * y)

    v, _ = quad.integrate_to_inf(integrand, 0.0,
                                 rate=max(1.0, beta + 1.0), abstol=abstol)
    return z * cmath.log(complex(phi.phi(1.0))) + v
