"""Characteristic exponents Psi of (possibly killed) Levy processes.

Convention: Psi(z) = sigma^2 z^2 / 2 + gamma z + int (e^{zr} - 1) Pi(dr) - q,
so E[e^{z xi_t}] = e^{t Psi(z)} and Psi(0) = -q.  The jump integral is written
without compensation, which is legitimate because every supported measure kind
has int (1 ^ |r|) Pi(dr) < inf; a cutoff-compensated triplet maps onto this
one by an explicit shift of gamma.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import quadrature as quad
from .errors import OutOfStrip
from .measures import NEGATIVE, POSITIVE, Atom, Exponential, MeasureSpec


@dataclass(frozen=True)
class LevyExponent:
    sigma2: float = 0.0
    gamma: float = 0.0
    levy_measure: MeasureSpec = field(default_factory=MeasureSpec)
    kill_rate: float = 0.0

    def __post_init__(self):
        if self.sigma2 < 0:
            raise ValueError("sigma2 must be non-negative")
        if self.kill_rate < 0:
            raise ValueError("kill_rate must be non-negative")

    # -- basic structure -------------------------------------------------------

    @property
    def q(self):
        return self.kill_rate

    def strip(self):
        """Open strip (lo, hi) where the jump integral converges absolutely."""
        return self.levy_measure.strip()

    def is_spectrally_negative(self):
        return not self.levy_measure.side(POSITIVE)

    def is_spectrally_positive(self):
        return not self.levy_measure.side(NEGATIVE)

    def has_jumps(self):
        return not self.levy_measure.is_empty

    def jump_activity(self):
        """Total mass Pi(R) (finite for all supported kinds)."""
        return self.levy_measure.total_mass(POSITIVE) \
            + self.levy_measure.total_mass(NEGATIVE)

    def mean(self):
        """E[xi_1] of the unkilled part: Psi'(0) + q."""
        return self.gamma + self.levy_measure.mean(POSITIVE) \
            - self.levy_measure.mean(NEGATIVE)

    # -- evaluation --------------------------------------------------------------

    def psi(self, z, check_strip=True):
        """Psi(z) on the analyticity strip (closed form, vectorized)."""
        z_arr = np.asarray(z, dtype=complex)
        if check_strip:
            lo, hi = self.strip()
            re = np.real(z_arr)
            if np.any(re <= lo) or np.any(re >= hi):
                raise OutOfStrip(
                    f"Re z must lie in ({lo}, {hi}) for this exponent")
        out = 0.5 * self.sigma2 * z_arr**2 + self.gamma * z_arr \
            - self.kill_rate + self.levy_measure.levy_integral(z_arr)
        return out if out.shape else complex(out)

    def __call__(self, z):
        return self.psi(z)

    def psi_derivative(self, z, n=1):
        """Psi^(n)(z) for n in {1, 2} (closed form, vectorized)."""
        z_arr = np.asarray(z, dtype=complex)
        if n == 1:
            out = self.sigma2 * z_arr + self.gamma \
                + self.levy_measure.levy_moment(z_arr, 1)
        elif n == 2:
            out = self.sigma2 + self.levy_measure.levy_moment(z_arr, 2)
        else:
            raise ValueError("only first and second derivatives are exposed")
        return out if out.shape else complex(out)

    def psi_by_quadrature(self, z, abstol=1e-12):
        """Independent evaluation of the jump integral by adaptive quadrature."""
        z = complex(z)
        lo, hi = self.strip()
        if not (lo < z.real < hi):
            raise OutOfStrip(f"Re z = {z.real} outside ({lo}, {hi})")
        total = 0.5 * self.sigma2 * z**2 + self.gamma * z - self.kill_rate
        for side, sign in ((POSITIVE, 1.0), (NEGATIVE, -1.0)):
            for comp in self.levy_measure.side(side):
                if isinstance(comp, Exponential):
                    w, lam = comp.weight, comp.rate
                    decay = lam - max(sign * z.real, 0.0)
                    v, _ = quad.integrate_to_inf(
                        lambda y, w=w, lam=lam: (np.exp(sign * z * y) - 1.0)
                        * w * lam * np.exp(-lam * y),
                        0.0, rate=max(decay, 1e-2), abstol=abstol)
                    total += v
                elif isinstance(comp, Atom):
                    total += comp.weight * (np.exp(sign * z * comp.location) - 1.0)
                else:
                    pieces, atom_w = comp.pieces()
                    for plo, phi_, c in pieces:
                        v, _ = quad.integrate(
                            lambda y, c=c: c * (np.exp(sign * z * y) - 1.0),
                            plo, phi_, abstol=abstol)
                        total += v
                    if atom_w > 0:
                        total += atom_w * (np.exp(sign * z * comp.grid[-1]) - 1.0)
        return total

    # -- spot validation ----------------------------------------------------------

    def negative_definiteness_probe(self, b_grid=None):
        """max Re Psi(ib) over a grid; must be <= 0 up to round-off."""
        if b_grid is None:
            b_grid = np.linspace(-50.0, 50.0, 101)
        vals = self.psi(1j * np.asarray(b_grid), check_strip=False)
        return float(np.max(np.real(vals)))

    def killed(self, extra_q):
        """Same triplet with the kill rate increased by extra_q > 0."""
        if extra_q <= 0:
            raise ValueError("additional kill rate must be positive")
        return LevyExponent(self.sigma2, self.gamma, self.levy_measure,
                            self.kill_rate + extra_q)

    def zero_scan(self, b_max=60.0, n=4001):
        """Imaginary-axis zeros of Psi: b with |Psi(ib)| ~ 0 (lattice flag)."""
        b = np.linspace(-b_max, b_max, n)
        vals = np.abs(self.psi(1j * b, check_strip=False))
        scale = 1.0 + np.abs(b) + np.abs(b) ** 2 * (0.5 * self.sigma2)
        hits = b[vals / scale < 1e-10]
        nontrivial = hits[np.abs(hits) > 1e-9]
        return hits, nontrivial.size > 0
