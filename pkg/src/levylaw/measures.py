"""Measure specifications for Levy and Bernstein-function triplets.

A measure is a finite list of one-sided components:

* ``exponential(weight, rate)``  -- density ``weight * rate * exp(-rate*y)``,
  total mass ``weight``;
* ``atom(weight, location)``     -- point mass at ``location > 0``;
* ``tabulated(grid, tail)``      -- the tail function ``m(y) = mu([y, inf))``
  sampled on a grid, interpolated piecewise linearly (equivalently a
  piecewise-constant density plus an atom at the last grid point when the
  tabulated tail does not reach zero).

All integral transforms used downstream (``int (1 - e^{-zy}) mu(dy)``, the
Levy-side analogue and moment integrals ``int y^n e^{-zy} mu(dy)``) are exact
for these components, which keeps every evaluation closed-form; adaptive
quadrature enters only as an independent cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

POSITIVE = "positive"
NEGATIVE = "negative"

_SMALL = 1e-4  # |z * dy| switch to series forms


@dataclass(frozen=True)
class Exponential:
    weight: float
    rate: float

    def __post_init__(self):
        if not (self.weight > 0 and self.rate > 0):
            raise ValueError("exponential component needs weight>0 and rate>0")


@dataclass(frozen=True)
class Atom:
    weight: float
    location: float

    def __post_init__(self):
        if not (self.weight > 0 and self.location > 0):
            raise ValueError("atom component needs weight>0 and location>0")


@dataclass(frozen=True)
class Tabulated:
    grid: tuple
    tail: tuple
    rv_alpha: float | None = None  # regular-variation index tag at zero

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        t = np.asarray(self.tail, dtype=float)
        if g.ndim != 1 or g.size < 2 or t.shape != g.shape:
            raise ValueError("tabulated component needs matching 1-d grid/tail")
        if g[0] < 0 or np.any(np.diff(g) <= 0):
            raise ValueError("tabulated grid must be non-negative and increasing")
        if np.any(t < -1e-14) or np.any(np.diff(t) > 1e-12 * max(1.0, t[0])):
            raise ValueError("tabulated tail must be non-negative and non-increasing")
        object.__setattr__(self, "grid", tuple(float(x) for x in g))
        object.__setattr__(self, "tail", tuple(float(x) for x in t))

    def pieces(self):
        """Piecewise-constant density (lo, hi, c) plus terminal atom weight."""
        g = np.asarray(self.grid)
        t = np.asarray(self.tail)
        c = (t[:-1] - t[1:]) / (g[1:] - g[:-1])
        return list(zip(g[:-1], g[1:], c)), float(t[-1])

    def estimated_decay_rate(self):
        """Log-slope of the tail over the last grid cells (approximate)."""
        g = np.asarray(self.grid)
        t = np.asarray(self.tail)
        pos = t > 0
        if pos.sum() < 2:
            return math.inf
        g, t = g[pos], t[pos]
        k = max(0, len(g) - 4)
        slope = np.polyfit(g[k:], np.log(t[k:]), 1)[0]
        return max(-slope, 0.0)


@dataclass(frozen=True)
class PolyDensity:
    """Density c0 + c1 (y - lo) on the interval [lo, hi] (kept non-negative).

    Exact carrier for descending-ladder measures of spectrally negative
    exponents, whose density is a tabulated-tail interpolant (piecewise
    linear).  Compactly supported, hence no analyticity constraint.
    """
    lo: float
    hi: float
    c0: float
    c1: float

    def __post_init__(self):
        if not (0 <= self.lo < self.hi):
            raise ValueError("need 0 <= lo < hi")
        d = self.hi - self.lo
        if self.c0 < -1e-14 or self.c0 + self.c1 * d < -1e-12 * max(1.0, self.c0):
            raise ValueError("density must be non-negative on [lo, hi]")


Component = Exponential | Atom | Tabulated | PolyDensity


# -- stable kernels ----------------------------------------------------------

def _e_ratio(w):
    """(1 - exp(-w)) / w, stable near w = 0 (vectorized, complex)."""
    w = np.asarray(w, dtype=complex)
    out = np.empty_like(w)
    small = np.abs(w) < _SMALL
    ws = w[small]
    out[small] = 1.0 - ws / 2.0 + ws**2 / 6.0 - ws**3 / 24.0
    wb = w[~small]
    out[~small] = -np.expm1(-wb) / wb
    return out


def _interval_one_minus_exp(z, lo, hi):
    """int_lo^hi (1 - e^{-z y}) dy, vectorized in z."""
    z = np.asarray(z, dtype=complex)
    d = hi - lo
    return d - d * np.exp(-z * lo) * _e_ratio(z * d)


def _unit_moments(w, n):
    """m_j(w) = int_0^1 t^j e^{-w t} dt for j = 0..n, stable for all complex w.

    Series below |w| = 4 (no cancellation), upward recurrence above
    (amplification factor j/|w| < 2 per step).
    """
    shape = np.shape(w)
    w = np.atleast_1d(np.asarray(w, dtype=complex))
    out = np.empty((n + 1,) + w.shape, dtype=complex)
    small = np.abs(w) < 4.0
    if np.any(small):
        ws = w[small]
        for j in range(n + 1):
            term = np.full(ws.shape, 1.0 / (j + 1), dtype=complex)
            acc = term.copy()
            for m in range(1, 60):
                term = term * (-ws) / m * (j + m) / (j + m + 1)
                acc = acc + term
                if np.all(np.abs(term) < 1e-20):
                    break
            out[j][small] = acc
    big = ~small
    if np.any(big):
        wb = w[big]
        ew = np.exp(-wb)
        mj = (1.0 - ew) / wb
        out[0][big] = mj
        for j in range(1, n + 1):
            mj = (j * mj - ew) / wb
            out[j][big] = mj
    return out.reshape((n + 1,) + shape)


def _interval_moment(z, lo, hi, n):
    """int_lo^hi y^n e^{-z y} dy, vectorized in z (n <= 8)."""
    z = np.asarray(z, dtype=complex)
    d = hi - lo
    m = _unit_moments(z * d, n)
    acc = np.zeros(z.shape, dtype=complex)
    for j in range(n + 1):
        acc = acc + math.comb(n, j) * lo ** (n - j) * d**j * m[j]
    return np.exp(-z * lo) * d * acc


# -- measure spec ------------------------------------------------------------

@dataclass(frozen=True)
class MeasureSpec:
    """A signed-side collection of measure components."""

    components: tuple = field(default_factory=tuple)  # tuple[(side, Component)]

    def __post_init__(self):
        comps = []
        merged = {}
        for side, comp in self.components:
            if side not in (POSITIVE, NEGATIVE):
                raise ValueError(f"unknown side {side!r}")
            if isinstance(comp, Exponential):
                key = (side, comp.rate)
                if key in merged:  # identical rates merge; keeps poles simple
                    merged[key] = Exponential(merged[key].weight + comp.weight,
                                              comp.rate)
                else:
                    merged[key] = comp
            else:
                comps.append((side, comp))
        comps.extend((side, comp) for (side, _r), comp in merged.items())
        object.__setattr__(self, "components", tuple(comps))

    @staticmethod
    def one_sided(*comps):
        return MeasureSpec(tuple((POSITIVE, c) for c in comps))

    def side(self, side):
        return [c for s, c in self.components if s == side]

    @property
    def is_empty(self):
        return not self.components

    def is_one_sided(self):
        return all(s == POSITIVE for s, _ in self.components)

    def has_atoms(self, side=POSITIVE):
        if any(isinstance(c, Atom) for c in self.side(side)):
            return True
        return any(isinstance(c, Tabulated) and c.pieces()[1] > 0
                   for c in self.side(side))

    def has_tabulated(self, side=POSITIVE):
        return any(isinstance(c, Tabulated) for c in self.side(side))

    # -- scalar summaries ----------------------------------------------------

    def tail(self, y, side=POSITIVE):
        """mu([y, inf)) for y > 0 on the requested side (vectorized)."""
        y = np.asarray(y, dtype=float)
        out = np.zeros(y.shape)
        for comp in self.side(side):
            if isinstance(comp, Exponential):
                out = out + comp.weight * np.exp(-comp.rate * y)
            elif isinstance(comp, Atom):
                out = out + comp.weight * (y <= comp.location)
            elif isinstance(comp, PolyDensity):
                lo, hi, c0, c1 = comp.lo, comp.hi, comp.c0, comp.c1
                a = np.clip(y, lo, hi)
                out = out + (c0 * (hi - a) + 0.5 * c1
                             * ((hi - lo) ** 2 - (a - lo) ** 2))
            else:
                g = np.asarray(comp.grid)
                t = np.asarray(comp.tail)
                v = np.interp(y, g, t, left=t[0], right=0.0)
                out = out + v
        return out if out.shape else float(out)

    def total_mass(self, side=POSITIVE):
        return float(self.tail(0.0, side))

    def mean(self, side=POSITIVE):
        """int y mu(dy) over the requested side."""
        total = 0.0
        for comp in self.side(side):
            if isinstance(comp, Exponential):
                total += comp.weight / comp.rate
            elif isinstance(comp, Atom):
                total += comp.weight * comp.location
            elif isinstance(comp, PolyDensity):
                lo, hi, c0, c1 = comp.lo, comp.hi, comp.c0, comp.c1
                total += (c0 - c1 * lo) * (hi**2 - lo**2) / 2 \
                    + c1 * (hi**3 - lo**3) / 3
            else:
                pieces, atom_w = comp.pieces()
                total += sum(c * (hi**2 - lo**2) / 2 for lo, hi, c in pieces)
                total += atom_w * comp.grid[-1]
        return total

    def density_at_zero(self, side=POSITIVE):
        """v(0+) of the absolutely continuous part (None when undefined)."""
        val = 0.0
        for comp in self.side(side):
            if isinstance(comp, Exponential):
                val += comp.weight * comp.rate
            elif isinstance(comp, Tabulated):
                pieces, _ = comp.pieces()
                lo, hi, c = pieces[0]
                if lo > 0:  # no mass near zero
                    continue
                val += c
            elif isinstance(comp, PolyDensity):
                if comp.lo == 0:
                    val += comp.c0
        return val

    def min_rate(self, side=POSITIVE):
        """Smallest exponential rate on the side (None when unconstrained)."""
        rates = [c.rate for c in self.side(side) if isinstance(c, Exponential)]
        return min(rates) if rates else None

    def abscissa(self, side=POSITIVE):
        """Divergence abscissa of int e^{-zy} mu(dy): (value, approximate?)."""
        bound = math.inf
        approx = False
        for comp in self.side(side):
            if isinstance(comp, Exponential):
                bound = min(bound, comp.rate)
            elif isinstance(comp, Tabulated):
                bound = min(bound, comp.estimated_decay_rate())
                approx = True
        return (-bound if bound < math.inf else -math.inf), approx

    # -- exact transforms (Bernstein orientation: int against e^{-zy}) -------

    def bernstein_integral(self, z, side=POSITIVE):
        """int (1 - e^{-z y}) mu(dy), vectorized over complex z."""
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape, dtype=complex)
        for comp in self.side(side):
            if isinstance(comp, Exponential):
                out = out + comp.weight * z / (z + comp.rate)
            elif isinstance(comp, Atom):
                out = out + comp.weight * (-np.expm1(-z * comp.location))
            elif isinstance(comp, PolyDensity):
                lo, hi, c0, c1 = comp.lo, comp.hi, comp.c0, comp.c1
                base = (c0 - c1 * lo)
                out = out + base * _interval_one_minus_exp(z, lo, hi)
                # linear part: c1 * int (1 - e^{-zy}) y dy
                out = out + c1 * ((hi**2 - lo**2) / 2.0
                                  - _interval_moment(z, lo, hi, 1))
            else:
                pieces, atom_w = comp.pieces()
                for lo, hi, c in pieces:
                    out = out + c * _interval_one_minus_exp(z, lo, hi)
                if atom_w > 0:
                    out = out + atom_w * (-np.expm1(-z * comp.grid[-1]))
        return out

    def bernstein_moment(self, z, n, side=POSITIVE):
        """int y^n e^{-z y} mu(dy) for n >= 1, vectorized over complex z."""
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape, dtype=complex)
        for comp in self.side(side):
            if isinstance(comp, Exponential):
                out = out + comp.weight * comp.rate * math.factorial(n) \
                    / (z + comp.rate) ** (n + 1)
            elif isinstance(comp, Atom):
                out = out + comp.weight * comp.location**n \
                    * np.exp(-z * comp.location)
            elif isinstance(comp, PolyDensity):
                lo, hi, c0, c1 = comp.lo, comp.hi, comp.c0, comp.c1
                out = out + (c0 - c1 * lo) * _interval_moment(z, lo, hi, n) \
                    + c1 * _interval_moment(z, lo, hi, n + 1)
            else:
                pieces, atom_w = comp.pieces()
                for lo, hi, c in pieces:
                    out = out + c * _interval_moment(z, lo, hi, n)
                if atom_w > 0:
                    out = out + atom_w * comp.grid[-1]**n \
                        * np.exp(-z * comp.grid[-1])
        return out

    # -- exact transforms (Levy orientation: int against e^{+zr} - 1) --------

    def levy_integral(self, z):
        """int (e^{z r} - 1) Pi(dr) over both sides, vectorized in z.

        Positive-side components live at r > 0 (argument +z); negative-side
        components at r < 0 enter through r -> -y (argument -z).
        """
        z = np.asarray(z, dtype=complex)
        pos = -self.bernstein_integral(-z, side=POSITIVE)
        neg = self.bernstein_integral(z, side=NEGATIVE)
        return pos - neg

    def levy_moment(self, z, n):
        """d^n/dz^n of :meth:`levy_integral` (n >= 1)."""
        z = np.asarray(z, dtype=complex)
        pos = self.bernstein_moment(-z, n, side=POSITIVE)
        neg = self.bernstein_moment(z, n, side=NEGATIVE) * (-1.0) ** n
        return pos + neg

    def strip(self):
        """Open strip (lo, hi) of absolute convergence of the Levy integral."""
        a_pos, _ = self.abscissa(POSITIVE)   # needs Re z < -a_pos
        a_neg, _ = self.abscissa(NEGATIVE)   # needs Re z > a_neg
        return (a_neg, -a_pos)
