"""levylaw: Bernstein-gamma functions and exponential functionals of Levy
processes -- Wiener-Hopf factors, Mellin transforms, Mellin-Barnes inversion
of the law, and a Monte Carlo cross-check."""

__version__ = "0.1.0"

from .bernstein import BernsteinFunction, Thresholds
from .berngamma import (BernsteinGamma, DecayClass, PoleReport,
                        StirlingComponents, a_phi_dual, decay_class,
                        euler_constant, log_abs_stirling, malmsten_log,
                        stirling_components)
from .levyexp import LevyExponent
from .measures import (Atom, Exponential, MeasureSpec, PolyDensity,
                       Tabulated, NEGATIVE, POSITIVE)
from .mellin import MellinLaw, MellinDecay, MellinPole
from .inversion import (CramerAsymptote, DensityGrid, InversionConfig,
                        PointValue, SmallXExpansion, Support,
                        build_density_grid, cdf, cramer_tail, density,
                        finite_horizon_moment, small_x_coefficients,
                        small_x_series, smoothness_cap, support, tail)
from .simulate import EmpiricalLaw, PathSampler, compare, \
    sample_finite_horizon, sample_functional
from .wiener_hopf import (FactorPair, factorize, friendly_inverse_tail,
                          grid_identity_residual, kill,
                          potential_density_grid, upsilon_minus_at_zero,
                          validate_pair)

__all__ = [name for name in dir() if not name.startswith("_")]
