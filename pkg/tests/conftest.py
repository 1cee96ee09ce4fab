import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from levylaw import (BernsteinFunction, Exponential, LevyExponent,
                     MeasureSpec, MellinLaw, NEGATIVE, POSITIVE)


@pytest.fixture(scope="session")
def phi_identity():
    return BernsteinFunction.identity()


@pytest.fixture(scope="session")
def phi_affine():
    return BernsteinFunction.affine(0.8, 1.0)


@pytest.fixture(scope="session")
def phi_expmix():
    # kappa + delta z + exponential jumps: all closed-form paths exercised
    return BernsteinFunction.exponential_mixture(0.3, 0.5, [(1.0, 1.0),
                                                            (0.4, 3.0)])


@pytest.fixture(scope="session")
def killed_drift_laws():
    return {q: MellinLaw.from_exponent(LevyExponent(gamma=1.0, kill_rate=q))
            for q in (0.5, 1.0, 2.0, 3.0)}


@pytest.fixture(scope="session")
def dufresne_law():
    # gamma=1, sigma^2=2: I is distributed as 1/Exp(1)
    return MellinLaw.from_exponent(LevyExponent(sigma2=2.0, gamma=1.0))


@pytest.fixture(scope="session")
def dufresne_finite_moments_law():
    # gamma=2.5, sigma^2=2: I ~ 1/Gamma(2.5); E[I], E[I^2] finite
    return MellinLaw.from_exponent(LevyExponent(sigma2=2.0, gamma=2.5))


@pytest.fixture(scope="session")
def killed_bm_drift_law():
    # sigma^2=2, gamma=1, q=1: Cramer root theta = (-1 - sqrt(5))/2
    return MellinLaw.from_exponent(
        LevyExponent(sigma2=2.0, gamma=1.0, kill_rate=1.0))


@pytest.fixture(scope="session")
def two_sided_law():
    m = MeasureSpec(((POSITIVE, Exponential(0.7, 3.0)),
                     (NEGATIVE, Exponential(1.2, 2.0))))
    return MellinLaw.from_exponent(
        LevyExponent(sigma2=1.0, gamma=0.3, levy_measure=m, kill_rate=0.5))
