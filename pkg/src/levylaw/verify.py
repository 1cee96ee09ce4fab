"""The `verify` subcommand: run the invariant suite against a process spec."""

from __future__ import annotations

import math

import numpy as np

from . import specfile
from .berngamma import BernsteinGamma
from .bernstein import BernsteinFunction
from .errors import LevyLawError
from .inversion import InversionConfig, build_density_grid, support
from .mellin import MellinLaw
from .simulate import PathSampler, compare, sample_functional
from .wiener_hopf import bernstein_violations, factorize, \
    grid_identity_residual


def _check(report, name, fn):
    try:
        ok, detail = fn()
    except LevyLawError as exc:
        ok, detail = False, f"{type(exc).__name__}: {exc}"
    except Exception as exc:  # pragma: no cover - defensive
        ok, detail = False, f"unexpected {type(exc).__name__}: {exc}"
    report["checks"].append({"name": name, "pass": bool(ok),
                             "detail": str(detail)})


def run_verification(spec_path, tol=1e-8, mc_paths=20000, seed=20260811):
    """Invariant suite: factorization, W recurrence/gamma recovery, Mellin
    recurrence, law normalization and (when finite) a Monte Carlo KS check."""
    exponent = specfile.load(spec_path)["process"]
    report = {"spec": str(spec_path), "checks": []}

    def negdef():
        v = exponent.negative_definiteness_probe()
        return v <= 1e-10, f"max Re Psi(ib) = {v:.2e}"

    _check(report, "negative_definiteness", negdef)

    pair = factorize(exponent)
    law = MellinLaw(pair, exponent)

    def identity():
        r = grid_identity_residual(exponent, pair)
        return r <= 1e-9, f"residual {r:.2e}"

    _check(report, "wiener_hopf_identity", identity)

    def bernstein_ok():
        bad = bernstein_violations(pair.phi_plus) \
            + bernstein_violations(pair.phi_minus)
        return not bad, "; ".join(bad) or "ok"

    _check(report, "factors_bernstein", bernstein_ok)

    def gamma_recovery():
        bg = BernsteinGamma(BernsteinFunction.identity())
        zs = np.array([0.5, 1.5, 3.0, 5.5, 2 + 4j, 0.5 + 10j])
        from scipy.special import loggamma
        err = float(np.max(np.abs(np.exp(bg.log_eval(zs)) - np.exp(loggamma(zs)))
                           / np.abs(np.exp(loggamma(zs)))))
        return err <= 1e-10, f"max rel err {err:.2e}"

    _check(report, "gamma_recovery", gamma_recovery)

    def w_recurrence():
        worst = 0.0
        for bg in (law.bg_plus, law.bg_minus):
            for z in (0.25, 1.5 + 3j, 4.0 + 20j):
                lhs = bg.eval(z + 1.0)
                rhs = bg.phi.phi(complex(z)) * bg.eval(z)
                worst = max(worst, abs(lhs - rhs) / abs(lhs))
        return worst <= 1e-10, f"max residual {worst:.2e}"

    _check(report, "w_recurrence", w_recurrence)

    if pair.in_finiteness_class:
        def m_recurrence():
            worst = 0.0
            for z in (0.5 + 5j, 0.5 - 2j, 0.25 + 11j):
                worst = max(worst, law.recurrence_residual(z))
            return worst <= 1e-9, f"max residual {worst:.2e}"

        _check(report, "mellin_recurrence", m_recurrence)

        def conj_symmetry():
            z = 0.4 + 3j
            d = abs(law.mellin_eval(np.conj(z)) - np.conj(law.mellin_eval(z)))
            return d <= 1e-12, f"|M(conj z) - conj M(z)| = {d:.2e}"

        _check(report, "conjugate_symmetry", conj_symmetry)

        supp = support(law)
        if not supp.is_point:
            def normalization():
                lo = supp.lo if supp.lo > 0 else 1e-3
                hi = supp.hi if math.isfinite(supp.hi) else 50.0
                xs = np.geomspace(max(lo, 1e-3) * 1.01, hi * 0.999, 40)
                grid = build_density_grid(law, xs, InversionConfig(tol=tol))
                bad = grid.violations(tol=100 * tol + 1e-6)
                f_hi = grid.F[-1] + grid.Fbar[-1]
                return not bad, f"violations={bad or 'none'} F+Fbar={f_hi:.6f}"

            _check(report, "density_grid_invariants", normalization)

            def monte_carlo():
                try:
                    sampler = PathSampler(exponent, rng_seed=seed)
                except LevyLawError as exc:
                    return True, f"skipped ({exc})"
                emp = sample_functional(sampler, mc_paths)
                lo = max(float(emp.samples[0]) * 0.9, 1e-4)
                hi = float(emp.samples[-1]) * 1.1
                if supp.is_point:
                    return True, "point mass"
                lo = max(lo, supp.lo * 1.0001 if supp.lo > 0 else lo)
                if math.isfinite(supp.hi):
                    hi = min(hi, supp.hi * 0.9999)
                xs = np.geomspace(lo, hi, 60)
                grid = build_density_grid(law, xs, InversionConfig(tol=tol))
                rep = compare(grid, emp)
                return rep["ks_pass"], (f"KS={rep['ks_statistic']:.4f} "
                                        f"crit={rep['ks_critical']:.4f}")

            _check(report, "monte_carlo_ks", monte_carlo)

    report["pass"] = all(c["pass"] for c in report["checks"])
    return report
