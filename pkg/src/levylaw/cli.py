"""Command-line interface.

Subcommands
-----------
factorize   process spec -> factor-pair spec + grid-identity residual report
wgamma      bernstein spec + points -> CSV of W_phi values
mellin      process spec + points -> CSV of Mellin values and residuals
law         process spec + x grid -> CSV of f, F, Fbar with regimes
mc          process spec -> CSV of Monte Carlo samples or a summary JSON
mc-compare  Monte Carlo vs a `law` CSV -> goodness-of-fit JSON
verify      run the invariant suite on a spec -> JSON report

Exit codes: 0 success, 1 validation error, 2 numeric failure.  Every output
starts with a header naming the library version and the spec content hash.
The default tolerance comes from the LEVYLAW_TOL environment variable
(validated into (0, 1e-2]) and can be overridden per call with --tol.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from . import specfile
from .errors import NumericError, ValidationError
from .inversion import InversionConfig, build_density_grid
from .levyexp import LevyExponent
from .mellin import MellinLaw
from .simulate import PathSampler, compare, sample_finite_horizon, \
    sample_functional
from .wiener_hopf import factorize as wh_factorize
from .wiener_hopf import grid_identity_residual, validate_pair

_SCHEMAS = {
    "factorize": {
        "output": "factor-pair spec (TOML)",
        "report": {"residual": "max grid-identity residual on z = ib",
                   "class_tag": "factorization class",
                   "normalization": "free constant (phi_plus is monic)"},
    },
    "wgamma": {
        "columns": {
            "re_z": "Re z of the evaluation point",
            "im_z": "Im z of the evaluation point",
            "re_W": "Re W_phi(z)",
            "im_W": "Im W_phi(z)",
            "abs_err_est": "absolute error estimate of log W propagated to W",
            "branch_used": "product | stirling",
        },
    },
    "mellin": {
        "columns": {
            "re_z": "Re z", "im_z": "Im z",
            "re_M": "Re M(z)", "im_M": "Im M(z)",
            "recurrence_residual":
                "|M(z+1) Psi(-z) + z M(z)| / (|M(z+1) Psi(-z)| + |z M(z)|)",
        },
    },
    "law": {
        "columns": {
            "x": "evaluation point", "f": "density (NaN above smoothness cap)",
            "F": "distribution function", "Fbar": "survival function",
            "regime": "inversion | small_series | cramer_tail | l2_averaged",
            "err_est": "absolute error estimate",
        },
    },
    "mc": {
        "columns": {"sample": "one draw of the exponential functional"},
        "summary": {"n": "paths", "mean": "sample mean", "var": "sample var",
                    "quantiles": "deciles"},
    },
    "mc-compare": {
        "report": {"ks_statistic": "KS distance to the analytic CDF",
                   "ks_critical": "5% critical value",
                   "moments": "z-scores of requested moments",
                   "tail": "log-log tail regression slope vs d_minus"},
    },
    "verify": {
        "report": "per-check {name, pass, detail} entries plus overall pass",
    },
}


def _tolerance(args):
    raw = args.tol if args.tol is not None else \
        os.environ.get("LEVYLAW_TOL", "1e-8")
    tol = float(raw)
    if not (0.0 < tol <= 1e-2):
        raise ValidationError(f"tolerance {tol} outside (0, 1e-2]")
    return tol


def _header(args, out):
    text = specfile.spec_hash(args.spec)
    print(f"# levylaw {__version__} spec_sha256={text} "
          f"command={args.command}", file=out)


def _parse_points(spec):
    """'re,im;re,im;...' -> complex array."""
    pts = []
    for chunk in spec.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        re_s, _, im_s = chunk.partition(",")
        pts.append(complex(float(re_s), float(im_s or 0.0)))
    if not pts:
        raise ValidationError("no evaluation points given")
    return pts


def _parse_xgrid(spec):
    """'start:stop:step' or comma list -> float array."""
    if ":" in spec:
        start, stop, step = (float(v) for v in spec.split(":"))
        n = int(round((stop - start) / step))
        xs = [start + k * step for k in range(n + 1)]
        return [x for x in xs if x > 0]
    return [float(v) for v in spec.split(",") if v.strip()]


def _load_process(args) -> LevyExponent:
    objs = specfile.load(args.spec)
    if "process" not in objs:
        raise ValidationError("spec has no [process] table")
    return objs["process"]


def _law_from_spec(args, tol) -> MellinLaw:
    objs = specfile.load(args.spec)
    if "factor_pair" in objs and "process" in objs:
        pair = validate_pair(objs["process"], objs["factor_pair"])
        return MellinLaw(pair, objs["process"], tol=min(tol, 1e-10))
    if "process" in objs:
        return MellinLaw.from_exponent(objs["process"], tol=min(tol, 1e-10))
    raise ValidationError("spec has no [process] table")


# -- subcommand bodies ----------------------------------------------------------


def _cmd_factorize(args, out):
    exponent = _load_process(args)
    pair = wh_factorize(exponent)
    text = specfile.dump_pair(pair)
    report = {"residual": grid_identity_residual(exponent, pair),
              "class_tag": pair.class_tag,
              "normalization": pair.normalization}
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        _header(args, out)
        print(text, file=out)
    print(json.dumps(report), file=out)
    return 0


def _cmd_wgamma(args, out):
    from .berngamma import BernsteinGamma
    objs = specfile.load(args.spec)
    phi = objs.get("bernstein")
    if phi is None:
        raise ValidationError("wgamma needs a [bernstein] table")
    tol = _tolerance(args)
    bg = BernsteinGamma(phi, tol=min(tol, 1e-12))
    _header(args, out)
    print("re_z,im_z,re_W,im_W,abs_err_est,branch_used", file=out)
    for z in _parse_points(args.points):
        branch = "product" if abs(z) <= bg.crossover else "stirling"
        lw = bg.log_eval(z, branch=branch)
        w = complex(np.exp(lw))
        err = abs(w) * 1e-12 * (1 + abs(z))
        print(f"{z.real!r},{z.imag!r},{w.real!r},{w.imag!r},"
              f"{float(err)!r},{branch}", file=out)
    return 0


def _cmd_mellin(args, out):
    tol = _tolerance(args)
    law = _law_from_spec(args, tol)
    _header(args, out)
    print("re_z,im_z,re_M,im_M,recurrence_residual", file=out)
    for z in _parse_points(args.points):
        m = law.mellin_eval(z)
        try:
            res = law.recurrence_residual(z)
        except (ValidationError, NumericError):
            res = float("nan")
        print(f"{z.real!r},{z.imag!r},{m.real!r},{m.imag!r},{res!r}", file=out)
    return 0


def _cmd_law(args, out):
    tol = _tolerance(args)
    law = _law_from_spec(args, tol)
    xs = _parse_xgrid(args.x)
    grid = build_density_grid(law, xs, InversionConfig(tol=tol),
                              derivatives=args.derivatives,
                              regimes=args.regimes)
    _header(args, out)
    cols = "x,f,F,Fbar,regime,err_est"
    dnames = [f"df_{k}" for k in sorted(grid.derivatives)]
    if dnames:
        cols += "," + ",".join(dnames)
    print(cols, file=out)
    for i, x in enumerate(grid.x):
        row = [repr(float(x)), repr(float(grid.f[i])), repr(float(grid.F[i])),
               repr(float(grid.Fbar[i])), grid.regime[i],
               repr(float(grid.err_est[i]))]
        row += [repr(float(grid.derivatives[k][i]))
                for k in sorted(grid.derivatives)]
        print(",".join(row), file=out)
    return 0


def _cmd_mc(args, out):
    exponent = _load_process(args)
    sampler = PathSampler(exponent, dt=args.dt, rng_seed=args.seed)
    if args.t is not None:
        emp = sample_finite_horizon(sampler, args.t, args.n)
    else:
        emp = sample_functional(sampler, args.n)
    _header(args, out)
    if args.summary:
        qs = np.quantile(emp.samples, np.linspace(0.1, 0.9, 9))
        print(json.dumps({
            "n": emp.n, "mean": float(np.mean(emp.samples)),
            "var": float(np.var(emp.samples, ddof=1)),
            "quantiles": [float(v) for v in qs]}), file=out)
    else:
        print("sample", file=out)
        for v in emp.samples:
            print(repr(float(v)), file=out)
    return 0


def _cmd_mc_compare(args, out):
    tol = _tolerance(args)
    exponent = _load_process(args)
    law = _law_from_spec(args, tol)
    sampler = PathSampler(exponent, dt=args.dt, rng_seed=args.seed)
    emp = sample_functional(sampler, args.n)
    with open(args.law_csv) as fh:
        lines = [ln.strip() for ln in fh
                 if ln.strip() and not ln.startswith("#")]
    header = lines[0].split(",")
    cols = {name: [] for name in header}
    for ln in lines[1:]:
        for name, cell in zip(header, ln.split(",")):
            cols[name].append(cell)
    from .inversion import DensityGrid
    as_f = {k: np.array([float(v) for v in cols[k]])
            for k in ("x", "f", "F", "Fbar", "err_est")}
    grid = DensityGrid(as_f["x"], as_f["f"], as_f["F"], as_f["Fbar"],
                       cols["regime"], as_f["err_est"])
    d_minus = law.phi_minus.d_phi
    report = compare(grid, emp,
                     tail_exponent=d_minus if d_minus > -math.inf else None)
    _header(args, out)
    print(json.dumps(report, indent=2), file=out)
    return 0 if report["pass"] else 2


def _cmd_verify(args, out):
    from .verify import run_verification
    tol = _tolerance(args)
    report = run_verification(args.spec, tol=tol)
    _header(args, out)
    print(json.dumps(report, indent=2), file=out)
    return 0 if report["pass"] else 2


# -- parser ------------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(
        prog="levylaw",
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, points=False):
        sp.add_argument("spec", help="process spec file (TOML or JSON)")
        sp.add_argument("--tol", default=None,
                        help="tolerance in (0, 1e-2]; default LEVYLAW_TOL "
                             "or 1e-8")
        sp.add_argument("--schema", action="store_true",
                        help="print the machine-readable output schema")
        sp.add_argument("-o", "--output", default=None,
                        help="write primary output to a file")
        if points:
            sp.add_argument("--points", required=False, default="1,0",
                            help="semicolon-separated re,im pairs")

    sp = sub.add_parser("factorize",
                        help="Wiener-Hopf factor pair + residual report")
    common(sp)

    sp = sub.add_parser("wgamma", help="evaluate W_phi; CSV columns: "
                        + ", ".join(_SCHEMAS["wgamma"]["columns"]))
    common(sp, points=True)

    sp = sub.add_parser("mellin", help="evaluate M; CSV columns: "
                        + ", ".join(_SCHEMAS["mellin"]["columns"]))
    common(sp, points=True)

    sp = sub.add_parser("law", help="density/CDF/tail grid; CSV columns: "
                        + ", ".join(_SCHEMAS["law"]["columns"]))
    common(sp)
    sp.add_argument("--x", required=False, default="0.1:0.9:0.1",
                    help="grid 'start:stop:step' or comma list")
    sp.add_argument("--derivatives", type=int, default=0,
                    help="also tabulate density derivatives up to this order")
    sp.add_argument("--regimes", default="auto",
                    choices=["auto", "inversion", "series", "tail"])

    sp = sub.add_parser("mc", help="Monte Carlo samples; CSV column: sample")
    common(sp)
    sp.add_argument("--n", type=int, default=10000)
    sp.add_argument("--seed", type=lambda s: int(s) % (1 << 64), default=1)
    sp.add_argument("--t", type=float, default=None,
                    help="finite horizon (default: the perpetuity)")
    sp.add_argument("--dt", type=float, default=4e-3)
    sp.add_argument("--summary", action="store_true",
                    help="print a summary JSON instead of samples")

    sp = sub.add_parser("mc-compare",
                        help="Monte Carlo vs `law` output; JSON report")
    common(sp)
    sp.add_argument("--law-csv", required=True)
    sp.add_argument("--n", type=int, default=10000)
    sp.add_argument("--seed", type=lambda s: int(s) % (1 << 64), default=1)
    sp.add_argument("--dt", type=float, default=4e-3)

    sp = sub.add_parser("verify", help="run the invariant suite; JSON report")
    common(sp)
    return p


_BODIES = {
    "factorize": _cmd_factorize,
    "wgamma": _cmd_wgamma,
    "mellin": _cmd_mellin,
    "law": _cmd_law,
    "mc": _cmd_mc,
    "mc-compare": _cmd_mc_compare,
    "verify": _cmd_verify,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "schema", False):
        print(json.dumps(_SCHEMAS[args.command], indent=2))
        return 0
    out = sys.stdout
    close = False
    if getattr(args, "output", None) and args.command != "factorize":
        out = open(args.output, "w")
        close = True
    try:
        return _BODIES[args.command](args, out)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 2
    finally:
        if close:
            out.close()


if __name__ == "__main__":
    sys.exit(main())
