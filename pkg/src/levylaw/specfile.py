"""Process-spec files: one structured-text format (TOML) plus a JSON mirror.

Grammar (TOML shown; the JSON mirror is the same tree as an object):

    [process]
    sigma2 = 2.0          # Brownian coefficient sigma^2 >= 0
    gamma = 1.0           # drift
    kill_rate = 0.0       # q = -Psi(0) >= 0

    [[process.levy_measure]]
    side = "positive"     # or "negative"
    kind = "exponential"  # weight w > 0, rate lam > 0: density w lam e^{-lam r}
    weight = 1.0
    rate = 2.0

    [[process.levy_measure]]
    side = "negative"
    kind = "atom"         # weight > 0 at location > 0
    weight = 0.5
    location = 1.5

    [[process.levy_measure]]
    side = "negative"
    kind = "tabulated"    # tail function on a grid; optional rv_alpha tag
    grid = [0.0, 1.0, 2.0]
    tail = [1.0, 0.4, 0.0]

A Bernstein function uses the same component list one-sided:

    [bernstein]
    kappa = 0.0
    delta = 1.0
    [[bernstein.measure]]
    kind = "exponential"
    weight = 1.0
    rate = 1.0

A factor pair produced by `levylaw factorize`:

    [factor_pair]
    normalization = 1.0
    class_tag = "rational"
    [factor_pair.phi_plus]   # bernstein table
    ...
    [factor_pair.phi_minus]
    ...

Unknown keys are rejected.  Files are parsed identically by the CLI and the
test suite through :func:`load`.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:                       # Python 3.10
    import tomli as tomllib

from .bernstein import BernsteinFunction
from .errors import ValidationError
from .levyexp import LevyExponent
from .measures import (NEGATIVE, POSITIVE, Atom, Exponential, MeasureSpec,
                       PolyDensity, Tabulated)
from .wiener_hopf import FactorPair

_COMPONENT_KEYS = {
    "exponential": {"kind", "side", "weight", "rate"},
    "atom": {"kind", "side", "weight", "location"},
    "tabulated": {"kind", "side", "grid", "tail", "rv_alpha"},
    "poly_density": {"kind", "side", "lo", "hi", "c0", "c1"},
}


def _check_keys(table, allowed, where):
    unknown = set(table) - allowed
    if unknown:
        raise ValidationError(f"unknown keys {sorted(unknown)} in {where}")


def _component_from_table(tab, where, default_side=POSITIVE):
    kind = tab.get("kind")
    if kind not in _COMPONENT_KEYS:
        raise ValidationError(f"unknown component kind {kind!r} in {where}")
    _check_keys(tab, _COMPONENT_KEYS[kind], where)
    side = tab.get("side", default_side)
    if side not in (POSITIVE, NEGATIVE):
        raise ValidationError(f"unknown side {side!r} in {where}")
    if kind == "exponential":
        comp = Exponential(float(tab["weight"]), float(tab["rate"]))
    elif kind == "atom":
        comp = Atom(float(tab["weight"]), float(tab["location"]))
    elif kind == "poly_density":
        comp = PolyDensity(float(tab["lo"]), float(tab["hi"]),
                           float(tab["c0"]), float(tab["c1"]))
    else:
        comp = Tabulated(tuple(float(g) for g in tab["grid"]),
                         tuple(float(t) for t in tab["tail"]),
                         rv_alpha=(float(tab["rv_alpha"])
                                   if "rv_alpha" in tab else None))
    return side, comp


def _component_to_table(side, comp, with_side=True):
    out = {"side": side} if with_side else {}
    if isinstance(comp, Exponential):
        out.update(kind="exponential", weight=comp.weight, rate=comp.rate)
    elif isinstance(comp, Atom):
        out.update(kind="atom", weight=comp.weight, location=comp.location)
    elif isinstance(comp, PolyDensity):
        out.update(kind="poly_density", lo=comp.lo, hi=comp.hi,
                   c0=comp.c0, c1=comp.c1)
    else:
        out.update(kind="tabulated", grid=list(comp.grid),
                   tail=list(comp.tail))
        if comp.rv_alpha is not None:
            out["rv_alpha"] = comp.rv_alpha
    return out


def _process_from_table(tab):
    _check_keys(tab, {"sigma2", "gamma", "kill_rate", "levy_measure"},
                "[process]")
    comps = tuple(
        _component_from_table(c, f"levy_measure[{i}]")
        for i, c in enumerate(tab.get("levy_measure", [])))
    return LevyExponent(sigma2=float(tab.get("sigma2", 0.0)),
                        gamma=float(tab.get("gamma", 0.0)),
                        levy_measure=MeasureSpec(comps),
                        kill_rate=float(tab.get("kill_rate", 0.0)))


def _bernstein_from_table(tab, where="[bernstein]"):
    _check_keys(tab, {"kappa", "delta", "measure"}, where)
    comps = []
    for i, c in enumerate(tab.get("measure", [])):
        side, comp = _component_from_table(c, f"{where}.measure[{i}]")
        comps.append((POSITIVE, comp))
    return BernsteinFunction(float(tab.get("kappa", 0.0)),
                             float(tab.get("delta", 0.0)),
                             MeasureSpec(tuple(comps)))


def _pair_from_table(tab):
    _check_keys(tab, {"normalization", "class_tag", "phi_plus", "phi_minus"},
                "[factor_pair]")
    return FactorPair(
        _bernstein_from_table(tab["phi_plus"], "[factor_pair.phi_plus]"),
        _bernstein_from_table(tab["phi_minus"], "[factor_pair.phi_minus]"),
        float(tab.get("normalization", 1.0)),
        str(tab.get("class_tag", "explicit")))


def parse(text: str):
    """Parse spec text (TOML, or the JSON mirror) to a dict of objects.

    Returns a dict with any of the keys 'process', 'bernstein',
    'factor_pair' mapped to constructed objects.
    """
    stripped = text.lstrip()
    if stripped.startswith("{"):
        data = json.loads(text)
    else:
        data = tomllib.loads(text)
    _check_keys(data, {"process", "bernstein", "factor_pair"}, "top level")
    out = {}
    if "process" in data:
        out["process"] = _process_from_table(data["process"])
    if "bernstein" in data:
        out["bernstein"] = _bernstein_from_table(data["bernstein"])
    if "factor_pair" in data:
        out["factor_pair"] = _pair_from_table(data["factor_pair"])
    if not out:
        raise ValidationError("spec defines none of process/bernstein/"
                              "factor_pair")
    return out


def load(path):
    return parse(Path(path).read_text())


def spec_hash(path_or_text):
    """Short content hash recorded in every output header."""
    p = Path(str(path_or_text))
    text = p.read_text() if p.exists() else str(path_or_text)
    return hashlib.sha256(text.encode()).hexdigest()[:12]


# -- writers (tiny TOML emitter for this flat schema) -------------------------


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, float)):
        return repr(float(v))
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    raise TypeError(f"cannot format {v!r}")


def _emit_table(lines, name, table, arrays):
    lines.append(f"[{name}]")
    for k, v in table.items():
        lines.append(f"{k} = {_fmt(v)}")
    for arr_name, rows in arrays:
        for row in rows:
            lines.append("")
            lines.append(f"[[{name}.{arr_name}]]")
            for k, v in row.items():
                lines.append(f"{k} = {_fmt(v)}")
    lines.append("")


def dump_process(exponent: LevyExponent) -> str:
    rows = [_component_to_table(side, comp)
            for side, comp in exponent.levy_measure.components]
    lines = []
    _emit_table(lines, "process",
                {"sigma2": exponent.sigma2, "gamma": exponent.gamma,
                 "kill_rate": exponent.kill_rate},
                [("levy_measure", rows)])
    return "\n".join(lines)


def _bernstein_tables(phi: BernsteinFunction):
    rows = [_component_to_table(side, comp, with_side=False)
            for side, comp in phi.mu.components]
    return {"kappa": phi.kappa, "delta": phi.delta}, rows


def dump_bernstein(phi: BernsteinFunction) -> str:
    head, rows = _bernstein_tables(phi)
    lines = []
    _emit_table(lines, "bernstein", head, [("measure", rows)])
    return "\n".join(lines)


def dump_pair(pair: FactorPair) -> str:
    lines = ["[factor_pair]",
             f"normalization = {_fmt(pair.normalization)}",
             f"class_tag = {_fmt(pair.class_tag)}", ""]
    for name, phi in (("phi_plus", pair.phi_plus),
                      ("phi_minus", pair.phi_minus)):
        head, rows = _bernstein_tables(phi)
        _emit_table(lines, f"factor_pair.{name}", head, [("measure", rows)])
    return "\n".join(lines)
