"""Workspace files: named objects plus a list of checks with expected outcomes.

A workspace is a JSON document::

    {
      "charts": {"R3": ["x1", "x2", "x3"]},
      "complex_charts": {"C3": {"n": 3}},
      "objects": {"pi": {"kind": "multivector", "chart": "R3", "degree": 2,
                         "components": {"1,2": "x3", "2,3": "x1", "3,1": "x2"}}},
      "checks": [{"id": "so3", "op": "is_poisson", "args": {"pi": "pi"}, "expect": "pass"}]
    }

Index tuples are comma-joined and 1-based; expressions use the grammar of
:func:`holalg.symbolic.parse`.  A check passes when its observed outcome
matches ``expect``.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Callable

from . import algebroid as alg
from . import calculus as calc
from . import periods as per
from . import poisson as poi
from .report import Report, Verdict
from .symbolic import (
    ParseError,
    RandomPointConfig,
    ScalarExpr,
    cauchy_riemann_check,
    eq_check,
    split_complex,
)

SCHEMA_VERSION = "1"


class SchemaError(ValueError):
    """Malformed workspace; ``path`` locates the offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass
class RunConfig:
    seed: int = 0
    tol: float | None = None
    quad: tuple[int, int] | None = None
    jobs: int = 1
    timings: bool = False

    @property
    def sampler(self) -> RandomPointConfig:
        base = RandomPointConfig(seed=self.seed)
        return base if self.tol is None else RandomPointConfig(seed=self.seed, tol=self.tol)


@dataclass
class CheckResult:
    id: str
    op: str
    status: str
    expected: Any
    observed: Any
    details: list[str] = field(default_factory=list)
    values: dict = field(default_factory=dict)
    wall_time: float | None = None

    def to_json(self) -> dict:
        out = {"id": self.id, "op": self.op, "status": self.status,
               "expected": self.expected, "observed": self.observed,
               "details": self.details}
        if self.values:
            out["values"] = self.values
        if self.wall_time is not None:
            out["wall_time"] = round(self.wall_time, 6)
        return out


# ---------------------------------------------------------------------------
# loading
# ---------------------------------------------------------------------------

def _req(d: dict, key: str, path: str):
    if not isinstance(d, dict):
        raise SchemaError(path, "expected an object")
    if key not in d:
        raise SchemaError(f"{path}.{key}", "missing field")
    return d[key]


def _matrix(rows, path: str) -> list[list]:
    if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
        raise SchemaError(path, "expected a list of rows")
    return rows


class Workspace:
    """Resolved charts and objects; objects are built lazily by name."""

    def __init__(self, data: dict, source: str = "<workspace>"):
        if not isinstance(data, dict):
            raise SchemaError("$", "workspace must be a JSON object")
        self.source = source
        self.data = data
        self.charts: dict[str, calc.Chart] = {}
        self.complex_charts: dict[str, calc.ComplexChart] = {}
        for name, coords in (data.get("charts") or {}).items():
            path = f"charts.{name}"
            if not isinstance(coords, list) or not all(isinstance(c, str) for c in coords):
                raise SchemaError(path, "expected a list of coordinate names")
            try:
                self.charts[name] = calc.Chart(name, tuple(coords))
            except ValueError as exc:
                raise SchemaError(path, str(exc)) from None
        for name, entry in (data.get("complex_charts") or {}).items():
            path = f"complex_charts.{name}"
            try:
                if isinstance(entry, dict) and "n" in entry:
                    cc = calc.ComplexChart.standard(int(entry["n"]), name)
                else:
                    cc = calc.ComplexChart(name, tuple(_req(entry, "x", path)), tuple(_req(entry, "y", path)),
                                           tuple(_req(entry, "z", path)))
            except (ValueError, TypeError) as exc:
                raise SchemaError(path, str(exc)) from None
            if name in self.charts:
                raise SchemaError(path, "name already used by a real chart")
            self.complex_charts[name] = cc
        self.specs: dict[str, dict] = dict(data.get("objects") or {})
        self._cache: dict[str, Any] = {}
        self._building: set[str] = set()
        checks = data.get("checks")
        if not isinstance(checks, list):
            raise SchemaError("checks", "expected a list")
        self.checks = checks
        seen = set()
        for k, chk in enumerate(checks):
            path = f"checks[{k}]"
            cid = _req(chk, "id", path)
            if cid in seen:
                raise SchemaError(f"{path}.id", f"duplicate id {cid!r}")
            seen.add(cid)
            op = _req(chk, "op", path)
            if op not in CHECKS:
                raise SchemaError(f"{path}.op", f"unknown check {op!r}")
            _req(chk, "expect", path)
        # build everything up front so reference and parse errors surface as schema errors
        for name in self.specs:
            self.get(name, f"objects.{name}")
        for k, chk in enumerate(checks):
            self._validate_refs(chk.get("args") or {}, CHECKS[chk["op"]].refs, f"checks[{k}].args")

    # -- charts ------------------------------------------------------------
    def chart(self, name, path: str) -> calc.Chart:
        if name in self.charts:
            return self.charts[name]
        if name in self.complex_charts:
            return self.complex_charts[name].real
        raise SchemaError(path, f"unknown chart {name!r}")

    def complex_chart(self, name, path: str) -> calc.ComplexChart:
        if name not in self.complex_charts:
            raise SchemaError(path, f"unknown complex chart {name!r}")
        return self.complex_charts[name]

    # -- objects -----------------------------------------------------------
    def get(self, name, path: str):
        if not isinstance(name, str):
            raise SchemaError(path, "expected an object name")
        if name in self._cache:
            return self._cache[name]
        if name not in self.specs:
            raise SchemaError(path, f"undefined object {name!r}")
        if name in self._building:
            raise SchemaError(path, f"circular reference through {name!r}")
        self._building.add(name)
        try:
            obj = self._build(self.specs[name], f"objects.{name}")
        except SchemaError:
            raise
        except (ParseError, ValueError, KeyError, IndexError, TypeError) as exc:
            raise SchemaError(f"objects.{name}", f"{type(exc).__name__}: {exc}") from None
        finally:
            self._building.discard(name)
        self._cache[name] = obj
        return obj

    def _validate_refs(self, args: dict, refs: dict, path: str) -> None:
        for key, kind in refs.items():
            if key not in args:
                if kind.endswith("?"):
                    continue
                raise SchemaError(f"{path}.{key}", "missing argument")
            val = args[key]
            if kind.startswith("objs"):
                if not isinstance(val, list):
                    raise SchemaError(f"{path}.{key}", "expected a list of object names")
                for i, v in enumerate(val):
                    self.get(v, f"{path}.{key}[{i}]")
            elif kind.startswith("obj"):
                self.get(val, f"{path}.{key}")
            elif kind.startswith("chart"):
                self.chart(val, f"{path}.{key}")
            elif kind.startswith("cchart"):
                self.complex_chart(val, f"{path}.{key}")

    def _build(self, entry: dict, path: str):
        kind = _req(entry, "kind", path)
        builder = BUILDERS.get(kind)
        if builder is None:
            raise SchemaError(f"{path}.kind", f"unknown kind {kind!r}")
        return builder(self, entry, path)


def _components(entry, path):
    comps = _req(entry, "components", path)
    if not isinstance(comps, dict):
        raise SchemaError(f"{path}.components", "expected a mapping from index to expression")
    return comps


def _b_expression(ws: Workspace, entry, path):
    name = _req(entry, "chart", path)
    if name in ws.complex_charts:
        return ws.complex_charts[name].parse(_req(entry, "value", path))
    return ws.chart(name, f"{path}.chart").parse(_req(entry, "value", path))


def _b_multivector(ws, entry, path):
    chart = ws.chart(_req(entry, "chart", path), f"{path}.chart")
    return calc.Multivector(chart, int(_req(entry, "degree", path)), _components(entry, path), one_based=True)


def _b_form(ws, entry, path):
    chart = ws.chart(_req(entry, "chart", path), f"{path}.chart")
    deg = int(entry.get("degree", 2))
    return calc.DifferentialForm(chart, deg, _components(entry, path), one_based=True)


def _b_tensor11(ws, entry, path):
    chart = ws.chart(_req(entry, "chart", path), f"{path}.chart")
    return calc.OneOneTensor(chart, _matrix(_req(entry, "matrix", path), f"{path}.matrix"))


def _b_complex_structure(ws, entry, path):
    return ws.complex_chart(_req(entry, "chart", path), f"{path}.chart").J


def _b_endo(ws, entry, path):
    chart = ws.chart(entry["chart"], f"{path}.chart") if "chart" in entry else None
    return alg.FiberwiseEndo(_matrix(_req(entry, "matrix", path), f"{path}.matrix"), chart)


def _b_map(ws, entry, path):
    src = ws.chart(_req(entry, "source", path), f"{path}.source")
    tgt = ws.chart(_req(entry, "target", path), f"{path}.target")
    return calc.ChartMap(src, tgt, _req(entry, "components", path), entry.get("inverse"))


def _b_involution(ws, entry, path):
    return poi.conjugation_involution(ws.complex_chart(_req(entry, "chart", path), f"{path}.chart"))


def _b_algebroid(ws, entry, path):
    chart = ws.chart(_req(entry, "chart", path), f"{path}.chart")
    return alg.AlgebroidChart(chart, _req(entry, "frame", path), _req(entry, "anchor", path),
                              entry.get("structure") or {}, name=entry.get("name", path.split(".")[-1]),
                              one_based=True)


def _b_hol_algebroid(ws, entry, path):
    cc = ws.complex_chart(_req(entry, "chart", path), f"{path}.chart")
    return alg.HolomorphicAlgebroidChart(cc, _req(entry, "frame", path), _req(entry, "anchor", path),
                                         entry.get("structure") or {}, one_based=True,
                                         name=entry.get("name", path.split(".")[-1]))


def _b_hol_bivector(ws, entry, path):
    cc = ws.complex_chart(_req(entry, "chart", path), f"{path}.chart")
    return poi.HolomorphicBivector(cc, _components(entry, path), one_based=True)


def _b_hol_form(ws, entry, path):
    cc = ws.complex_chart(_req(entry, "chart", path), f"{path}.chart")
    comps = {calc.parse_index(k): v for k, v in _components(entry, path).items()}
    scale = cc.parse(entry.get("scale", "1"))
    re, im = per.complex_form_parts(cc, comps, scale)
    part = entry.get("part", "re")
    if part not in ("re", "im"):
        raise SchemaError(f"{path}.part", "expected 're' or 'im'")
    return re if part == "re" else im


def _b_weighted_form(ws, entry, path):
    terms = _req(entry, "terms", path)
    out = []
    for i, t in enumerate(terms):
        if not (isinstance(t, list) and len(t) == 2):
            raise SchemaError(f"{path}.terms[{i}]", "expected [weight, form name]")
        w = _weight(t[0], f"{path}.terms[{i}][0]")
        form = ws.get(t[1], f"{path}.terms[{i}][1]")
        if isinstance(form, per.WeightedForm):
            out.extend((w * c, f) for c, f in form.terms)
        else:
            out.append((w, form))
    return per.WeightedForm(tuple(out))


def _weight(v, path) -> float:
    """Float weight; strings like ``"sqrt(2)"`` are evaluated with :mod:`math` names only."""
    if isinstance(v, (int, float)):
        return float(v)
    if isinstance(v, str):
        allowed = {"sqrt": math.sqrt, "pi": math.pi, "e": math.e}
        try:
            return float(eval(v, {"__builtins__": {}}, allowed))  # noqa: S307 - restricted namespace
        except Exception as exc:
            raise SchemaError(path, f"bad weight {v!r}: {exc}") from None
    raise SchemaError(path, "expected a number")


def _b_sphere(ws, entry, path):
    cname = _req(entry, "chart", path)
    chart = ws.chart(cname, f"{path}.chart")
    constraints = []
    for i, c in enumerate(entry.get("constraints") or []):
        if cname in ws.complex_charts:
            cc = ws.complex_charts[cname]
            parts = split_complex(cc.parse(c), cc.pairing)
            constraints += [p for p in (parts.re, parts.im) if not p.is_zero()]
        else:
            constraints.append(chart.parse(c))
    param = _req(entry, "parametrization", path)
    if not isinstance(param, list) or len(param) != chart.dim:
        raise SchemaError(f"{path}.parametrization", f"expected {chart.dim} expressions")
    return per.SphereClass(entry.get("name", path.split(".")[-1]), chart, tuple(param), tuple(constraints))


def _b_derived(ws, entry, path):
    op = _req(entry, "op", path)
    d = DERIVED.get(op)
    if d is None:
        raise SchemaError(f"{path}.op", f"unknown derivation {op!r}")
    args = entry.get("args") or {}
    ws._validate_refs(args, d.refs, f"{path}.args")
    return d.fn(ws, args, f"{path}.args")


BUILDERS: dict[str, Callable] = {
    "expression": _b_expression,
    "multivector": _b_multivector,
    "form": _b_form,
    "two_form": _b_form,
    "tensor11": _b_tensor11,
    "complex_structure": _b_complex_structure,
    "endo": _b_endo,
    "map": _b_map,
    "involution": _b_involution,
    "algebroid": _b_algebroid,
    "holomorphic_algebroid": _b_hol_algebroid,
    "holomorphic_bivector": _b_hol_bivector,
    "holomorphic_form": _b_hol_form,
    "weighted_form": _b_weighted_form,
    "sphere_class": _b_sphere,
    "derived": _b_derived,
}


# ---------------------------------------------------------------------------
# derivations
# ---------------------------------------------------------------------------

@dataclass
class Derivation:
    refs: dict
    fn: Callable


def _o(ws, args, key, path):
    return ws.get(args[key], f"{path}.{key}")


def _d_decompose(ws, args, path):
    pair = poi.decompose(_o(ws, args, "pi", path))
    return pair.pi_R if args.get("part", "R") == "R" else pair.pi_I


def _d_holext(ws, args, path):
    cc = ws.complex_chart(args["chart"], f"{path}.chart") if "chart" in args else None
    return poi.holomorphic_extension(_o(ws, args, "pi", path), cc)


def _d_scale(ws, args, path):
    obj = _o(ws, args, "object", path)
    factor = args.get("factor", "1")
    if isinstance(obj, poi.HolomorphicBivector):
        return obj.scale(obj.chart.parse(str(factor)))
    if isinstance(obj, calc._Alternating):
        return obj.scale(obj.chart.parse(str(factor)))
    raise SchemaError(f"{path}.object", "scale supports multivectors, forms and holomorphic bivectors")


def _d_dirac(ws, args, path):
    pi = _o(ws, args, "pi", path)
    red, rep = poi.dirac_reduce(pi, _o(ws, args, "map", path), list(args["locus"]),
                                split=args.get("split", "canonical"))
    if red is None or rep.verdict is Verdict.FAIL:
        raise SchemaError(path, "Dirac reduction preconditions fail:\n" + str(rep))
    return red


def _d_change_frame(ws, args, path):
    A = _o(ws, args, "algebroid", path)
    P = [[A.base.parse(v) if isinstance(v, str) else v for v in row] for row in args["matrix"]]
    return alg.change_frame(A, P, args.get("frame"))


DERIVED: dict[str, Derivation] = {
    "decompose": Derivation({"pi": "obj"}, _d_decompose),
    "holomorphic_extension": Derivation({"pi": "obj", "chart": "cchart?"}, _d_holext),
    "cotangent_algebroid": Derivation({"pi": "obj"},
                                      lambda ws, a, p: alg.cotangent_algebroid(_o(ws, a, "pi", p))),
    "holomorphic_cotangent": Derivation({"pi": "obj"},
                                        lambda ws, a, p: poi.holomorphic_cotangent(_o(ws, a, "pi", p))),
    "tangent_algebroid": Derivation({"chart": "chart"},
                                    lambda ws, a, p: alg.tangent_algebroid(ws.chart(a["chart"], p))),
    "central_extension": Derivation(
        {"forms": "objs"},
        lambda ws, a, p: alg.central_extension([ws.get(f, p) for f in a["forms"]], warn=False)),
    "tangent_lift": Derivation({"algebroid": "obj"},
                               lambda ws, a, p: alg.tangent_lift(_o(ws, a, "algebroid", p))),
    "realify": Derivation({"algebroid": "obj"},
                          lambda ws, a, p: alg.realify(_o(ws, a, "algebroid", p),
                                                       check=bool(a.get("check", True)))[0]),
    "realify_j": Derivation({"algebroid": "obj"},
                            lambda ws, a, p: alg.realify(_o(ws, a, "algebroid", p), check=False)[1]),
    "deform": Derivation({"algebroid": "obj", "endo": "obj"},
                         lambda ws, a, p: alg.deform(_o(ws, a, "algebroid", p), _o(ws, a, "endo", p))),
    "change_frame": Derivation({"algebroid": "obj"}, _d_change_frame),
    "scale": Derivation({"object": "obj"}, _d_scale),
    "dirac_reduce": Derivation({"pi": "obj", "map": "obj"}, _d_dirac),
    "schouten": Derivation({"P": "obj", "Q": "obj"},
                           lambda ws, a, p: calc.schouten_bracket(_o(ws, a, "P", p), _o(ws, a, "Q", p))),
    "exterior_derivative": Derivation(
        {"form": "obj"}, lambda ws, a, p: calc.exterior_derivative(_o(ws, a, "form", p))),
    "pushforward": Derivation({"P": "obj", "map": "obj"},
                              lambda ws, a, p: calc.pushforward(_o(ws, a, "P", p), _o(ws, a, "map", p))),
    "pullback": Derivation({"form": "obj", "map": "obj"},
                           lambda ws, a, p: calc.pullback(_o(ws, a, "form", p), _o(ws, a, "map", p))),
    "hamiltonian_vf": Derivation(
        {"pi": "obj", "f": "obj"},
        lambda ws, a, p: calc.hamiltonian_vf(_o(ws, a, "pi", p), _o(ws, a, "f", p))),
}


# ---------------------------------------------------------------------------
# checks
# ---------------------------------------------------------------------------

@dataclass
class Outcome:
    observed: Any
    details: list[str] = field(default_factory=list)
    values: dict = field(default_factory=dict)


@dataclass
class CheckSpec:
    refs: dict
    fn: Callable[["Workspace", dict, RunConfig], Outcome]


MAX_DETAIL_LINES = 12


def _from_report(rep: Report) -> Outcome:
    details = [rep.summary()]
    for it in list(rep.failures())[:MAX_DETAIL_LINES]:
        details.append(f"[{it.verdict.value}] {it.name}" + (f": {it.detail}" if it.detail else ""))
    return Outcome(rep.verdict.value, details)


def _g(ws, args, key):
    return ws.get(args[key], key)


def _c_report(fn):
    return lambda ws, a, cfg: _from_report(fn(ws, a, cfg))


def _equal(ws, a, cfg) -> Report:
    x, y = _g(ws, a, "a"), _g(ws, a, "b")
    s = cfg.sampler
    if isinstance(x, calc._Alternating):
        return calc.compare_fields(x, y, s, "equal")
    if isinstance(x, alg.AlgebroidChart):
        return alg.compare_algebroids(x, y, s, "equal")
    if isinstance(x, ScalarExpr):
        rep = Report("equal")
        rep.add_comparison("a = b", eq_check(x, y, s))
        return rep
    if isinstance(x, poi.HolomorphicBivector):
        rep = Report("equal")
        for key in sorted(set(x.components) | set(y.components)):
            rep.add_comparison(f"phi_{key[0] + 1}{key[1] + 1}",
                               eq_check(x.phi(*key).recombine(), y.phi(*key).recombine(), s))
        return rep
    if isinstance(x, calc.OneOneTensor):
        return calc.compare_matrices(x.matrix, y.matrix, s, "equal")
    if isinstance(x, alg.FiberwiseEndo):
        return calc.compare_matrices(x.matrix, y.matrix, s, "equal")
    raise SchemaError("args.a", f"equal does not support {type(x).__name__}")


def _torsion_zero(ws, a, cfg) -> Report:
    N = _g(ws, a, "tensor")
    T = calc.nijenhuis_torsion(N)
    rep = Report("Nijenhuis torsion vanishes")
    for key, vec in sorted(T.components.items()):
        for k, v in enumerate(vec):
            rep.add_comparison(f"T^{k + 1}_{key[0] + 1}{key[1] + 1}", eq_check(v, 0, cfg.sampler))
    return rep


def _torsion_value(ws, a, cfg) -> Report:
    N = _g(ws, a, "tensor")
    T = calc.nijenhuis_torsion(N)
    rep = Report("torsion value")
    for key, vec in a["value"].items():
        i, j = calc.parse_index(key)
        got = T[(i, j)]
        for k, v in enumerate(vec):
            rep.add_comparison(f"T^{k + 1}_{i + 1}{j + 1}", eq_check(got[k], N.chart.parse(v), cfg.sampler))
    return rep


def _torsion_cross(ws, a, cfg) -> Report:
    N = _g(ws, a, "tensor")
    return calc.compare_torsions(calc.nijenhuis_torsion(N), calc.nijenhuis_torsion_direct(N), cfg.sampler)


def _torsion_oracle(ws, a, cfg) -> Report:
    return calc.torsion_oracle_report(_g(ws, a, "tensor"), int(a.get("points", 16)),
                                      float(a.get("tol", 1e-6)), cfg.seed)


def _morphism(ws, a, cfg) -> Report:
    F = _g(ws, a, "bundle_map")
    matrix = F.matrix if isinstance(F, (alg.FiberwiseEndo, calc.OneOneTensor)) else F
    return alg.morphism_check(matrix, _g(ws, a, "base_map"), _g(ws, a, "source"), _g(ws, a, "target"),
                              cfg.sampler)


def _infmult(ws, a, cfg) -> Report:
    A = _g(ws, a, "algebroid")
    j = _g(ws, a, "endo")
    J = _g(ws, a, "complex_structure")
    return alg.check_infinitesimal_multiplicative(A, j, J, cfg.sampler)


def _two_form(ws, a, cfg) -> Report:
    cc = ws.complex_chart(a["chart"], "args.chart")
    rep, form = poi.holomorphic_two_form(_g(ws, a, "form"), cc, cfg.sampler)
    if "value" in a and form is not None:
        for key, v in a["value"].items():
            i, j = calc.parse_index(key)
            got = form.z_expressions().get((i, j), cc.parse("0"))
            expected = cc.parse(v).subs(cc.pairing.substitution())
            rep.add_comparison(f"dz{i + 1}^dz{j + 1} coefficient", eq_check(got, expected, cfg.sampler))
    return rep


def _cr(ws, a, cfg) -> Report:
    cc = ws.complex_chart(a["chart"], "args.chart")
    f = _g(ws, a, "f")
    return cauchy_riemann_check(split_complex(f, cc.pairing), cc.pairing, cfg.sampler)


def _involution(ws, a, cfg) -> Outcome:
    pi, phi = _g(ws, a, "pi"), _g(ws, a, "map")
    verdict, _ = poi.involution_check(pi, phi, cfg.sampler)
    details = []
    pushed = calc.pushforward(pi, phi)
    for label, target in (("pushforward = pi", pi), ("pushforward = -pi", -pi)):
        rep = calc.compare_fields(pushed, target, cfg.sampler, label)
        details.append(rep.summary())
        if rep.verdict is not Verdict.FAIL:
            details += [f"[{it.verdict.value}] {it.name}: {it.detail}" for it in rep.failures()]
    return Outcome(verdict.value, details)


def _dirac_expect(ws, a, cfg) -> Report:
    pi, phi = _g(ws, a, "pi"), _g(ws, a, "map")
    expected = _g(ws, a, "expected")
    rep = Report("Dirac reduction")
    splits = ["canonical", "alternative"] if a.get("split", "both") == "both" else [a["split"]]
    for split in splits:
        red, pre = poi.dirac_reduce(pi, phi, list(a["locus"]), cfg.sampler, split=split)
        rep.merge(pre, f"{split} preconditions")
        if red is None:
            continue
        if red.chart.coords != expected.chart.coords:
            rep.add(f"{split} chart", Verdict.FAIL,
                    f"reduced coordinates {red.chart.coords} vs {expected.chart.coords}")
            continue
        moved = calc.Multivector(expected.chart, red.degree, red.components)
        rep.merge(calc.compare_fields(moved, expected, cfg.sampler), f"{split} result")
    return rep


def _resolution(a, cfg) -> tuple[int, int]:
    if cfg.quad is not None:
        return cfg.quad
    res = a.get("resolution", [64, 128])
    return int(res[0]), int(res[1])


def _sphere_period(ws, a, cfg) -> Outcome:
    form = _g(ws, a, "form")
    sphere = _g(ws, a, "sphere")
    res = _resolution(a, cfg)
    r = per.sphere_period(form, sphere, res, sampler=cfg.sampler)
    values = {"value": r.value, "error_estimate": r.error_estimate, "resolution": list(res)}
    details = [f"integral = {r.value:.15g} +- {r.error_estimate:.3g} at {res[0]}x{res[1]}"]
    target = a.get("target")
    if target is None:
        return Outcome("computed", details, values)
    if target == "nonzero":
        ok = abs(r.value) > 10 * max(r.error_estimate, 1e-15)
        return Outcome("nonzero" if ok else "zero", details, values)
    tv = _weight(target, "args.target")
    tol = float(a.get("tol", 1e-6))
    dev = abs(r.value - tv)
    details.append(f"target {tv:.15g}, deviation {dev:.3g}, tol {tol:g}")
    return Outcome("match" if dev <= tol else "mismatch", details, values)


def _period_check(ws, a, cfg) -> Outcome:
    o1 = ws.get(a["omega1"], "omega1") if a.get("omega1") else None
    o2 = ws.get(a["omega2"], "omega2") if a.get("omega2") else None
    classes = [ws.get(c, "classes") for c in a["classes"]]
    res = _resolution(a, cfg)
    vecs = per.period_vectors(o1, o2, classes, res, sampler=cfg.sampler)
    details = [f"{v.label}: ({v.value[0]:.15g}, {v.value[1]:.15g}) +- {v.error_estimate:.3g}" for v in vecs]
    values: dict = {"vectors": [list(v.value) for v in vecs],
                    "error_estimates": [v.error_estimate for v in vecs], "resolution": list(res)}
    observed = {}
    if "ratio" in a:
        rspec = a["ratio"]
        i, j = int(rspec.get("numerator", 1)) - 1, int(rspec.get("denominator", 2)) - 1
        ratio = vecs[i].value[0] / vecs[j].value[0]
        target = _weight(rspec["value"], "args.ratio.value")
        tol = float(rspec.get("tol", 1e-5))
        values["ratio"] = ratio
        details.append(f"first-component ratio {ratio:.15g} vs {target:.15g} (tol {tol:g})")
        observed["ratio"] = "match" if abs(ratio - target) <= tol else "mismatch"
    cfgd = per.DiscretenessConfig(max_denominator=int(a.get("max_denominator", 10 ** 4)))
    v = per.discreteness([p.value for p in vecs], cfgd, [p.error_estimate for p in vecs])
    details.append(str(v))
    observed["verdict"] = v.verdict.value
    return Outcome(observed, details, values)


def _discreteness(ws, a, cfg) -> Outcome:
    vectors = [[_weight(x, "args.vectors") for x in vec] for vec in a["vectors"]]
    cfgd = per.DiscretenessConfig(tol=float(a.get("tol", 1e-12)),
                                  max_denominator=int(a.get("max_denominator", 10 ** 4)))
    v = per.discreteness(vectors, cfgd)
    details = [str(v)]
    for s in a.get("scalings", []):
        s = _weight(s, "args.scalings")
        vs = per.discreteness([[s * x for x in vec] for vec in vectors], cfgd)
        details.append(f"scaled by {s:g}: {vs.verdict.value}")
        if vs.verdict is not v.verdict:
            return Outcome("scale-dependent", details)
    return Outcome(v.verdict.value, details)


def _decomposed_invariants(ws, a, cfg) -> Report:
    pi = _g(ws, a, "pi")
    pair = poi.decompose(pi, cfg.sampler)
    rep = pair.invariants(cfg.sampler)
    other = poi.decompose_by_expansion(pi)
    rep.merge(calc.compare_fields(pair.pi_R, other.pi_R, cfg.sampler), "pi_R vs complex expansion")
    rep.merge(calc.compare_fields(pair.pi_I, other.pi_I, cfg.sampler), "pi_I vs complex expansion")
    return rep


def _complex_structure(ws, a, cfg) -> Report:
    obj = _g(ws, a, "endo")
    if isinstance(obj, calc.OneOneTensor):
        return calc.is_almost_complex(obj, cfg.sampler)
    return obj.is_complex_structure(cfg.sampler)


CHECKS: dict[str, CheckSpec] = {
    "is_poisson": CheckSpec({"pi": "obj"}, _c_report(lambda ws, a, c: calc.is_poisson(_g(ws, a, "pi"), c.sampler))),
    "check_axioms": CheckSpec({"algebroid": "obj"},
                              _c_report(lambda ws, a, c: alg.check_axioms(_g(ws, a, "algebroid"), c.sampler))),
    "check_pngc": CheckSpec({"pi": "obj"}, _c_report(lambda ws, a, c: poi.check_pngc(_g(ws, a, "pi"), c.sampler))),
    "bracket_table_check": CheckSpec(
        {"pi": "obj"}, _c_report(lambda ws, a, c: poi.bracket_table_check(_g(ws, a, "pi"), c.sampler))),
    "decomposition_invariants": CheckSpec({"pi": "obj"}, _c_report(_decomposed_invariants)),
    "cotangent_realification": CheckSpec(
        {"pi": "obj"}, _c_report(lambda ws, a, c: poi.check_cotangent_realification(_g(ws, a, "pi"), c.sampler))),
    "equal": CheckSpec({"a": "obj", "b": "obj"}, _c_report(_equal)),
    "torsion_vanishes": CheckSpec({"tensor": "obj"}, _c_report(_torsion_zero)),
    "torsion_value": CheckSpec({"tensor": "obj"}, _c_report(_torsion_value)),
    "torsion_cross_check": CheckSpec({"tensor": "obj"}, _c_report(_torsion_cross)),
    "torsion_oracle": CheckSpec({"tensor": "obj"}, _c_report(_torsion_oracle)),
    "algebroid_torsion_vanishes": CheckSpec(
        {"algebroid": "obj", "endo": "obj"},
        _c_report(lambda ws, a, c: alg.torsion_report(_g(ws, a, "algebroid"), _g(ws, a, "endo"), c.sampler))),
    "complex_structure": CheckSpec({"endo": "obj"}, _c_report(_complex_structure)),
    "morphism_check": CheckSpec({"bundle_map": "obj", "base_map": "obj", "source": "obj", "target": "obj"},
                                _c_report(_morphism)),
    "infinitesimal_multiplicative": CheckSpec(
        {"algebroid": "obj", "endo": "obj", "complex_structure": "obj"}, _c_report(_infmult)),
    "holomorphic_two_form": CheckSpec({"form": "obj", "chart": "cchart"}, _c_report(_two_form)),
    "cauchy_riemann": CheckSpec({"f": "obj", "chart": "cchart"}, _c_report(_cr)),
    "involution_check": CheckSpec({"pi": "obj", "map": "obj"}, _involution),
    "dirac_reduce_expect": CheckSpec({"pi": "obj", "map": "obj", "expected": "obj"}, _c_report(_dirac_expect)),
    "sphere_period": CheckSpec({"form": "obj", "sphere": "obj"}, _sphere_period),
    "period_check": CheckSpec({"omega1": "obj?", "omega2": "obj?", "classes": "objs"}, _period_check),
    "discreteness": CheckSpec({}, _discreteness),
}


# ---------------------------------------------------------------------------
# running
# ---------------------------------------------------------------------------

def _status(observed, expected) -> str:
    if observed == expected:
        return "pass"
    if isinstance(expected, dict) and isinstance(observed, dict):
        if all(observed.get(k) == v for k, v in expected.items()):
            return "pass"
        if any(observed.get(k) == Verdict.INCONCLUSIVE.value or observed.get(k) == "Inconclusive"
               for k in expected):
            return "inconclusive"
        return "fail"
    if observed in (Verdict.INCONCLUSIVE.value, "Inconclusive"):
        return "inconclusive"
    return "fail"


def run_check(ws: Workspace, chk: dict, cfg: RunConfig) -> CheckResult:
    entry = CHECKS[chk["op"]]
    start = time.perf_counter()
    try:
        out = entry.fn(ws, chk.get("args") or {}, cfg)
        status = _status(out.observed, chk["expect"])
        details = out.details
        if status != "pass":
            details = [f"expected {json.dumps(chk['expect'])}, observed {json.dumps(out.observed)}"] + details
        result = CheckResult(chk["id"], chk["op"], status, chk["expect"], out.observed, details, out.values)
    except Exception as exc:  # runtime failures become status=error
        result = CheckResult(chk["id"], chk["op"], "error", chk["expect"], None,
                             [f"{type(exc).__name__}: {exc}"])
    if cfg.timings:
        result.wall_time = time.perf_counter() - start
    return result


def run_workspace(ws: Workspace, cfg: RunConfig) -> list[CheckResult]:
    """Run every check; results follow declaration order."""
    if cfg.jobs <= 1:
        return [run_check(ws, c, cfg) for c in ws.checks]
    with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
        return list(pool.map(lambda c: run_check(ws, c, cfg), ws.checks))


def report_json(results: list[CheckResult], cfg: RunConfig) -> dict:
    return {"version": SCHEMA_VERSION, "seed": cfg.seed, "results": [r.to_json() for r in results]}


def report_text(results: list[CheckResult], source: str) -> str:
    lines = [f"workspace: {source}"]
    for r in results:
        obs = json.dumps(r.observed) if not isinstance(r.observed, str) else r.observed
        lines.append(f"[{r.status.upper():>12}] {r.id} ({r.op}): {obs}")
        lines.extend(f"    {_clip(d)}" for d in r.details)
    counts = {s: sum(r.status == s for r in results) for s in ("pass", "fail", "inconclusive", "error")}
    lines.append("summary: " + ", ".join(f"{v} {k}" for k, v in counts.items()))
    return "\n".join(lines)


TEXT_WIDTH = 200


def _clip(line: str) -> str:
    return line if len(line) <= TEXT_WIDTH else line[:TEXT_WIDTH - 3] + "..."


def exit_code(results: list[CheckResult]) -> int:
    if any(r.status == "error" for r in results):
        return 2
    if any(r.status != "pass" for r in results):
        return 1
    return 0


PRESET_PREFIX = "paper:"


def load_workspace(ref: str) -> Workspace:
    """Load a workspace file, or a built-in preset named ``paper:<name>``."""
    if ref.startswith(PRESET_PREFIX):
        name = ref[len(PRESET_PREFIX):]
        res = resources.files("holalg").joinpath("presets", f"paper_{name}.json")
        if not res.is_file():
            raise SchemaError("$", f"unknown preset {ref!r}")
        text = res.read_text(encoding="utf-8")
        source = ref
    else:
        path = Path(ref)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise SchemaError("$", f"cannot read {ref}: {exc.strerror}") from None
        source = str(path)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"$ (line {exc.lineno}, column {exc.colno})", exc.msg) from None
    return Workspace(data, source)
