"""Periods of closed 2-forms over parametrized spheres, and discreteness of period groups."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Sequence

import mpmath
import numpy as np

from .calculus import (
    Chart,
    ChartMap,
    ComplexChart,
    DifferentialForm,
    compare_fields,
    exterior_derivative,
    pullback,
)
from .report import Report, Verdict
from .symbolic import (
    I_UNIT,
    ONE,
    PI_EXPR,
    RandomPointConfig,
    ScalarExpr,
    as_expr,
    eq_check,
    evaluate,
    var,
)

PARAMS = Chart("S2", ("theta", "phi"))
MIN_RESOLUTION = (16, 32)


class PeriodError(ValueError):
    pass


class NotClosedError(PeriodError):
    pass


class SeamError(PeriodError):
    pass


# ---------------------------------------------------------------------------
# forms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WeightedForm:
    """Finite sum ``sum_k w_k omega_k`` with float weights (e.g. ``sqrt(2)``)."""

    terms: tuple[tuple[float, DifferentialForm], ...]

    @classmethod
    def of(cls, form: "DifferentialForm | WeightedForm | None") -> "WeightedForm":
        if form is None:
            return cls(())
        if isinstance(form, WeightedForm):
            return form
        return cls(((1.0, form),))

    def __add__(self, other: "WeightedForm") -> "WeightedForm":
        return WeightedForm(self.terms + WeightedForm.of(other).terms)

    def scaled(self, w: float) -> "WeightedForm":
        return WeightedForm(tuple((w * c, f) for c, f in self.terms))


def complex_form_parts(chart: ComplexChart, components: dict, scale=ONE
                       ) -> tuple[DifferentialForm, DifferentialForm]:
    """Real and imaginary parts of ``scale * sum c_I dz_I`` (``c_I`` in z-names)."""
    n = chart.n
    dz = [DifferentialForm(chart.real, 1, {(k,): ONE, (n + k,): I_UNIT}) for k in range(n)]
    sub = chart.pairing.substitution()
    total = None
    for idx, c in components.items():
        c = chart.parse(c) if isinstance(c, str) else as_expr(c)
        term = DifferentialForm(chart.real, 0, {(): as_expr(scale) * c.subs(sub)})
        for k in idx:
            term = term.wedge(dz[k])
        total = term if total is None else total + term
    if total is None:
        raise PeriodError("empty form")
    return (total.map_components(lambda v: v.real_part()),
            total.map_components(lambda v: v.imag_part()))


def eta_components(offset: int = 0) -> dict:
    """``z1 dz2^dz3 + z2 dz3^dz1 + z3 dz1^dz2`` on coordinates ``offset..offset+2``."""
    a, b, c = offset, offset + 1, offset + 2
    z = [var(f"z{k + 1}") for k in (a, b, c)]
    return {(b, c): z[0], (c, a): z[1], (a, b): z[2]}


ETA_SCALE = (PI_EXPR ** -2) / 4


def eta(chart: ComplexChart, offset: int = 0) -> tuple[DifferentialForm, DifferentialForm]:
    """``(eta_1, eta_2)`` for ``eta = (z1 dz2^dz3 + c.p.) / (4 pi^2)``."""
    return complex_form_parts(chart, eta_components(offset), ETA_SCALE)


# ---------------------------------------------------------------------------
# sphere classes and quadrature
# ---------------------------------------------------------------------------

@dataclass
class SphereClass:
    """Map ``[0, pi] x [0, 2 pi] -> ambient`` with optional defining constraints.

    ``constraints`` are real functions vanishing on a submanifold containing
    the sphere; they let non-closed ambient forms pass the closedness test
    when their differential vanishes along that submanifold.
    """

    name: str
    ambient: Chart
    parametrization: tuple[ScalarExpr, ...]
    constraints: tuple[ScalarExpr, ...] = ()
    map: ChartMap = field(init=False, repr=False)

    def __post_init__(self):
        comps = [PARAMS.parse(c) if isinstance(c, str) else as_expr(c) for c in self.parametrization]
        self.parametrization = tuple(comps)
        self.constraints = tuple(self.ambient.parse(c) if isinstance(c, str) else as_expr(c)
                                 for c in self.constraints)
        self.map = ChartMap(PARAMS, self.ambient, comps)

    def positions(self, theta, phi) -> np.ndarray:
        pt = {"theta": theta, "phi": phi}
        shape = np.broadcast(np.asarray(theta), np.asarray(phi)).shape
        return np.stack([np.broadcast_to(np.asarray(evaluate(c, pt), dtype=float), shape)
                         for c in self.parametrization])

    def seam_check(self, samples: int = 17, tol: float = 1e-9) -> Report:
        report = Report(f"seams of {self.name}")
        t = np.linspace(0.0, math.pi, samples)
        p = np.linspace(0.0, 2 * math.pi, samples)
        gap = float(np.max(np.abs(self.positions(t, 0.0) - self.positions(t, 2 * math.pi))))
        report.add("phi = 0 and phi = 2 pi glue", Verdict.PASS if gap <= tol else Verdict.FAIL,
                   f"max gap {gap:.3g}")
        for pole in (0.0, math.pi):
            pos = self.positions(pole, p)
            spread = float(np.max(np.abs(pos - pos[:, :1])))
            report.add(f"theta = {'0' if pole == 0 else 'pi'} collapses to a point",
                       Verdict.PASS if spread <= tol else Verdict.FAIL, f"spread {spread:.3g}")
        return report

    def constraint_check(self, sampler: RandomPointConfig | None = None) -> Report:
        report = Report(f"{self.name} lies on the constraint set")
        sub = self.map.substitution()
        for k, F in enumerate(self.constraints):
            report.add_comparison(f"F{k + 1} = 0", eq_check(F.subs(sub), 0, sampler))
        return report


def closedness_report(omega: DifferentialForm, constraints: Sequence[ScalarExpr] = (),
                      sampler: RandomPointConfig | None = None) -> Report:
    """``d omega = 0``, or ``d omega ^ dF_1 ^ ... ^ dF_m = 0`` given constraints.

    The second test shows ``d omega`` vanishes on the common zero set of the
    ``F_k`` wherever their differentials are independent.
    """
    report = Report("closed")
    d = exterior_derivative(omega)
    if d.is_zero():
        report.add("d omega = 0", Verdict.PASS)
        return report
    if not constraints:
        report.merge(compare_fields(d, DifferentialForm(omega.chart, d.degree), sampler), "d omega = 0")
        return report
    w = d
    for F in constraints:
        w = w.wedge(DifferentialForm.differential(omega.chart, F))
    if w.degree > omega.chart.dim:
        report.add("constraint test applicable", Verdict.INCONCLUSIVE,
                   "degree exceeds dimension; wedge is vacuous")
        return report
    report.merge(compare_fields(w, DifferentialForm(omega.chart, w.degree), sampler),
                 "d omega ^ dF = 0")
    return report


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_estimate: float
    fine: float
    coarse: float
    resolution: tuple[int, int]


def _midpoint(coef: ScalarExpr, n_theta: int, n_phi: int) -> tuple[float, float]:
    """Composite midpoint sum and the matching sum of ``|f|`` (for a round-off floor)."""
    ht, hp = math.pi / n_theta, 2 * math.pi / n_phi
    t = (np.arange(n_theta) + 0.5) * ht
    p = (np.arange(n_phi) + 0.5) * hp
    T, P = np.meshgrid(t, p, indexing="ij")
    with np.errstate(all="ignore"):
        vals = evaluate(coef, {"theta": T, "phi": P})
    vals = np.broadcast_to(np.asarray(vals), T.shape)
    if np.iscomplexobj(vals):
        raise PeriodError("pulled-back coefficient is not real")
    if not np.all(np.isfinite(vals)):
        raise PeriodError("non-finite integrand")
    # row sums then a compensated sum: fixed reduction order
    rows = [math.fsum(row) for row in vals.tolist()]
    return math.fsum(rows) * ht * hp, float(np.abs(vals).sum()) * ht * hp


def pulled_back_coefficient(omega: DifferentialForm, sphere: SphereClass) -> ScalarExpr:
    pb = pullback(omega, sphere.map)
    return pb[(0, 1)]


def sphere_period(omega: "DifferentialForm | WeightedForm", sphere: SphereClass,
                  resolution: tuple[int, int] = (64, 128), *, check_closed: bool = True,
                  sampler: RandomPointConfig | None = None) -> QuadratureResult:
    """Integral of ``omega`` over ``sphere`` by composite midpoint rule.

    The reported value is the Richardson extrapolate ``R_n = I_n + (I_n - I_{n/2}) / 3``.
    The midpoint error in ``theta`` expands in even powers of the step, so
    ``|R_n - R_{n/2}| / 15`` estimates the error of ``R_n`` (floored at round-off).
    """
    n_t, n_p = resolution
    if n_t < MIN_RESOLUTION[0] or n_p < MIN_RESOLUTION[1]:
        raise PeriodError(f"resolution must be at least {MIN_RESOLUTION}")
    if n_t % 4 or n_p % 4:
        raise PeriodError("resolution must be divisible by 4 in both directions")
    wf = WeightedForm.of(omega)
    seams = sphere.seam_check()
    if seams.verdict is Verdict.FAIL:
        raise SeamError(str(seams))
    levels = [0.0, 0.0, 0.0]
    magnitude = 0.0
    for w, form in wf.terms:
        if form.chart != sphere.ambient or form.degree != 2:
            raise PeriodError("expected a 2-form on the sphere's ambient chart")
        if check_closed:
            rep = closedness_report(form, sphere.constraints, sampler)
            if rep.verdict is not Verdict.PASS:
                raise NotClosedError(str(rep))
        coef = pulled_back_coefficient(form, sphere)
        if coef.is_zero():
            continue
        for k in range(3):
            val, mag = _midpoint(coef, n_t >> k, n_p >> k)
            levels[k] += w * val
            if k == 0:
                magnitude += abs(w) * mag
    fine, coarse, coarsest = levels
    value = fine + (fine - coarse) / 3
    previous = coarse + (coarse - coarsest) / 3
    roundoff = 64 * np.finfo(float).eps * magnitude
    err = max(abs(value - previous) / 15, roundoff)
    return QuadratureResult(value, err, fine, coarse, (n_t, n_p))


@dataclass(frozen=True)
class PeriodVector:
    value: tuple[float, float]
    error_estimate: float
    label: str = ""


def period_vectors(omega1, omega2, classes: Sequence[SphereClass],
                   resolution: tuple[int, int] = (64, 128), *,
                   sampler: RandomPointConfig | None = None) -> list[PeriodVector]:
    out = []
    for s in classes:
        r1 = sphere_period(WeightedForm.of(omega1), s, resolution, sampler=sampler)
        r2 = sphere_period(WeightedForm.of(omega2), s, resolution, sampler=sampler)
        out.append(PeriodVector((r1.value, r2.value), max(r1.error_estimate, r2.error_estimate), s.name))
    return out


# ---------------------------------------------------------------------------
# discreteness
# ---------------------------------------------------------------------------

class Discreteness(enum.Enum):
    DISCRETE = "Discrete"
    NOT_DISCRETE = "NotDiscrete"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class DiscretenessConfig:
    tol: float = 1e-12
    max_denominator: int = 10 ** 4
    rank_tol: float = 1e-6


@dataclass(frozen=True)
class PeriodGroupVerdict:
    verdict: Discreteness
    real_rank: int
    witness: str

    def __str__(self) -> str:
        return f"{self.verdict.value} (real rank {self.real_rank}): {self.witness}"


@dataclass(frozen=True)
class _Recognition:
    rational: bool | None
    fraction: Fraction
    error: float
    threshold: float


def recognize_rational(x: float, threshold: float, max_den: int) -> _Recognition:
    """Continued-fraction recognition with a PSLQ cross-check.

    ``rational`` is True when some ``p/q`` with ``q <= max_den`` lies within
    ``threshold``; False when none does and the bound certifies it; None
    when the threshold is too loose to tell.
    """
    best = Fraction(x).limit_denominator(max_den)
    err = abs(x - float(best))
    if threshold * max_den ** 2 >= 1:
        # every real lies this close to some admissible fraction
        return _Recognition(None, best, err, threshold)
    if err <= threshold:
        return _Recognition(True, best, err, threshold)
    with mpmath.workdps(30):
        rel = mpmath.pslq([mpmath.mpf(x), 1], tol=max(threshold, 1e-25), maxcoeff=max_den, maxsteps=10 ** 4)
    if rel is not None and rel[0] != 0:
        frac = Fraction(-rel[1], rel[0])
        e2 = abs(x - float(frac))
        if e2 <= threshold:
            return _Recognition(True, frac, e2, threshold)
    return _Recognition(False, best, err, threshold)


def discreteness(vectors: Sequence[Sequence[float]], config: DiscretenessConfig | None = None,
                 errors: Sequence[float] | None = None) -> PeriodGroupVerdict:
    """Decide whether ``sum Z v_k`` is a discrete subgroup of ``R^2``.

    The group is discrete iff its rational rank equals its real rank: every
    vector must be a rational combination of a real basis chosen from the
    list.  Coefficients are recognized by continued fractions up to
    ``max_denominator``; a coefficient farther than the matching threshold
    from every such fraction is an irrationality witness.
    """
    cfg = config or DiscretenessConfig()
    V = np.asarray(vectors, dtype=float)
    if V.ndim != 2 or V.shape[0] == 0:
        raise PeriodError("need a nonempty list of vectors")
    errs = np.zeros(len(V)) if errors is None else np.asarray(errors, dtype=float)
    norms = np.linalg.norm(V, axis=1)
    scale = float(norms.max())
    if scale == 0.0:
        return PeriodGroupVerdict(Discreteness.DISCRETE, 0, "trivial group")
    U = V / scale
    rel_err = errs / scale
    sv = np.linalg.svd(U, compute_uv=False)
    sv = sv / sv[0]
    floor = max(cfg.tol, 10 * float(rel_err.max(initial=0.0)))
    rank = 0
    for s in sv:
        if s > cfg.rank_tol:
            rank += 1
        elif s > 100 * floor:
            return PeriodGroupVerdict(Discreteness.INCONCLUSIVE, rank,
                                      f"ambiguous singular value {s:.3g}")
    if rank == 1:
        ref = int(np.argmax(np.linalg.norm(U, axis=1)))
        basis = [ref]
        u = U[ref]
        coeffs = [[float(np.dot(U[k], u) / np.dot(u, u))] for k in range(len(U))]
    else:
        best, pair = -1.0, (0, 1)
        for i, j in combinations(range(len(U)), 2):
            det = abs(U[i, 0] * U[j, 1] - U[i, 1] * U[j, 0])
            if det > best:
                best, pair = det, (i, j)
        basis = list(pair)
        M = np.array([U[pair[0]], U[pair[1]]]).T
        coeffs = [list(np.linalg.solve(M, U[k])) for k in range(len(U))]
    witnesses, unsure = [], []
    for k, cs in enumerate(coeffs):
        if k in basis:
            continue
        for b, c in zip(basis, cs):
            thr = max(cfg.tol, 10 * (float(rel_err[k]) + float(rel_err[b])) * max(1.0, abs(c)) /
                      max(float(np.linalg.norm(U[b])), 1e-300))
            rec = recognize_rational(c, thr, cfg.max_denominator)
            label = f"v{k + 1} along v{b + 1}: {c:.15g}"
            if rec.rational is False:
                witnesses.append(f"{label} has no p/q with q <= {cfg.max_denominator} within "
                                 f"{rec.threshold:.1e} (closest {rec.fraction}, off by {rec.error:.3g})")
            elif rec.rational is None:
                unsure.append(f"{label} threshold {rec.threshold:.1e} too loose to certify")
    if witnesses:
        return PeriodGroupVerdict(Discreteness.NOT_DISCRETE, rank, "; ".join(witnesses))
    if unsure:
        return PeriodGroupVerdict(Discreteness.INCONCLUSIVE, rank, "; ".join(unsure))
    return PeriodGroupVerdict(Discreteness.DISCRETE, rank,
                              "all vectors are rational combinations of the basis")


# ---------------------------------------------------------------------------
# the N x N example
# ---------------------------------------------------------------------------

def unit_sphere() -> list[str]:
    """Coordinates ``(sin t cos p, sin t sin p, cos t)``."""
    return ["sin(theta)*cos(phi)", "sin(theta)*sin(phi)", "cos(theta)"]


def quadric_constraints(chart: ComplexChart, offset: int) -> tuple[ScalarExpr, ScalarExpr]:
    """Real and imaginary parts of ``z_a^2 + z_b^2 + z_c^2 - 1``."""
    sub = chart.pairing.substitution()
    F = sum((var(chart.z[offset + k]) ** 2 for k in range(3)), -ONE).subs(sub)
    return F.real_part(), F.imag_part()


@dataclass
class QuadricProductExample:
    chart: ComplexChart
    omega1: WeightedForm
    omega2: WeightedForm
    classes: list[SphereClass]


def n_cross_n(weight1: float = math.sqrt(2.0), weight2: float = 1.0) -> QuadricProductExample:
    """``X = N x N`` with ``omega = w1 p1*eta + w2 p2*eta`` and the two sphere classes."""
    C = ComplexChart.standard(6, "NxN")
    e1_re, e1_im = eta(C, 0)
    e2_re, e2_im = eta(C, 3)
    omega1 = WeightedForm(((weight1, e1_re), (weight2, e2_re)))
    omega2 = WeightedForm(((weight1, e1_im), (weight2, e2_im)))
    cons = quadric_constraints(C, 0) + quadric_constraints(C, 3)
    sphere = unit_sphere()
    pinned = ["1", "0", "0"]
    zeros = ["0"] * 6
    s1 = SphereClass("S x {pt}", C.real, tuple(sphere + pinned + zeros), cons)
    s2 = SphereClass("{pt} x S", C.real, tuple(pinned + sphere + zeros), cons)
    return QuadricProductExample(C, omega1, omega2, [s1, s2])
