"""Holomorphic Poisson bivectors and their real and imaginary parts.

A holomorphic bivector ``pi = sum_{a<b} phi_ab d/dz_a ^ d/dz_b`` on a
:class:`ComplexChart` is split as ``pi = pi_R + i pi_I`` on the underlying
real chart ``(x_1..x_n, y_1..y_n)``.  With ``phi = f + i g`` and
``d/dz = (d/dx - i d/dy) / 2``::

    pi_R = 1/4 sum f (dx_a^dx_b - dy_a^dy_b) + 1/4 sum g (dx_a^dy_b + dy_a^dx_b)
    pi_I = 1/4 sum g (dx_a^dx_b - dy_a^dy_b) - 1/4 sum f (dx_a^dy_b + dy_a^dx_b)
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from itertools import combinations
from typing import Mapping, Sequence

from .algebroid import (
    HolomorphicAlgebroidChart,
    change_frame,
    compare_algebroids,
    cotangent_algebroid,
    deform,
    morphism_check,
    realify,
)
from .calculus import (
    Chart,
    ChartMap,
    ComplexChart,
    DifferentialForm,
    Multivector,
    compare_fields,
    compare_matrices,
    exterior_derivative,
    is_poisson,
    matmul,
    nijenhuis_torsion,
    parse_index,
    poisson_bracket,
    pushforward,
    schouten_bracket,
)
from .report import Report, Verdict
from .symbolic import (
    I_UNIT,
    ONE,
    ZERO,
    ComplexScalar,
    RandomPointConfig,
    ScalarExpr,
    as_expr,
    cauchy_riemann_check,
    eq_check,
    holomorphic_derivative,
    split_complex,
    var,
)

QUARTER = as_expr(1) / 4


class HolomorphicError(ValueError):
    pass


class HolomorphicBivector:
    """``pi = sum_{a<b} phi_ab d/dz_a ^ d/dz_b``; ``phi`` may use z, x or y names."""

    __slots__ = ("chart", "components", "split")

    def __init__(self, chart: ComplexChart, components: Mapping, *, one_based: bool = False):
        self.chart = chart
        comps: dict[tuple[int, int], ScalarExpr] = {}
        for key, v in components.items():
            a, b = parse_index(key, one_based)
            if a == b or not (0 <= a < chart.n and 0 <= b < chart.n):
                raise HolomorphicError(f"bad bivector index {key!r}")
            e = chart.parse(v) if isinstance(v, str) else as_expr(v)
            if a > b:
                a, b, e = b, a, -e
            comps[(a, b)] = comps[(a, b)] + e if (a, b) in comps else e
        self.components = {k: v for k, v in comps.items() if not v.is_zero()}
        self.split = {k: split_complex(v, chart.pairing) for k, v in self.components.items()}

    def phi(self, a: int, b: int) -> ComplexScalar:
        zero = ComplexScalar(ZERO, ZERO)
        if a == b:
            return zero
        if a < b:
            return self.split.get((a, b), zero)
        return -self.split.get((b, a), zero)

    def cr_report(self, sampler: RandomPointConfig | None = None) -> Report:
        report = Report("bivector is holomorphic")
        for (a, b), cs in sorted(self.split.items()):
            report.merge(cauchy_riemann_check(cs, self.chart.pairing, sampler), f"phi_{a + 1}{b + 1}")
        return report

    def scale(self, c) -> "HolomorphicBivector":
        c = as_expr(c)
        return HolomorphicBivector(self.chart, {k: c * v for k, v in self.components.items()})

    def __repr__(self) -> str:
        body = ", ".join(f"{a + 1},{b + 1}: {v}" for (a, b), v in sorted(self.components.items()))
        return f"HolomorphicBivector({self.chart.name}, {{{body}}})"


@dataclass
class DecomposedPair:
    pi_R: Multivector
    pi_I: Multivector

    def invariants(self, sampler: RandomPointConfig | None = None) -> Report:
        report = Report("real/imaginary pair")
        report.merge(is_poisson(self.pi_R, sampler), "pi_R Poisson")
        report.merge(is_poisson(self.pi_I, sampler), "pi_I Poisson")
        zero = Multivector(self.pi_R.chart, 3)
        report.merge(compare_fields(schouten_bracket(self.pi_R, self.pi_I), zero, sampler),
                     "[pi_R, pi_I] = 0")
        return report


def decompose(pi: HolomorphicBivector, sampler: RandomPointConfig | None = None,
              *, check: bool = True) -> DecomposedPair:
    """Real and imaginary parts assembled from ``phi = f + i g``."""
    if check:
        rep = pi.cr_report(sampler)
        if rep.verdict is Verdict.FAIL:
            raise HolomorphicError("bivector is not holomorphic:\n" + str(rep))
    C = pi.chart
    n = C.n
    real: dict = {}
    imag: dict = {}

    def put(store, i, j, v):
        if i == j or v.is_zero():
            return
        key, val = ((i, j), v) if i < j else ((j, i), -v)
        store[key] = store[key] + val if key in store else val

    for (a, b), cs in pi.split.items():
        f, g = cs.re * QUARTER, cs.im * QUARTER
        xa, xb, ya, yb = a, b, n + a, n + b
        put(real, xa, xb, f)
        put(real, ya, yb, -f)
        put(real, xa, yb, g)
        put(real, ya, xb, g)
        put(imag, xa, xb, g)
        put(imag, ya, yb, -g)
        put(imag, xa, yb, -f)
        put(imag, ya, xb, -f)
    return DecomposedPair(Multivector(C.real, 2, real), Multivector(C.real, 2, imag))


def decompose_by_expansion(pi: HolomorphicBivector) -> DecomposedPair:
    """Independent split: expand ``d/dz = (d/dx - i d/dy)/2`` with complex coefficients."""
    C = pi.chart
    n = C.n
    half = as_expr(1) / 2
    dz = [Multivector(C.real, 1, {(k,): half, (n + k,): -half * I_UNIT}) for k in range(n)]
    total = Multivector(C.real, 2)
    for (a, b), cs in pi.split.items():
        total = total + dz[a].wedge(dz[b]).scale(cs.recombine())
    return DecomposedPair(total.map_components(lambda v: v.real_part()),
                          total.map_components(lambda v: v.imag_part()))


def bracket_table_check(pi: HolomorphicBivector, sampler: RandomPointConfig | None = None) -> Report:
    """The six coordinate-bracket identities linking ``pi_R``, ``pi_I`` and ``{z_i, z_j}``."""
    rep = pi.cr_report(sampler)
    if rep.verdict is Verdict.FAIL:
        raise HolomorphicError("bracket table needs a holomorphic bivector:\n" + str(rep))
    pair = decompose(pi, sampler, check=False)
    C = pi.chart
    n = C.n
    x = [var(v) for v in C.x]
    y = [var(v) for v in C.y]
    report = Report("bracket table")
    for i in range(n):
        for j in range(n):
            phi = pi.phi(i, j)
            re, im = phi.re * QUARTER, phi.im * QUARTER
            rows = [
                (f"{{x{i + 1},x{j + 1}}}_R = Re/4", pair.pi_R, x[i], x[j], re),
                (f"{{x{i + 1},x{j + 1}}}_I = Im/4", pair.pi_I, x[i], x[j], im),
                (f"{{y{i + 1},y{j + 1}}}_R = -Re/4", pair.pi_R, y[i], y[j], -re),
                (f"{{y{i + 1},y{j + 1}}}_I = -Im/4", pair.pi_I, y[i], y[j], -im),
                (f"{{x{i + 1},y{j + 1}}}_R = Im/4", pair.pi_R, x[i], y[j], im),
                (f"{{x{i + 1},y{j + 1}}}_I = -Re/4", pair.pi_I, x[i], y[j], -re),
            ]
            for label, P, u, w, expected in rows:
                report.add_comparison(label, eq_check(poisson_bracket(P, u, w), expected, sampler))
    return report


def sharp_matrix(P: Multivector) -> list[list[ScalarExpr]]:
    n = P.chart.dim
    return [[P[(i, j)] for i in range(n)] for j in range(n)]


def check_pngc(pi: HolomorphicBivector, sampler: RandomPointConfig | None = None) -> Report:
    """Poisson-Nijenhuis characterization of holomorphic Poisson bivectors."""
    C = pi.chart
    report = Report("Poisson-Nijenhuis characterization")
    report.merge(pi.cr_report(sampler), "(1) Cauchy-Riemann")
    J = C.J
    torsion = nijenhuis_torsion(J)
    report.add("(2) Nijenhuis torsion of J vanishes",
               Verdict.PASS if torsion.is_zero() else Verdict.FAIL)
    pair = decompose(pi, sampler, check=False)
    lhs = sharp_matrix(pair.pi_R)
    rhs = matmul(sharp_matrix(pair.pi_I), J.transpose())
    report.merge(compare_matrices(lhs, rhs, sampler), "(3) pi_R# = pi_I# J*")
    report.merge(is_poisson(pair.pi_R, sampler), "(4) pi_R Poisson")
    report.merge(is_poisson(pair.pi_I, sampler), "(5) pi_I Poisson")
    report.merge(compare_fields(schouten_bracket(pair.pi_R, pair.pi_I), Multivector(C.real, 3), sampler),
                 "(6) [pi_R, pi_I] = 0")
    return report


def holomorphic_extension(pi_real: Multivector, chart: ComplexChart | None = None) -> HolomorphicBivector:
    """Replace every real coordinate ``x_k`` by ``z_k``."""
    _need_degree(pi_real, 2)
    C = chart or ComplexChart.from_real(pi_real.chart)
    if C.x != pi_real.chart.coords:
        raise HolomorphicError("complex chart x-names must match the real chart")
    sub = {x: var(z) for x, z in zip(C.x, C.z)}
    return HolomorphicBivector(C, {k: v.subs(sub) for k, v in pi_real.components.items()})


def conjugation_involution(chart: ComplexChart) -> ChartMap:
    """``(x, y) -> (x, -y)``; its own inverse."""
    comps = [var(x) for x in chart.x] + [-var(y) for y in chart.y]
    return ChartMap(chart.real, chart.real, comps, comps)


class InvolutionVerdict(enum.Enum):
    POISSON = "Poisson"
    ANTI_POISSON = "AntiPoisson"
    NEITHER = "Neither"
    INCONCLUSIVE = "Inconclusive"


def involution_check(pi: Multivector, phi: ChartMap, sampler: RandomPointConfig | None = None
                     ) -> tuple[InvolutionVerdict, Report]:
    _need_degree(pi, 2)
    pushed = pushforward(pi, phi)
    same = compare_fields(pushed, pi, sampler, "pushforward = pi")
    anti = compare_fields(pushed, -pi, sampler, "pushforward = -pi")
    report = Report("involution")
    report.merge(same)
    report.merge(anti)
    if same.verdict is Verdict.PASS:
        return InvolutionVerdict.POISSON, report
    if anti.verdict is Verdict.PASS:
        return InvolutionVerdict.ANTI_POISSON, report
    if same.verdict is Verdict.FAIL and anti.verdict is Verdict.FAIL:
        return InvolutionVerdict.NEITHER, report
    return InvolutionVerdict.INCONCLUSIVE, report


def dirac_reduce(pi: Multivector, phi: ChartMap, locus: Sequence[str],
                 sampler: RandomPointConfig | None = None, *, split: str = "canonical",
                 name: str = "Q") -> tuple[Multivector | None, Report]:
    """Induced bivector on the fixed locus ``{locus coords = 0}`` of an involution.

    ``pi`` is split as ``sum pi^{ij} X ^ Y`` with ``X = pi^{ij} d_i, Y = d_j``
    (``split="canonical"``) or ``X = d_i, Y = pi^{ij} d_j`` (``"alternative"``);
    each factor is replaced by ``(X + phi_* X) / 2`` before restriction.
    """
    _need_degree(pi, 2)
    chart = pi.chart
    if phi.source != chart or phi.target != chart:
        raise HolomorphicError("involution must act on the bivector's chart")
    report = Report("Dirac reduction")
    idx = {chart.index(c) for c in locus}
    zero_sub = {chart.coords[k]: ZERO for k in idx}
    twice = phi.compose(phi)
    for name_k, comp in zip(chart.coords, twice.components):
        report.add_comparison(f"phi^2 = id [{name_k}]", eq_check(comp, var(name_k), sampler))
    for k, comp in enumerate(phi.components):
        expected = ZERO if k in idx else var(chart.coords[k])
        report.add_comparison(f"locus fixed [{chart.coords[k]}]",
                              eq_check(comp.subs(zero_sub), expected, sampler))
    if report.verdict is Verdict.FAIL:
        return None, report
    half = as_expr(1) / 2

    def plus(X: Multivector) -> Multivector:
        return (X + pushforward(X, phi)).scale(half)

    total = Multivector(chart, 2)
    for (i, j), c in pi.components.items():
        if split == "canonical":
            X = Multivector(chart, 1, {(i,): c})
            Y = Multivector.basis(chart, j)
        elif split == "alternative":
            X = Multivector.basis(chart, i)
            Y = Multivector(chart, 1, {(j,): c})
        else:
            raise ValueError(f"unknown split {split!r}")
        total = total + plus(X).wedge(plus(Y))
    total = total.subs(zero_sub)
    keep = [k for k in range(chart.dim) if k not in idx]
    for key, v in sorted(total.components.items()):
        if any(k in idx for k in key):
            label = ",".join(chart.coords[k] for k in key)
            report.add_comparison(f"normal component [{label}] vanishes", eq_check(v, ZERO, sampler))
    Q = Chart(name, tuple(chart.coords[k] for k in keep))
    pos = {k: p for p, k in enumerate(keep)}
    reduced = Multivector(Q, 2, {(pos[a], pos[b]): v for (a, b), v in total.components.items()
                                 if a in pos and b in pos})
    return reduced, report


# ---------------------------------------------------------------------------
# (2,0)-forms
# ---------------------------------------------------------------------------

@dataclass
class ComplexTwoForm:
    """``alpha = re + i im`` with its ``dz_a ^ dz_b`` coefficients."""

    chart: ComplexChart
    re: DifferentialForm
    im: DifferentialForm
    z_components: dict[tuple[int, int], ComplexScalar]

    def z_expressions(self) -> dict[tuple[int, int], ScalarExpr]:
        return {k: v.recombine() for k, v in self.z_components.items()}


def form_pair(alpha: DifferentialForm, v: Sequence[ScalarExpr], w: Sequence[ScalarExpr]) -> ScalarExpr:
    chart = alpha.chart
    return alpha.evaluate_on(Multivector.vector(chart, v), Multivector.vector(chart, w))


def holomorphic_two_form(alpha_R: DifferentialForm, chart: ComplexChart,
                         sampler: RandomPointConfig | None = None) -> tuple[Report, ComplexTwoForm | None]:
    """Complexify a J-compatible real 2-form as ``alpha_R - i alpha_R(J., .)``."""
    if alpha_R.chart != chart.real or alpha_R.degree != 2:
        raise HolomorphicError("expected a 2-form on the complex chart's real chart")
    report = Report("holomorphic 2-form")
    J = chart.J
    N = chart.real.dim
    cols = [[J[(r, p)] for r in range(N)] for p in range(N)]
    basis = [[ONE if r == p else ZERO for r in range(N)] for p in range(N)]
    compat = Report("compatibility")
    for p, q in combinations(range(N), 2):
        lhs = form_pair(alpha_R, basis[p], cols[q])
        rhs = form_pair(alpha_R, cols[p], basis[q])
        names = chart.real.coords
        compat.add_comparison(f"alpha(d{names[p]}, J d{names[q]}) = alpha(J d{names[p]}, d{names[q]})",
                              eq_check(lhs, rhs, sampler))
    for p in range(N):
        compat.add_comparison(f"alpha(d{chart.real.coords[p]}, J same) = alpha(J same, same)",
                              eq_check(form_pair(alpha_R, basis[p], cols[p]),
                                       form_pair(alpha_R, cols[p], basis[p]), sampler))
    report.merge(compat, "(1) J-compatibility")
    closed = compare_fields(exterior_derivative(alpha_R), DifferentialForm(chart.real, 3), sampler)
    report.merge(closed, "(2) closed")
    if compat.verdict is Verdict.FAIL:
        return report, None
    im_comps = {}
    for p, q in combinations(range(N), 2):
        im_comps[(p, q)] = -form_pair(alpha_R, cols[p], basis[q])
    im = DifferentialForm(chart.real, 2, im_comps)
    n = chart.n
    zc = {}
    for a, b in combinations(range(n), 2):
        re_ab = alpha_R[(a, b)]
        im_ab = -form_pair(alpha_R, cols[a], basis[b])
        zc[(a, b)] = ComplexScalar(re_ab.real_part(), im_ab.real_part())
    holo = Report("z-components")
    for (a, b), cs in zc.items():
        if not cs.is_zero():
            holo.merge(cauchy_riemann_check(cs, chart.pairing, sampler), f"A_{a + 1}{b + 1}")
    report.merge(holo, "(3) holomorphic coefficients")
    return report, ComplexTwoForm(chart, alpha_R, im, zc)


# ---------------------------------------------------------------------------
# cotangent algebroids of holomorphic Poisson structures
# ---------------------------------------------------------------------------

def holomorphic_cotangent(pi: HolomorphicBivector, *, frame: Sequence[str] | None = None
                          ) -> HolomorphicAlgebroidChart:
    """Frame ``dz_a``; ``rho(dz_a) = sum_b phi_ab d/dz_b``; ``[dz_a, dz_b] = d phi_ab``."""
    C = pi.chart
    n = C.n
    anchor = [[pi.phi(a, b) for b in range(n)] for a in range(n)]
    structure = {}
    for (a, b), cs in pi.split.items():
        structure[(a, b)] = [holomorphic_derivative(cs, C.pairing, c) for c in range(n)]
    return HolomorphicAlgebroidChart(C, frame or [f"d{z}" for z in C.z], anchor, structure,
                                     name="holomorphic cotangent")


def real_frame_change(n: int, eps: int, jeps: int) -> list[list[ScalarExpr]]:
    """Constant frame change ``eps_a -> eps * dx_a``, ``j eps_a -> jeps * dy_a``."""
    P = [[ZERO] * (2 * n) for _ in range(2 * n)]
    for a in range(n):
        P[a][a] = as_expr(eps)
        P[n + a][n + a] = as_expr(jeps)
    return P


def check_cotangent_realification(pi: HolomorphicBivector, sampler: RandomPointConfig | None = None
                                  ) -> Report:
    """Real and imaginary algebroids of ``(T*X)_pi`` against ``(T*X)_{4 pi_R}``, ``(T*X)_{4 pi_I}``.

    The real frame ``(eps_a, j eps_a)`` is matched with ``(dx_a, -dy_a)`` for the
    real part and with ``(-dx_a, dy_a)`` for the imaginary part.
    """
    report = Report("real and imaginary cotangent algebroids")
    H = holomorphic_cotangent(pi)
    A_R, j = realify(H, sampler)
    A_I = deform(A_R, j, sampler, name="A_I")
    pair = decompose(pi, sampler)
    four = as_expr(4)
    n = pi.chart.n
    T_R = cotangent_algebroid(pair.pi_R.scale(four), sampler)
    T_I = cotangent_algebroid(pair.pi_I.scale(four), sampler)
    R_frame = change_frame(T_R, real_frame_change(n, 1, -1), A_R.frame)
    I_frame = change_frame(T_I, real_frame_change(n, -1, 1), A_I.frame)
    report.merge(compare_algebroids(A_R, R_frame, sampler), "A_R vs cotangent(4 pi_R)")
    report.merge(compare_algebroids(A_I, I_frame, sampler), "A_I vs cotangent(4 pi_I)")
    report.merge(morphism_check(j.matrix, ChartMap.identity(A_R.base), A_I, A_R, sampler),
                 "j: A_I -> A_R")
    return report


def _need_degree(P: Multivector, d: int) -> None:
    if P.degree != d:
        raise HolomorphicError(f"expected degree {d}, got {P.degree}")


__all__ = [
    "ComplexTwoForm", "DecomposedPair", "HolomorphicBivector", "HolomorphicError",
    "InvolutionVerdict", "bracket_table_check", "check_cotangent_realification", "check_pngc",
    "conjugation_involution", "decompose", "decompose_by_expansion", "dirac_reduce",
    "holomorphic_cotangent", "holomorphic_extension", "holomorphic_two_form", "involution_check",
    "sharp_matrix",
]
