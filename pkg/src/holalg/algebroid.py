"""Lie algebroids given by frame data on one chart.

An :class:`AlgebroidChart` over a base chart of dimension ``n`` has a frame
``e_1..e_r``, an anchor ``rho(e_a) = sum_mu anchor[a][mu] d_mu`` and
structure functions ``[e_a, e_b] = sum_c structure[(a, b)][c] e_c`` stored
for ``a < b``.  All indices are 0-based internally.
"""

from __future__ import annotations

import warnings
from itertools import combinations
from typing import Mapping, Sequence

from .calculus import (
    Chart,
    ChartMap,
    ComplexChart,
    DifferentialForm,
    Multivector,
    OneOneTensor,
    exterior_derivative,
    hamiltonian_vf,
    is_poisson,
    lie_bracket,
    parse_index,
)
from .report import Report, Verdict
from .symbolic import (
    ONE,
    ZERO,
    ComplexScalar,
    RandomPointConfig,
    ScalarExpr,
    as_expr,
    cauchy_riemann_check,
    eq_check,
    parse,
    split_complex,
)


class AlgebroidError(ValueError):
    pass


class NotClosedWarning(UserWarning):
    pass


def _expr(chart: Chart, v) -> ScalarExpr:
    return chart.parse(v) if isinstance(v, str) else as_expr(v)


class AlgebroidChart:
    __slots__ = ("name", "base", "frame", "anchor", "structure")

    def __init__(self, base: Chart, frame: Sequence[str], anchor: Sequence[Sequence],
                 structure: Mapping | None = None, *, name: str = "A", one_based: bool = False):
        r, n = len(frame), base.dim
        if len(set(frame)) != r:
            raise AlgebroidError("frame names must be distinct")
        if len(anchor) != r or any(len(col) != n for col in anchor):
            raise AlgebroidError(f"anchor must have {r} columns of length {n}")
        self.name = name
        self.base = base
        self.frame = tuple(frame)
        self.anchor = tuple(tuple(_expr(base, v) for v in col) for col in anchor)
        comps: dict[tuple[int, int], tuple[ScalarExpr, ...]] = {}
        for key, vec in (structure or {}).items():
            a, b = parse_index(key, one_based)
            if len(vec) != r:
                raise AlgebroidError(f"structure vector for {key!r} must have length {r}")
            if not (0 <= a < r and 0 <= b < r):
                raise AlgebroidError(f"structure index {key!r} out of range")
            if a == b:
                if any(not _expr(base, v).is_zero() for v in vec):
                    raise AlgebroidError("[e_a, e_a] must vanish")
                continue
            vals = tuple(_expr(base, v) for v in vec)
            if a > b:
                a, b, vals = b, a, tuple(-v for v in vals)
            if (a, b) in comps:
                vals = tuple(p + q for p, q in zip(comps[(a, b)], vals))
            comps[(a, b)] = vals
        self.structure = {k: v for k, v in comps.items() if any(not e.is_zero() for e in v)}

    @property
    def rank(self) -> int:
        return len(self.frame)

    def c(self, a: int, b: int) -> tuple[ScalarExpr, ...]:
        if a == b:
            return (ZERO,) * self.rank
        if a < b:
            return self.structure.get((a, b), (ZERO,) * self.rank)
        return tuple(-v for v in self.structure.get((b, a), (ZERO,) * self.rank))

    def anchor_field(self, a: int) -> Multivector:
        return Multivector.vector(self.base, self.anchor[a])

    def section(self, coeffs: Sequence) -> "Section":
        return Section(self, coeffs)

    def frame_section(self, a: int) -> "Section":
        return Section(self, [ONE if b == a else ZERO for b in range(self.rank)])

    def __eq__(self, other) -> bool:
        return (isinstance(other, AlgebroidChart) and self.base == other.base
                and self.frame == other.frame and self.anchor == other.anchor
                and self.structure == other.structure)

    __hash__ = None

    def __repr__(self) -> str:
        return f"AlgebroidChart({self.name!r}, base={self.base.name}, rank={self.rank})"


class Section:
    __slots__ = ("algebroid", "coeffs")

    def __init__(self, algebroid: AlgebroidChart, coeffs: Sequence):
        if len(coeffs) != algebroid.rank:
            raise AlgebroidError("section needs one coefficient per frame element")
        self.algebroid = algebroid
        self.coeffs = tuple(_expr(algebroid.base, c) for c in coeffs)

    def _same(self, other: "Section") -> None:
        if other.algebroid.rank != self.algebroid.rank or other.algebroid.base != self.algebroid.base:
            raise AlgebroidError("sections of different algebroids")

    def __add__(self, other: "Section") -> "Section":
        self._same(other)
        return Section(self.algebroid, [a + b for a, b in zip(self.coeffs, other.coeffs)])

    def __sub__(self, other: "Section") -> "Section":
        self._same(other)
        return Section(self.algebroid, [a - b for a, b in zip(self.coeffs, other.coeffs)])

    def __neg__(self) -> "Section":
        return Section(self.algebroid, [-a for a in self.coeffs])

    def scale(self, f) -> "Section":
        f = as_expr(f)
        return Section(self.algebroid, [f * a for a in self.coeffs])

    def __eq__(self, other) -> bool:
        return isinstance(other, Section) and self.coeffs == other.coeffs

    __hash__ = None

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coeffs)

    def anchor(self) -> Multivector:
        A = self.algebroid
        vec = [ZERO] * A.base.dim
        for a, s in enumerate(self.coeffs):
            if s.is_zero():
                continue
            for mu in range(A.base.dim):
                vec[mu] = vec[mu] + s * A.anchor[a][mu]
        return Multivector.vector(A.base, vec)

    def __repr__(self) -> str:
        terms = [f"({c})*{n}" for c, n in zip(self.coeffs, self.algebroid.frame) if not c.is_zero()]
        return "Section(" + (" + ".join(terms) or "0") + ")"


def section_bracket(A: AlgebroidChart, s: Section, t: Section) -> Section:
    """Extend frame brackets by the Leibniz rule.

    ``[s, t]^c = sum_ab s^a t^b c^c_ab + rho(s)(t^c) - rho(t)(s^c)``.
    """
    r = A.rank
    out = [ZERO] * r
    for (a, b), vec in A.structure.items():
        coef = s.coeffs[a] * t.coeffs[b] - s.coeffs[b] * t.coeffs[a]
        if coef.is_zero():
            continue
        for c in range(r):
            if not vec[c].is_zero():
                out[c] = out[c] + coef * vec[c]
    rs, rt = s.anchor(), t.anchor()
    for c in range(r):
        out[c] = out[c] + rs.apply(t.coeffs[c]) - rt.apply(s.coeffs[c])
    return Section(A, out)


def compare_sections(s: Section, t: Section, sampler: RandomPointConfig | None,
                     report: Report, label: str) -> None:
    names = s.algebroid.frame
    for a, (p, q) in enumerate(zip(s.coeffs, t.coeffs)):
        report.add_comparison(f"{label} [{names[a]}]", eq_check(p, q, sampler))


def compare_vectors(X: Multivector, Y: Multivector, sampler: RandomPointConfig | None,
                    report: Report, label: str) -> None:
    names = X.chart.coords
    for mu in range(X.chart.dim):
        report.add_comparison(f"{label} [d/d{names[mu]}]", eq_check(X[(mu,)], Y[(mu,)], sampler))


def check_axioms(A: AlgebroidChart, sampler: RandomPointConfig | None = None) -> Report:
    """Anchor is a bracket morphism on frame pairs; Jacobi on frame triples."""
    report = Report(f"algebroid axioms ({A.name})")
    f = A.frame
    for a, b in combinations(range(A.rank), 2):
        lhs = Section(A, A.c(a, b)).anchor()
        rhs = lie_bracket(A.anchor_field(a), A.anchor_field(b))
        compare_vectors(lhs, rhs, sampler, report, f"anchor[{f[a]},{f[b]}]")
    e = [A.frame_section(a) for a in range(A.rank)]
    for a, b, c in combinations(range(A.rank), 3):
        jac = (section_bracket(A, e[a], section_bracket(A, e[b], e[c]))
               + section_bracket(A, e[b], section_bracket(A, e[c], e[a]))
               + section_bracket(A, e[c], section_bracket(A, e[a], e[b])))
        compare_sections(jac, Section(A, [ZERO] * A.rank), sampler, report,
                         f"Jacobi({f[a]},{f[b]},{f[c]})")
    return report


def compare_algebroids(A: AlgebroidChart, B: AlgebroidChart,
                       sampler: RandomPointConfig | None = None, title: str = "algebroid data") -> Report:
    """Componentwise comparison of anchors and structure functions."""
    report = Report(title)
    if A.base != B.base or A.rank != B.rank:
        report.add("shape", Verdict.FAIL,
                   f"base {A.base.name}/{B.base.name}, rank {A.rank}/{B.rank}")
        return report
    for a in range(A.rank):
        compare_vectors(A.anchor_field(a), B.anchor_field(a), sampler, report, f"anchor {A.frame[a]}")
    for a, b in combinations(range(A.rank), 2):
        for c, (p, q) in enumerate(zip(A.c(a, b), B.c(a, b))):
            report.add_comparison(f"c^{c + 1}_{a + 1}{b + 1}", eq_check(p, q, sampler))
    return report


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------

def cotangent_algebroid(pi: Multivector, sampler: RandomPointConfig | None = None,
                        *, frame: Sequence[str] | None = None, check: bool = True) -> AlgebroidChart:
    """Cotangent algebroid of a Poisson bivector, frame ``dx_i``.

    Anchor ``rho(dx_i) = pi^#(dx_i)``; ``[dx_i, dx_j] = d pi^{ij}``.
    """
    chart = pi.chart
    if check:
        rep = is_poisson(pi, sampler)
        if rep.verdict is Verdict.FAIL:
            raise AlgebroidError("bivector is not Poisson:\n" + str(rep))
    n = chart.dim
    anchor = [hamiltonian_vf(pi, chart.var(i)).vector_coeffs() for i in range(n)]
    structure = {}
    for i, j in combinations(range(n), 2):
        structure[(i, j)] = [pi[(i, j)].diff(x) for x in chart.coords]
    frame = frame or [f"d{x}" for x in chart.coords]
    return AlgebroidChart(chart, frame, anchor, structure, name="cotangent")


def tangent_algebroid(chart: Chart) -> AlgebroidChart:
    n = chart.dim
    anchor = [[ONE if mu == a else ZERO for mu in range(n)] for a in range(n)]
    return AlgebroidChart(chart, [f"d_{x}" for x in chart.coords], anchor, name="tangent")


def central_extension(omegas: Sequence[DifferentialForm], *,
                      center: Sequence[str] | None = None, warn: bool = True) -> AlgebroidChart:
    """``TX + (X x R^m)`` with ``[d_i, d_j] = sum_a omega_a(d_i, d_j) t_a``."""
    if not omegas:
        raise AlgebroidError("need at least one 2-form")
    chart = omegas[0].chart
    n, m = chart.dim, len(omegas)
    for k, w in enumerate(omegas):
        if w.chart != chart or w.degree != 2:
            raise AlgebroidError("central extension needs 2-forms on one chart")
        if warn and not exterior_derivative(w).is_zero():
            warnings.warn(f"2-form #{k + 1} is not closed; Jacobi will fail", NotClosedWarning,
                          stacklevel=2)
    r = n + m
    anchor = [[ONE if mu == a else ZERO for mu in range(n)] for a in range(n)]
    anchor += [[ZERO] * n for _ in range(m)]
    structure = {}
    for i, j in combinations(range(n), 2):
        vec = [ZERO] * r
        for a, w in enumerate(omegas):
            vec[n + a] = w[(i, j)]
        structure[(i, j)] = vec
    center = list(center or [f"t{a + 1}" for a in range(m)])
    frame = [f"d_{x}" for x in chart.coords] + center
    return AlgebroidChart(chart, frame, anchor, structure, name="central extension")


def fiber_names(chart: Chart) -> list[str]:
    """Fresh velocity coordinate names ``v_<x>``, avoiding clashes."""
    taken = set(chart.coords)
    out = []
    for x in chart.coords:
        cand = f"v_{x}"
        while cand in taken:
            cand = "v" + cand
        taken.add(cand)
        out.append(cand)
    return out


def tangent_chart(chart: Chart) -> Chart:
    return Chart(f"T{chart.name}", chart.coords + tuple(fiber_names(chart)))


def _velocity_derivative(f: ScalarExpr, xs: Sequence[str], vs: Sequence[ScalarExpr]) -> ScalarExpr:
    out = ZERO
    for x, v in zip(xs, vs):
        d = f.diff(x)
        if not d.is_zero():
            out = out + v * d
    return out


def tangent_lift(A: AlgebroidChart) -> AlgebroidChart:
    """Tangent prolongation ``TA -> TX`` with frame ``E_a = T e_a``, ``F_a = S e_a``."""
    base = A.base
    n, r = base.dim, A.rank
    TB = tangent_chart(base)
    xs = base.coords
    vs = [TB.var(n + mu) for mu in range(n)]
    anchor = []
    for a in range(r):
        col = list(A.anchor[a]) + [_velocity_derivative(p, xs, vs) for p in A.anchor[a]]
        anchor.append(col)
    for a in range(r):
        anchor.append([ZERO] * n + list(A.anchor[a]))
    structure = {}
    for a in range(r):
        for b in range(r):
            cab = A.c(a, b)
            if all(v.is_zero() for v in cab):
                continue
            if a < b:
                structure[(a, b)] = list(cab) + [_velocity_derivative(v, xs, vs) for v in cab]
            structure[(a, r + b)] = [ZERO] * r + list(cab)
    frame = [f"T{e}" for e in A.frame] + [f"S{e}" for e in A.frame]
    return AlgebroidChart(TB, frame, anchor, structure, name=f"T({A.name})")


def direct_sum(A: AlgebroidChart, B: AlgebroidChart) -> AlgebroidChart:
    if A.base != B.base:
        raise AlgebroidError("direct sum needs a common base")
    ra, rb = A.rank, B.rank
    structure = {}
    for (a, b), v in A.structure.items():
        structure[(a, b)] = list(v) + [ZERO] * rb
    for (a, b), v in B.structure.items():
        structure[(ra + a, ra + b)] = [ZERO] * ra + list(v)
    frame = list(A.frame) + [n if n not in A.frame else n + "'" for n in B.frame]
    return AlgebroidChart(A.base, frame, list(A.anchor) + list(B.anchor), structure,
                          name=f"{A.name}+{B.name}")


# ---------------------------------------------------------------------------
# endomorphisms, torsion, deformation
# ---------------------------------------------------------------------------

class FiberwiseEndo:
    """``j(e_a) = sum_b matrix[b][a] e_b``."""

    __slots__ = ("matrix",)

    def __init__(self, matrix: Sequence[Sequence], chart: Chart | None = None):
        rows = [[(chart.parse(v) if chart else parse(v)) if isinstance(v, str) else as_expr(v)
                 for v in row] for row in matrix]
        r = len(rows)
        if any(len(row) != r for row in rows):
            raise AlgebroidError("endomorphism matrix must be square")
        self.matrix = tuple(tuple(row) for row in rows)

    @property
    def rank(self) -> int:
        return len(self.matrix)

    @classmethod
    def identity(cls, r: int) -> "FiberwiseEndo":
        return cls([[ONE if a == b else ZERO for a in range(r)] for b in range(r)])

    def apply(self, s: Section) -> Section:
        r = self.rank
        if s.algebroid.rank != r:
            raise AlgebroidError("rank mismatch")
        out = []
        for b in range(r):
            acc = ZERO
            for a in range(r):
                if not self.matrix[b][a].is_zero() and not s.coeffs[a].is_zero():
                    acc = acc + self.matrix[b][a] * s.coeffs[a]
            out.append(acc)
        return Section(s.algebroid, out)

    def compose(self, other: "FiberwiseEndo") -> "FiberwiseEndo":
        r = self.rank
        return FiberwiseEndo([[sum((self.matrix[b][k] * other.matrix[k][a] for k in range(r)), ZERO)
                               for a in range(r)] for b in range(r)])

    def is_complex_structure(self, sampler: RandomPointConfig | None = None) -> Report:
        sq = self.compose(self).matrix
        report = Report("j^2 = -1")
        for b in range(self.rank):
            for a in range(self.rank):
                target = -ONE if a == b else ZERO
                report.add_comparison(f"[{b + 1},{a + 1}]", eq_check(sq[b][a], target, sampler))
        return report

    def __eq__(self, other) -> bool:
        return isinstance(other, FiberwiseEndo) and self.matrix == other.matrix

    __hash__ = None


def torsion_on(A: AlgebroidChart, phi: FiberwiseEndo, V: Section, W: Section) -> Section:
    """``[phiV, phiW] - phi([phiV, W] + [V, phiW] - phi[V, W])``."""
    pV, pW = phi.apply(V), phi.apply(W)
    inner = section_bracket(A, pV, W) + section_bracket(A, V, pW) - phi.apply(section_bracket(A, V, W))
    return section_bracket(A, pV, pW) - phi.apply(inner)


def algebroid_torsion(A: AlgebroidChart, phi: FiberwiseEndo) -> dict[tuple[int, int], Section]:
    e = [A.frame_section(a) for a in range(A.rank)]
    return {(a, b): torsion_on(A, phi, e[a], e[b]) for a, b in combinations(range(A.rank), 2)}


def torsion_report(A: AlgebroidChart, phi: FiberwiseEndo,
                   sampler: RandomPointConfig | None = None) -> Report:
    report = Report("Nijenhuis torsion vanishes")
    zero = Section(A, [ZERO] * A.rank)
    for (a, b), s in algebroid_torsion(A, phi).items():
        compare_sections(s, zero, sampler, report, f"N({A.frame[a]},{A.frame[b]})")
    return report


def torsion_tensoriality(A: AlgebroidChart, phi: FiberwiseEndo, f,
                         sampler: RandomPointConfig | None = None) -> Report:
    """``N(f e_a, e_b) = f N(e_a, e_b) = N(e_a, f e_b)`` for all frame pairs."""
    f = _expr(A.base, f)
    report = Report("torsion is tensorial")
    e = [A.frame_section(a) for a in range(A.rank)]
    for a, b in combinations(range(A.rank), 2):
        base = torsion_on(A, phi, e[a], e[b]).scale(f)
        compare_sections(torsion_on(A, phi, e[a].scale(f), e[b]), base, sampler, report,
                         f"N(f{A.frame[a]},{A.frame[b]})")
        compare_sections(torsion_on(A, phi, e[a], e[b].scale(f)), base, sampler, report,
                         f"N({A.frame[a]},f{A.frame[b]})")
    return report


def deform(A: AlgebroidChart, j: FiberwiseEndo, sampler: RandomPointConfig | None = None,
           *, check: bool = True, name: str | None = None) -> AlgebroidChart:
    """Anchor ``rho o j`` and bracket ``[jV, W] + [V, jW] - j[V, W]``."""
    if j.rank != A.rank:
        raise AlgebroidError("rank mismatch")
    if check:
        rep = torsion_report(A, j, sampler)
        if rep.verdict is Verdict.FAIL:
            raise AlgebroidError("torsion of the endomorphism does not vanish:\n" + str(rep))
    e = [A.frame_section(a) for a in range(A.rank)]
    anchor = [j.apply(e[a]).anchor().vector_coeffs() for a in range(A.rank)]
    structure = {}
    for a, b in combinations(range(A.rank), 2):
        s = (section_bracket(A, j.apply(e[a]), e[b]) + section_bracket(A, e[a], j.apply(e[b]))
             - j.apply(section_bracket(A, e[a], e[b])))
        structure[(a, b)] = s.coeffs
    return AlgebroidChart(A.base, A.frame, anchor, structure, name=name or f"{A.name}_j")


def change_frame(A: AlgebroidChart, P: Sequence[Sequence], frame: Sequence[str] | None = None
                 ) -> AlgebroidChart:
    """Re-express ``A`` in the frame ``e'_a = sum_b P[b][a] e_b`` (``P`` constant)."""
    r = A.rank
    P = [[as_expr(v) for v in row] for row in P]
    if len(P) != r or any(len(row) != r for row in P):
        raise AlgebroidError("frame change must be square of size rank")
    if not all(v.is_constant() for row in P for v in row):
        raise AlgebroidError("frame change must be constant")
    Pinv = invert_constant_matrix(P)
    new = [Section(A, [P[b][a] for b in range(r)]) for a in range(r)]
    anchor = [s.anchor().vector_coeffs() for s in new]

    def to_new(s: Section) -> list[ScalarExpr]:
        return [sum((Pinv[a][b] * s.coeffs[b] for b in range(r) if not Pinv[a][b].is_zero()), ZERO)
                for a in range(r)]

    structure = {(a, b): to_new(section_bracket(A, new[a], new[b]))
                 for a, b in combinations(range(r), 2)}
    return AlgebroidChart(A.base, list(frame or [f"{n}'" for n in A.frame]), anchor, structure,
                          name=A.name)


def invert_constant_matrix(M: Sequence[Sequence[ScalarExpr]]) -> list[list[ScalarExpr]]:
    n = len(M)
    aug = [list(row) + [ONE if i == j else ZERO for j in range(n)] for i, row in enumerate(M)]
    for col in range(n):
        piv = next((r for r in range(col, n) if not aug[r][col].is_zero()), None)
        if piv is None:
            raise AlgebroidError("matrix is singular")
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = aug[col][col].inverse()
        aug[col] = [v * inv for v in aug[col]]
        for r in range(n):
            if r != col and not aug[r][col].is_zero():
                f = aug[r][col]
                aug[r] = [v - f * w for v, w in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


# ---------------------------------------------------------------------------
# holomorphic algebroids
# ---------------------------------------------------------------------------

class HolomorphicAlgebroidChart:
    """Complex frame data: ``rho(eps_a) = sum theta[a][mu] d/dz_mu``, structure ``gamma``."""

    __slots__ = ("chart", "frame", "anchor", "structure", "name")

    def __init__(self, chart: ComplexChart, frame: Sequence[str], anchor: Sequence[Sequence],
                 structure: Mapping | None = None, *, name: str = "H", one_based: bool = False):
        s, m = len(frame), chart.n
        if len(anchor) != s or any(len(col) != m for col in anchor):
            raise AlgebroidError(f"holomorphic anchor must have {s} columns of length {m}")
        self.chart = chart
        self.frame = tuple(frame)
        self.name = name
        self.anchor = tuple(tuple(self._cs(v) for v in col) for col in anchor)
        comps = {}
        for key, vec in (structure or {}).items():
            a, b = parse_index(key, one_based)
            if len(vec) != s or a == b:
                raise AlgebroidError(f"bad structure entry {key!r}")
            vals = tuple(self._cs(v) for v in vec)
            if a > b:
                a, b, vals = b, a, tuple(-v for v in vals)
            comps[(a, b)] = vals
        self.structure = comps

    def _cs(self, v) -> ComplexScalar:
        if isinstance(v, ComplexScalar):
            return v
        return split_complex(_expr_c(self.chart, v), self.chart.pairing)

    @property
    def rank(self) -> int:
        return len(self.frame)

    def gamma(self, a: int, b: int) -> tuple[ComplexScalar, ...]:
        zero = ComplexScalar(ZERO, ZERO)
        if a == b:
            return (zero,) * self.rank
        if a < b:
            return self.structure.get((a, b), (zero,) * self.rank)
        return tuple(-v for v in self.structure.get((b, a), (zero,) * self.rank))

    def cr_report(self, sampler: RandomPointConfig | None = None) -> Report:
        report = Report("holomorphic data satisfies Cauchy-Riemann")
        p = self.chart.pairing
        for a, col in enumerate(self.anchor):
            for mu, th in enumerate(col):
                report.merge(cauchy_riemann_check(th, p, sampler), f"theta[{self.frame[a]}][{mu + 1}]")
        for (a, b), vec in self.structure.items():
            for c, g in enumerate(vec):
                report.merge(cauchy_riemann_check(g, p, sampler),
                             f"gamma^{c + 1}_{a + 1}{b + 1}")
        return report


def _expr_c(chart: ComplexChart, v) -> ScalarExpr:
    return chart.parse(v) if isinstance(v, str) else as_expr(v)


def realify_j(s: int) -> FiberwiseEndo:
    """``j(eps_a) = j eps_a``, ``j(j eps_a) = -eps_a`` on the frame ``(eps, j eps)``."""
    m = [[ZERO] * (2 * s) for _ in range(2 * s)]
    for a in range(s):
        m[s + a][a] = ONE
        m[a][s + a] = -ONE
    return FiberwiseEndo(m)


def realify(H: HolomorphicAlgebroidChart, sampler: RandomPointConfig | None = None,
            *, check: bool = True) -> tuple[AlgebroidChart, FiberwiseEndo]:
    """Underlying real algebroid on the frame ``(eps_1.., j eps_1..)`` and its ``j``."""
    if check:
        rep = H.cr_report(sampler)
        if rep.verdict is Verdict.FAIL:
            raise AlgebroidError("holomorphic data fails Cauchy-Riemann:\n" + str(rep))
    s = H.rank
    base = H.chart.real
    anchor = []
    for a in range(s):
        anchor.append([t.re for t in H.anchor[a]] + [t.im for t in H.anchor[a]])
    for a in range(s):
        anchor.append([-t.im for t in H.anchor[a]] + [t.re for t in H.anchor[a]])

    def bracket(p: int, q: int) -> list[ScalarExpr]:
        # complex bracket of eps-or-j-eps frame elements, written in the real frame
        a, ja = p % s, p >= s
        b, jb = q % s, q >= s
        g = H.gamma(a, b)
        if ja and jb:
            g = tuple(-v for v in g)
        elif ja or jb:
            g = tuple(v.times_i() for v in g)
        return [v.re for v in g] + [v.im for v in g]

    structure = {(p, q): bracket(p, q) for p, q in combinations(range(2 * s), 2)}
    frame = list(H.frame) + [f"j{e}" for e in H.frame]
    A = AlgebroidChart(base, frame, anchor, structure, name=f"{H.name}_R")
    return A, realify_j(s)


# ---------------------------------------------------------------------------
# morphisms
# ---------------------------------------------------------------------------

def morphism_check(F: Sequence[Sequence], base_map: ChartMap, A: AlgebroidChart,
                   B: AlgebroidChart, sampler: RandomPointConfig | None = None) -> Report:
    """Check that ``e_a -> sum_b F[b][a] e'_b`` over ``base_map`` is an algebroid morphism.

    Anchor: ``sum_b F[b][a] rho'_b(phi(x)) = D phi(x) rho_a(x)``.  Brackets are
    compared on the pushed-forward frame sections in target coordinates.
    """
    report = Report("algebroid morphism")
    if base_map.source != A.base or base_map.target != B.base:
        raise AlgebroidError("base map charts do not match the algebroids")
    if base_map.inverse is None:
        raise AlgebroidError("morphism_check needs a base map with explicit inverse")
    F = [[_expr(A.base, v) for v in row] for row in F]
    if len(F) != B.rank or any(len(row) != A.rank for row in F):
        raise AlgebroidError(f"bundle map must be {B.rank}x{A.rank}")
    fwd = base_map.substitution()
    D = base_map.jacobian()
    n_src, n_tgt = A.base.dim, B.base.dim
    for a in range(A.rank):
        for nu in range(n_tgt):
            lhs = sum((F[b][a] * B.anchor[b][nu].subs(fwd) for b in range(B.rank)
                       if not F[b][a].is_zero()), ZERO)
            rhs = sum((D[nu][mu] * A.anchor[a][mu] for mu in range(n_src)), ZERO)
            report.add_comparison(f"anchor {A.frame[a]} [d/d{B.base.coords[nu]}]",
                                  eq_check(lhs, rhs, sampler))
    back = base_map.inverse_substitution()
    pushed = [Section(B, [F[b][a].subs(back) for b in range(B.rank)]) for a in range(A.rank)]
    for a, b in combinations(range(A.rank), 2):
        lhs = section_bracket(B, pushed[a], pushed[b])
        rhs = Section(B, [ZERO] * B.rank)
        for c, coef in enumerate(A.c(a, b)):
            if not coef.is_zero():
                rhs = rhs + pushed[c].scale(coef.subs(back))
        compare_sections(lhs, rhs, sampler, report, f"bracket[{A.frame[a]},{A.frame[b]}]")
    return report


def check_infinitesimal_multiplicative(A: AlgebroidChart, j: FiberwiseEndo, J_base: OneOneTensor,
                                       sampler: RandomPointConfig | None = None) -> Report:
    """Holomorphy test through the tangent lift.

    Builds ``TA`` and the bundle map ``E_a -> E_a``, ``F_a -> j F_a`` covering
    ``(x, v) -> (x, J v)``, then runs :func:`morphism_check` on ``TA -> TA``.
    """
    report = Report("infinitesimal multiplicativity")
    if J_base.chart != A.base:
        raise AlgebroidError("complex structure lives on a different chart")
    report.merge(_square_minus_one(J_base.matrix, sampler), "J_base^2 = -1")
    report.merge(j.is_complex_structure(sampler), "j^2 = -1")
    if report.verdict is Verdict.FAIL:
        return report
    TA = tangent_lift(A)
    n, r = A.base.dim, A.rank
    xs = [TA.base.var(mu) for mu in range(n)]
    vs = [TA.base.var(n + mu) for mu in range(n)]
    Jm = J_base.matrix
    comps = xs + [sum((Jm[k][l] * vs[l] for l in range(n)), ZERO) for k in range(n)]
    inv = xs + [sum((-Jm[k][l] * vs[l] for l in range(n)), ZERO) for k in range(n)]
    phi = ChartMap(TA.base, TA.base, comps, inv)
    Fm = [[ZERO] * (2 * r) for _ in range(2 * r)]
    for a in range(r):
        Fm[a][a] = ONE
        for b in range(r):
            Fm[r + b][r + a] = j.matrix[b][a]
    report.merge(morphism_check(Fm, phi, TA, TA, sampler), "lift morphism")
    return report


def _square_minus_one(M, sampler) -> Report:
    n = len(M)
    report = Report("square")
    for k in range(n):
        for l in range(n):
            v = sum((M[k][t] * M[t][l] for t in range(n)), ZERO)
            report.add_comparison(f"[{k + 1},{l + 1}]", eq_check(v, -ONE if k == l else ZERO, sampler))
    return report
