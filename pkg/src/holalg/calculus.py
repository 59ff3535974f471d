"""Multivector fields, differential forms and (1,1)-tensors on a single chart.

Components are stored under strictly increasing 0-based index tuples.  The
contraction convention is ``P(dx_i1, ..., dx_ik) = P[(i1, ..., ik)]`` for
increasing indices, so ``d1 ^ d2`` has the single component ``{(0, 1): 1}``
and ``{x_i, x_j} = pi[(i, j)]`` for a bivector ``pi``.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .report import Report, Verdict
from .symbolic import (
    ONE,
    ZERO,
    Pairing,
    RandomPointConfig,
    ScalarExpr,
    as_expr,
    eq_check,
    evaluate,
    parse,
    var,
)

_IDENT = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


class ChartMismatchError(ValueError):
    pass


# ---------------------------------------------------------------------------
# charts
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Chart:
    name: str
    coords: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(self.coords))
        if len(set(self.coords)) != len(self.coords):
            raise ValueError(f"chart {self.name!r}: coordinate names must be distinct")
        for c in self.coords:
            if c in ("pi", "i", "exp", "sin", "cos") or not _IDENT.match(c):
                raise ValueError(f"chart {self.name!r}: invalid coordinate name {c!r}")
        if not self.coords:
            raise ValueError(f"chart {self.name!r}: dimension must be positive")

    @property
    def dim(self) -> int:
        return len(self.coords)

    @property
    def names(self) -> tuple[str, ...]:
        return self.coords

    def index(self, name: str) -> int:
        try:
            return self.coords.index(name)
        except ValueError:
            raise KeyError(f"{name!r} is not a coordinate of chart {self.name!r}") from None

    def var(self, i: int) -> ScalarExpr:
        return var(self.coords[i])

    def vars(self) -> list[ScalarExpr]:
        return [var(c) for c in self.coords]

    def parse(self, text: str) -> ScalarExpr:
        return parse(text, self.names)


@dataclass(frozen=True)
class ComplexChart:
    """Real chart ``(x_1..x_n, y_1..y_n)`` with aliases ``z_k = x_k + i y_k``."""

    name: str
    x: tuple[str, ...]
    y: tuple[str, ...]
    z: tuple[str, ...]
    real: Chart = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        for attr in ("x", "y", "z"):
            object.__setattr__(self, attr, tuple(getattr(self, attr)))
        if not (len(self.x) == len(self.y) == len(self.z)):
            raise ValueError("x, y and z name lists must have equal length")
        object.__setattr__(self, "real", Chart(self.name, self.x + self.y))
        if set(self.z) & set(self.real.coords):
            raise ValueError("complex coordinate names clash with real ones")

    @classmethod
    def standard(cls, n: int, name: str | None = None) -> "ComplexChart":
        r = range(1, n + 1)
        return cls(name or f"C{n}", tuple(f"x{k}" for k in r), tuple(f"y{k}" for k in r),
                   tuple(f"z{k}" for k in r))

    @classmethod
    def from_real(cls, chart: Chart, name: str | None = None) -> "ComplexChart":
        """Complexify ``chart``: ``x1 -> (y1, z1)``, other names ``u -> (y_u, z_u)``."""
        ys, zs = [], []
        for c in chart.coords:
            if c.startswith("x") and len(c) > 1:
                ys.append("y" + c[1:])
                zs.append("z" + c[1:])
            else:
                ys.append("y_" + c)
                zs.append("z_" + c)
        return cls(name or f"{chart.name}_C", chart.coords, tuple(ys), tuple(zs))

    @property
    def n(self) -> int:
        return len(self.z)

    @property
    def pairing(self) -> Pairing:
        return Pairing(self.z, self.x, self.y)

    @property
    def names(self) -> tuple[str, ...]:
        return self.real.coords + self.z

    def parse(self, text: str) -> ScalarExpr:
        return parse(text, self.names)

    def x_index(self, k: int) -> int:
        return k

    def y_index(self, k: int) -> int:
        return self.n + k

    @property
    def J(self) -> "OneOneTensor":
        """Standard complex structure: ``J d/dx_k = d/dy_k``, ``J d/dy_k = -d/dx_k``."""
        n = self.n
        m = [[ZERO] * (2 * n) for _ in range(2 * n)]
        for k in range(n):
            m[n + k][k] = ONE
            m[k][n + k] = -ONE
        return OneOneTensor(self.real, m)


# ---------------------------------------------------------------------------
# alternating index helpers
# ---------------------------------------------------------------------------

def sort_with_sign(idx: Sequence[int]) -> tuple[tuple[int, ...] | None, int]:
    """Sort ``idx``; returns ``(sorted, sign)`` or ``(None, 0)`` on repeats."""
    idx = list(idx)
    if len(set(idx)) != len(idx):
        return None, 0
    sign = 1
    # insertion sort counting transpositions
    for i in range(1, len(idx)):
        j = i
        while j > 0 and idx[j - 1] > idx[j]:
            idx[j - 1], idx[j] = idx[j], idx[j - 1]
            sign = -sign
            j -= 1
    return tuple(idx), sign


def parse_index(key, one_based: bool = True) -> tuple[int, ...]:
    """``"1,2"`` or ``(1, 2)`` -> 0-based tuple."""
    if isinstance(key, str):
        parts = [p for p in key.replace(" ", "").split(",") if p]
        key = tuple(int(p) for p in parts)
    key = tuple(int(k) for k in key)
    return tuple(k - 1 for k in key) if one_based else key


class _Alternating:
    """Shared storage for multivectors and forms."""

    __slots__ = ("chart", "degree", "components")
    kind = "alternating"

    def __init__(self, chart: Chart, degree: int,
                 components: Mapping | None = None, *, one_based: bool = False):
        if degree < 0:
            raise ValueError("degree must be non-negative")
        self.chart = chart
        self.degree = degree
        comps: dict[tuple[int, ...], ScalarExpr] = {}
        for key, value in (components or {}).items():
            idx = parse_index(key, one_based)
            if len(idx) != degree:
                raise ValueError(f"index {key!r} does not match degree {degree}")
            if any(i < 0 or i >= chart.dim for i in idx):
                raise IndexError(f"index {key!r} out of range for chart {chart.name!r}")
            val = chart.parse(value) if isinstance(value, str) else as_expr(value)
            skey, sign = sort_with_sign(idx)
            if skey is None or val.is_zero():
                continue
            val = val if sign > 0 else -val
            comps[skey] = comps[skey] + val if skey in comps else val
        if degree > chart.dim:
            comps = {}
        self.components = {k: v for k, v in comps.items() if not v.is_zero()}

    def _new(self, degree: int, comps: Mapping) -> "_Alternating":
        return type(self)(self.chart, degree, comps)

    def _check_same(self, other: "_Alternating") -> None:
        if type(self) is not type(other):
            raise TypeError(f"cannot combine {type(self).__name__} with {type(other).__name__}")
        if self.chart != other.chart:
            raise ChartMismatchError(f"chart mismatch: {self.chart.name} vs {other.chart.name}")

    def __getitem__(self, idx) -> ScalarExpr:
        if isinstance(idx, int):
            idx = (idx,)
        skey, sign = sort_with_sign(idx)
        if skey is None:
            return ZERO
        val = self.components.get(skey, ZERO)
        return val if sign > 0 else -val

    def is_zero(self) -> bool:
        return not self.components

    def __eq__(self, other) -> bool:
        if not isinstance(other, _Alternating):
            return NotImplemented
        return (type(self) is type(other) and self.chart == other.chart
                and self.degree == other.degree and self.components == other.components)

    __hash__ = None

    def __add__(self, other: "_Alternating") -> "_Alternating":
        self._check_same(other)
        if self.degree != other.degree:
            if self.is_zero():
                return other
            if other.is_zero():
                return self
            raise ValueError("cannot add fields of different degrees")
        comps = dict(self.components)
        for k, v in other.components.items():
            comps[k] = comps[k] + v if k in comps else v
        return self._new(self.degree, comps)

    def __neg__(self) -> "_Alternating":
        return self._new(self.degree, {k: -v for k, v in self.components.items()})

    def __sub__(self, other: "_Alternating") -> "_Alternating":
        return self + (-other)

    def scale(self, f) -> "_Alternating":
        f = as_expr(f)
        return self._new(self.degree, {k: f * v for k, v in self.components.items()})

    def __mul__(self, f) -> "_Alternating":
        return self.scale(f)

    __rmul__ = __mul__

    def map_components(self, fn: Callable[[ScalarExpr], ScalarExpr]) -> "_Alternating":
        return self._new(self.degree, {k: fn(v) for k, v in self.components.items()})

    def subs(self, mapping) -> "_Alternating":
        return self.map_components(lambda v: v.subs(mapping))

    def diff(self, name: str) -> "_Alternating":
        """Differentiate every component with respect to a coordinate."""
        return self.map_components(lambda v: v.diff(name))

    def wedge(self, other: "_Alternating") -> "_Alternating":
        self._check_same(other)
        comps: dict = {}
        for i1, a in self.components.items():
            for i2, b in other.components.items():
                key, sign = sort_with_sign(i1 + i2)
                if key is None:
                    continue
                term = a * b if sign > 0 else -(a * b)
                comps[key] = comps[key] + term if key in comps else term
        return self._new(self.degree + other.degree, comps)

    __xor__ = wedge

    def right_derivative(self, i: int) -> "_Alternating":
        """Remove ``i`` from the right end of each index (odd right derivative)."""
        comps = {}
        for idx, v in self.components.items():
            if i in idx:
                pos = idx.index(i)
                sign = -1 if (len(idx) - 1 - pos) % 2 else 1
                comps[idx[:pos] + idx[pos + 1:]] = v if sign > 0 else -v
        return self._new(max(self.degree - 1, 0), comps)

    def to_dict(self, one_based: bool = True) -> dict[str, str]:
        off = 1 if one_based else 0
        return {",".join(str(i + off) for i in k): str(v) for k, v in sorted(self.components.items())}

    def __repr__(self) -> str:
        body = ", ".join(f"{k}: {v}" for k, v in self.to_dict().items())
        return f"{type(self).__name__}({self.chart.name}, deg={self.degree}, {{{body}}})"


class Multivector(_Alternating):
    """Antisymmetric contravariant field; degree 0 is a function."""

    __slots__ = ()
    kind = "multivector"

    @classmethod
    def function(cls, chart: Chart, f) -> "Multivector":
        return cls(chart, 0, {(): as_expr(f) if not isinstance(f, str) else chart.parse(f)})

    @classmethod
    def vector(cls, chart: Chart, coeffs: Sequence) -> "Multivector":
        return cls(chart, 1, {(i,): c for i, c in enumerate(coeffs)})

    @classmethod
    def basis(cls, chart: Chart, *idx: int) -> "Multivector":
        """Coordinate multivector ``d_i1 ^ ... ^ d_ik`` (0-based)."""
        return cls(chart, len(idx), {tuple(idx): ONE})

    def vector_coeffs(self) -> list[ScalarExpr]:
        if self.degree != 1:
            raise ValueError("not a vector field")
        return [self[(i,)] for i in range(self.chart.dim)]

    def apply(self, f) -> ScalarExpr:
        """Directional derivative ``X(f)`` of a vector field."""
        f = as_expr(f)
        out = ZERO
        for (i,), c in self.components.items():
            out = out + c * f.diff(self.chart.coords[i])
        return out

    def function_value(self) -> ScalarExpr:
        if self.degree != 0:
            raise ValueError("not a function")
        return self.components.get((), ZERO)


class DifferentialForm(_Alternating):
    __slots__ = ()
    kind = "form"

    @classmethod
    def basis(cls, chart: Chart, *idx: int) -> "DifferentialForm":
        return cls(chart, len(idx), {tuple(idx): ONE})

    @classmethod
    def differential(cls, chart: Chart, f) -> "DifferentialForm":
        f = as_expr(f)
        return cls(chart, 1, {(i,): f.diff(c) for i, c in enumerate(chart.coords)})

    def evaluate_on(self, *vectors: Multivector) -> ScalarExpr:
        """``omega(X_1, ..., X_k)`` by the determinant formula."""
        if len(vectors) != self.degree:
            raise ValueError("wrong number of arguments")
        out = ZERO
        for idx, c in self.components.items():
            out = out + c * _det([[v[(i,)] for i in idx] for v in vectors])
        return out


def _det(m: list[list[ScalarExpr]]) -> ScalarExpr:
    n = len(m)
    if n == 0:
        return ONE
    if n == 1:
        return m[0][0]
    out = ZERO
    for j in range(n):
        if m[0][j].is_zero():
            continue
        minor = [row[:j] + row[j + 1:] for row in m[1:]]
        term = m[0][j] * _det(minor)
        out = out + term if j % 2 == 0 else out - term
    return out


def wedge(P: _Alternating, Q: _Alternating) -> _Alternating:
    return P.wedge(Q)


def add(P: _Alternating, Q: _Alternating) -> _Alternating:
    return P + Q


def compare_fields(A: _Alternating, B: _Alternating, sampler: RandomPointConfig | None = None,
                   title: str = "componentwise") -> Report:
    """Componentwise ``eq_check`` of two fields of the same kind."""
    A._check_same(B)
    report = Report(title)
    if A.degree != B.degree and not (A.is_zero() or B.is_zero()):
        report.add("degree", Verdict.FAIL, f"{A.degree} != {B.degree}")
        return report
    keys = sorted(set(A.components) | set(B.components))
    if not keys:
        report.add("both identically zero", Verdict.PASS)
    for k in keys:
        label = ",".join(str(i + 1) for i in k) or "()"
        report.add_comparison(f"[{label}]", eq_check(A[k], B[k], sampler))
    return report


# ---------------------------------------------------------------------------
# brackets
# ---------------------------------------------------------------------------

def schouten_bracket(P: Multivector, Q: Multivector) -> Multivector:
    """Schouten-Nijenhuis bracket.

    ``[P, Q] = sum_i dP/dtheta_i ^ dQ/dx_i - (-1)^((p-1)(q-1)) dQ/dtheta_i ^ dP/dx_i``
    with right derivatives in the odd variables.  On vector fields this is
    the Lie bracket, ``[X, f] = X(f)``, and for a bivector
    ``[pi, pi](df, dg, dh) = 2 * ({f,{g,h}} + cyclic)``.
    """
    P._check_same(Q)
    p, q = P.degree, Q.degree
    chart = P.chart
    deg = p + q - 1
    if deg < 0:
        return Multivector(chart, 0)
    sign = -1 if ((p - 1) * (q - 1)) % 2 else 1
    out = Multivector(chart, deg)
    for i, name in enumerate(chart.coords):
        if p > 0:
            out = out + P.right_derivative(i).wedge(Q.diff(name))
        if q > 0:
            t = Q.right_derivative(i).wedge(P.diff(name))
            out = out - t if sign > 0 else out + t
    return out if out.degree == deg else Multivector(chart, deg)


def lie_bracket(X: Multivector, Y: Multivector) -> Multivector:
    """``[X, Y]^k = X(Y^k) - Y(X^k)``, computed directly."""
    X._check_same(Y)
    chart = X.chart
    return Multivector.vector(chart, [X.apply(Y[(k,)]) - Y.apply(X[(k,)])
                                      for k in range(chart.dim)])


def poisson_bracket(pi: Multivector, f, g) -> ScalarExpr:
    """``{f, g} = pi(df, dg)``."""
    _require_degree(pi, 2)
    f, g = as_expr(f), as_expr(g)
    names = pi.chart.coords
    out = ZERO
    for (i, j), c in pi.components.items():
        term = f.diff(names[i]) * g.diff(names[j]) - f.diff(names[j]) * g.diff(names[i])
        if not term.is_zero():
            out = out + c * term
    return out


def sharp(pi: Multivector) -> list[list[ScalarExpr]]:
    """Matrix of ``pi^#``: ``pi^#(dx_i) = sum_j S[j][i] d_j`` with ``S[j][i] = pi^{ij}``."""
    _require_degree(pi, 2)
    n = pi.chart.dim
    return [[pi[(i, j)] for i in range(n)] for j in range(n)]


def hamiltonian_vf(pi: Multivector, f) -> Multivector:
    """``pi^#(df)``, the vector field ``g -> {f, g}``."""
    _require_degree(pi, 2)
    chart = pi.chart
    f = as_expr(f)
    coeffs = []
    for j in range(chart.dim):
        coeffs.append(sum((pi[(i, j)] * f.diff(chart.coords[i]) for i in range(chart.dim)), ZERO))
    return Multivector.vector(chart, coeffs)


def jacobiator(pi: Multivector, i: int, j: int, k: int) -> ScalarExpr:
    x = pi.chart.vars()
    out = ZERO
    for a, b, c in ((i, j, k), (j, k, i), (k, i, j)):
        out = out + poisson_bracket(pi, x[a], poisson_bracket(pi, x[b], x[c]))
    return out


def is_poisson(pi: Multivector, sampler: RandomPointConfig | None = None) -> Report:
    """Jacobi identity on all coordinate triples."""
    _require_degree(pi, 2)
    report = Report("is_poisson")
    names = pi.chart.coords
    for i, j, k in combinations(range(pi.chart.dim), 3):
        report.add_comparison(f"Jacobiator({names[i]},{names[j]},{names[k]}) = 0",
                              eq_check(jacobiator(pi, i, j, k), ZERO, sampler))
    return report


def _require_degree(P: _Alternating, d: int) -> None:
    if P.degree != d:
        raise ValueError(f"expected degree {d}, got {P.degree}")


# ---------------------------------------------------------------------------
# (1,1)-tensors and torsion
# ---------------------------------------------------------------------------

class OneOneTensor:
    """Endomorphism of the tangent bundle: ``N(d_l) = sum_k N[k][l] d_k``."""

    __slots__ = ("chart", "matrix")

    def __init__(self, chart: Chart, matrix: Sequence[Sequence]):
        n = chart.dim
        rows = [[chart.parse(v) if isinstance(v, str) else as_expr(v) for v in row] for row in matrix]
        if len(rows) != n or any(len(r) != n for r in rows):
            raise ValueError(f"(1,1)-tensor on {chart.name} must be {n}x{n}")
        self.chart = chart
        self.matrix = tuple(tuple(r) for r in rows)

    @classmethod
    def identity(cls, chart: Chart) -> "OneOneTensor":
        n = chart.dim
        return cls(chart, [[ONE if k == l else ZERO for l in range(n)] for k in range(n)])

    def __getitem__(self, kl) -> ScalarExpr:
        k, l = kl
        return self.matrix[k][l]

    def __eq__(self, other) -> bool:
        return isinstance(other, OneOneTensor) and self.chart == other.chart and self.matrix == other.matrix

    __hash__ = None

    def apply(self, X: Multivector) -> Multivector:
        coeffs = X.vector_coeffs()
        n = self.chart.dim
        return Multivector.vector(self.chart, [
            sum((self.matrix[k][l] * coeffs[l] for l in range(n) if not coeffs[l].is_zero()), ZERO)
            for k in range(n)])

    def column(self, l: int) -> Multivector:
        return Multivector.vector(self.chart, [self.matrix[k][l] for k in range(self.chart.dim)])

    def compose(self, other: "OneOneTensor") -> "OneOneTensor":
        return OneOneTensor(self.chart, matmul(self.matrix, other.matrix))

    def transpose(self) -> list[list[ScalarExpr]]:
        n = self.chart.dim
        return [[self.matrix[l][k] for l in range(n)] for k in range(n)]

    def is_constant(self) -> bool:
        return all(v.is_constant() for row in self.matrix for v in row)


def matmul(a: Sequence[Sequence[ScalarExpr]], b: Sequence[Sequence[ScalarExpr]]) -> list[list[ScalarExpr]]:
    inner = len(b)
    cols = len(b[0]) if b else 0
    out = []
    for row in a:
        out.append([sum((row[t] * b[t][c] for t in range(inner)
                         if not row[t].is_zero() and not b[t][c].is_zero()), ZERO)
                    for c in range(cols)])
    return out


def compare_matrices(A, B, sampler: RandomPointConfig | None = None, title: str = "matrix") -> Report:
    report = Report(title)
    for r, (ra, rb) in enumerate(zip(A, B)):
        for c, (a, b) in enumerate(zip(ra, rb)):
            report.add_comparison(f"[{r + 1},{c + 1}]", eq_check(a, b, sampler))
    return report


def is_almost_complex(N: OneOneTensor, sampler: RandomPointConfig | None = None) -> Report:
    """``N^2 = -1`` entrywise."""
    sq = N.compose(N).matrix
    minus_id = OneOneTensor.identity(N.chart).matrix
    return compare_matrices(sq, [[-v for v in row] for row in minus_id], sampler, "square = -identity")


@dataclass
class Torsion:
    """(2,1)-tensor stored as ``(i, j) -> vector`` for ``i < j``."""

    chart: Chart
    components: dict[tuple[int, int], tuple[ScalarExpr, ...]]

    def __getitem__(self, ij) -> tuple[ScalarExpr, ...]:
        i, j = ij
        if i == j:
            return tuple(ZERO for _ in range(self.chart.dim))
        if i < j:
            return self.components[(i, j)]
        return tuple(-v for v in self.components[(j, i)])

    def is_zero(self) -> bool:
        return all(v.is_zero() for vec in self.components.values() for v in vec)

    def vector(self, i: int, j: int) -> Multivector:
        return Multivector.vector(self.chart, self[(i, j)])


def nijenhuis_torsion(N: OneOneTensor) -> Torsion:
    """Component formula for the Nijenhuis torsion on coordinate fields.

    ``T^k_ij = N^l_i d_l N^k_j - N^l_j d_l N^k_i - N^k_l (d_i N^l_j - d_j N^l_i)``.
    """
    chart = N.chart
    n = chart.dim
    c = chart.coords
    M = N.matrix
    comps = {}
    for i, j in combinations(range(n), 2):
        vec = []
        for k in range(n):
            t = ZERO
            for l in range(n):
                if not M[l][i].is_zero():
                    t = t + M[l][i] * M[k][j].diff(c[l])
                if not M[l][j].is_zero():
                    t = t - M[l][j] * M[k][i].diff(c[l])
                if not M[k][l].is_zero():
                    t = t - M[k][l] * (M[l][j].diff(c[i]) - M[l][i].diff(c[j]))
            vec.append(t)
        comps[(i, j)] = tuple(vec)
    return Torsion(chart, comps)


def torsion_of(N: OneOneTensor, V: Multivector, W: Multivector) -> Multivector:
    """``[NV, NW] - N([NV, W] + [V, NW] - N[V, W])`` with vector-field brackets."""
    NV, NW = N.apply(V), N.apply(W)
    inner = lie_bracket(NV, W) + lie_bracket(V, NW) - N.apply(lie_bracket(V, W))
    return lie_bracket(NV, NW) - N.apply(inner)


def nijenhuis_torsion_direct(N: OneOneTensor) -> Torsion:
    """Torsion by evaluating the defining formula on coordinate fields."""
    chart = N.chart
    comps = {}
    for i, j in combinations(range(chart.dim), 2):
        T = torsion_of(N, Multivector.basis(chart, i), Multivector.basis(chart, j))
        comps[(i, j)] = tuple(T.vector_coeffs())
    return Torsion(chart, comps)


def compare_torsions(A: Torsion, B: Torsion, sampler: RandomPointConfig | None = None) -> Report:
    report = Report("torsion")
    for key in sorted(set(A.components) | set(B.components)):
        for k, (a, b) in enumerate(zip(A[key], B[key])):
            report.add_comparison(f"T^{k + 1}_{key[0] + 1}{key[1] + 1}", eq_check(a, b, sampler))
    return report


# ---------------------------------------------------------------------------
# exterior calculus and maps
# ---------------------------------------------------------------------------

def exterior_derivative(omega: DifferentialForm) -> DifferentialForm:
    chart = omega.chart
    comps: dict = {}
    for idx, c in omega.components.items():
        for k, name in enumerate(chart.coords):
            if k in idx:
                continue
            dc = c.diff(name)
            if dc.is_zero():
                continue
            key, sign = sort_with_sign((k,) + idx)
            term = dc if sign > 0 else -dc
            comps[key] = comps[key] + term if key in comps else term
    return DifferentialForm(chart, omega.degree + 1, comps)


class ChartMap:
    """Smooth map between charts given by component expressions.

    ``components[a]`` is the ``a``-th target coordinate as a function of the
    source coordinates; ``inverse[i]`` (optional) is the ``i``-th source
    coordinate as a function of the target coordinates.
    """

    __slots__ = ("source", "target", "components", "inverse")

    def __init__(self, source: Chart, target: Chart, components: Sequence,
                 inverse: Sequence | None = None):
        if len(components) != target.dim:
            raise ValueError("map needs one component per target coordinate")
        self.source = source
        self.target = target
        self.components = tuple(source.parse(c) if isinstance(c, str) else as_expr(c)
                                for c in components)
        if inverse is not None:
            if len(inverse) != source.dim:
                raise ValueError("inverse needs one component per source coordinate")
            inverse = tuple(target.parse(c) if isinstance(c, str) else as_expr(c) for c in inverse)
        self.inverse = inverse

    @classmethod
    def identity(cls, chart: Chart) -> "ChartMap":
        return cls(chart, chart, chart.vars(), chart.vars())

    def substitution(self) -> dict[str, ScalarExpr]:
        """Target names -> expressions in source names."""
        return dict(zip(self.target.coords, self.components))

    def inverse_substitution(self) -> dict[str, ScalarExpr]:
        if self.inverse is None:
            raise ValueError("map has no explicit inverse")
        return dict(zip(self.source.coords, self.inverse))

    def jacobian(self) -> list[list[ScalarExpr]]:
        """``D[a][i] = d F^a / d x_i``."""
        return [[F.diff(x) for x in self.source.coords] for F in self.components]

    def compose(self, inner: "ChartMap") -> "ChartMap":
        """``self o inner``."""
        if inner.target != self.source:
            raise ChartMismatchError("composition charts do not match")
        sub = inner.substitution()
        comps = [F.subs(sub) for F in self.components]
        inv = None
        if self.inverse is not None and inner.inverse is not None:
            outer_inv = self.inverse_substitution()
            inv = [G.subs(outer_inv) for G in inner.inverse]
        return ChartMap(inner.source, self.target, comps, inv)

    def check_inverse(self, sampler: RandomPointConfig | None = None) -> Report:
        report = Report("inverse")
        if self.inverse is None:
            report.add("inverse supplied", Verdict.FAIL, "no inverse")
            return report
        fwd = self.substitution()
        for name, G in zip(self.source.coords, self.inverse):
            report.add_comparison(f"G(F(x)).{name}", eq_check(G.subs(fwd), var(name), sampler))
        back = self.inverse_substitution()
        for name, F in zip(self.target.coords, self.components):
            report.add_comparison(f"F(G(y)).{name}", eq_check(F.subs(back), var(name), sampler))
        return report


def pullback(omega: DifferentialForm, m: ChartMap) -> DifferentialForm:
    if omega.chart != m.target:
        raise ChartMismatchError("form does not live on the map's target chart")
    sub = m.substitution()
    dF = [DifferentialForm.differential(m.source, F) for F in m.components]
    out = DifferentialForm(m.source, omega.degree)
    for idx, c in omega.components.items():
        term = DifferentialForm(m.source, 0, {(): c.subs(sub)})
        for a in idx:
            term = term.wedge(dF[a])
        out = out + term
    return out


def pushforward(P: Multivector, m: ChartMap) -> Multivector:
    """Push a multivector forward along a map with explicit inverse."""
    if P.chart != m.source:
        raise ChartMismatchError("multivector does not live on the map's source chart")
    if m.source.dim != m.target.dim:
        raise ChartMismatchError("pushforward needs equal chart dimensions")
    if m.inverse is None:
        raise ValueError("pushforward requires an explicit inverse")
    D = m.jacobian()
    images = [Multivector(m.target, 1, {(a,): D[a][i] for a in range(m.target.dim)})
              for i in range(m.source.dim)]
    out = Multivector(m.target, P.degree)
    for idx, c in P.components.items():
        term = Multivector(m.target, 0, {(): c})
        for i in idx:
            term = term.wedge(images[i])
        out = out + term
    return out.subs(m.inverse_substitution())


def tangent_field_of(chart: Chart, coeffs: Mapping[str, str | ScalarExpr]) -> Multivector:
    """Vector field from ``{coordinate: coefficient}``."""
    vec = [ZERO] * chart.dim
    for name, c in coeffs.items():
        vec[chart.index(name)] = chart.parse(c) if isinstance(c, str) else as_expr(c)
    return Multivector.vector(chart, vec)


def iter_nonzero(items: Iterable[ScalarExpr]) -> Iterable[tuple[int, ScalarExpr]]:
    return ((i, v) for i, v in enumerate(items) if not v.is_zero())


def torsion_numeric(N: OneOneTensor, point: Sequence[float], h: float = 1e-5):
    """Finite-difference evaluation of the torsion on coordinate fields at ``point``.

    Vector-field brackets are formed from central-difference Jacobians of the
    numerically evaluated columns of ``N``; returns ``{(i, j): ndarray}``.
    """
    chart = N.chart
    n = chart.dim
    names = chart.coords

    def mat(p) -> np.ndarray:
        pt = dict(zip(names, (float(v) for v in p)))
        return np.array([[complex(evaluate(N.matrix[k][l], pt)).real for l in range(n)]
                         for k in range(n)])

    p0 = np.asarray(point, dtype=float)
    M = mat(p0)
    dM = np.empty((n, n, n))  # dM[l] = d M / d x_l
    for l in range(n):
        e = np.zeros(n)
        e[l] = h
        dM[l] = (mat(p0 + e) - mat(p0 - e)) / (2 * h)

    def bracket(X, dX, Y, dY):
        # [X, Y]^k = X^l d_l Y^k - Y^l d_l X^k
        return np.einsum("l,lk->k", X, dY) - np.einsum("l,lk->k", Y, dX)

    out = {}
    for i, j in combinations(range(n), 2):
        X, Y = M[:, i], M[:, j]          # N d_i, N d_j
        dX, dY = dM[:, :, i], dM[:, :, j]
        zero = np.zeros((n, n))
        ei, ej = np.eye(n)[i], np.eye(n)[j]
        inner = bracket(X, dX, ej, zero) + bracket(ei, zero, Y, dY)
        out[(i, j)] = bracket(X, dX, Y, dY) - M @ inner
    return out


def torsion_oracle_report(N: OneOneTensor, n_points: int = 16, tol: float = 1e-6, seed: int = 0,
                          h: float = 1e-5) -> Report:
    """Compare the symbolic torsion with :func:`torsion_numeric` at random points."""
    rng = random.Random(seed)
    T = nijenhuis_torsion(N)
    report = Report("torsion vs finite differences")
    worst = 0.0
    for _ in range(n_points):
        p = [rng.uniform(-1.0, 1.0) for _ in range(N.chart.dim)]
        pt = dict(zip(N.chart.coords, p))
        num = torsion_numeric(N, p, h)
        for key, vec in T.components.items():
            sym = np.array([complex(evaluate(v, pt)).real for v in vec])
            worst = max(worst, float(np.max(np.abs(sym - num[key]))))
    report.add(f"max deviation over {n_points} points <= {tol:g}",
               Verdict.PASS if worst <= tol else Verdict.FAIL, f"max deviation {worst:.3g}")
    report.data["max_deviation"] = worst
    return report
