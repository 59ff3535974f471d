"""Real/imaginary splitting over paired coordinates and Cauchy-Riemann tests."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from ..report import Report
from .compare import RandomPointConfig, eq_check
from .expr import I_UNIT, ScalarExpr, SymbolicError, as_expr, var


@dataclass(frozen=True)
class Pairing:
    """Complex coordinates ``z_k = x_k + i y_k``."""

    z: tuple[str, ...]
    x: tuple[str, ...]
    y: tuple[str, ...]

    def __post_init__(self):
        if not (len(self.z) == len(self.x) == len(self.y)):
            raise ValueError("pairing lists must have equal length")

    @classmethod
    def of(cls, triples: Sequence[tuple[str, str, str]]) -> "Pairing":
        z, x, y = zip(*triples) if triples else ((), (), ())
        return cls(tuple(z), tuple(x), tuple(y))

    def __iter__(self):
        return iter(zip(self.z, self.x, self.y))

    def __len__(self) -> int:
        return len(self.z)

    @property
    def real_names(self) -> frozenset:
        return frozenset(self.x) | frozenset(self.y)

    def substitution(self) -> dict:
        return {z: var(x) + I_UNIT * var(y) for z, x, y in self}


@dataclass(frozen=True)
class ComplexScalar:
    """A complex-valued function ``re + i im`` with real ``re``, ``im``."""

    re: ScalarExpr
    im: ScalarExpr

    def __post_init__(self):
        if not (self.re.is_real() and self.im.is_real()):
            raise SymbolicError("ComplexScalar parts must be free of the imaginary unit")

    @classmethod
    def from_parts(cls, re, im=0) -> "ComplexScalar":
        return cls(as_expr(re), as_expr(im))

    def recombine(self) -> ScalarExpr:
        return self.re + I_UNIT * self.im

    def __add__(self, other: "ComplexScalar") -> "ComplexScalar":
        return ComplexScalar(self.re + other.re, self.im + other.im)

    def __sub__(self, other: "ComplexScalar") -> "ComplexScalar":
        return ComplexScalar(self.re - other.re, self.im - other.im)

    def __neg__(self) -> "ComplexScalar":
        return ComplexScalar(-self.re, -self.im)

    def __mul__(self, other) -> "ComplexScalar":
        if not isinstance(other, ComplexScalar):
            other = ComplexScalar.from_parts(other)
        return ComplexScalar(self.re * other.re - self.im * other.im,
                             self.re * other.im + self.im * other.re)

    __rmul__ = __mul__

    def conjugate(self) -> "ComplexScalar":
        return ComplexScalar(self.re, -self.im)

    def times_i(self) -> "ComplexScalar":
        return ComplexScalar(-self.im, self.re)

    def is_zero(self) -> bool:
        return self.re.is_zero() and self.im.is_zero()


def split_complex(e, pairing: Pairing) -> ComplexScalar:
    """Separate ``e`` into real and imaginary parts over real coordinates.

    Every ``z_k`` is replaced by ``x_k + i y_k``; ``x_k``/``y_k`` may also
    appear directly (non-holomorphic input).
    """
    e = as_expr(e)
    stray = e.free_symbols() - set(pairing.z) - pairing.real_names
    if stray:
        raise SymbolicError(f"unpaired coordinate(s): {', '.join(sorted(stray))}")
    full = e.subs(pairing.substitution())
    return ComplexScalar(full.real_part(), full.imag_part())


def holomorphic_derivative(f: ComplexScalar, pairing: Pairing, k: int) -> ComplexScalar:
    """``df/dz_k`` of a holomorphic function given in split form."""
    x = pairing.x[k]
    return ComplexScalar(f.re.diff(x), f.im.diff(x))


def cauchy_riemann_check(f: ComplexScalar, pairing: Pairing,
                         sampler: RandomPointConfig | None = None) -> Report:
    """Classical Cauchy-Riemann equations for every coordinate pair.

    A ``ProbablyEqual`` comparison shows up as an inconclusive item, never
    as a pass.
    """
    report = Report("cauchy_riemann")
    for z, x, y in pairing:
        report.add_comparison(f"d(re)/d{x} = d(im)/d{y}",
                              eq_check(f.re.diff(x), f.im.diff(y), sampler))
        report.add_comparison(f"d(re)/d{y} = -d(im)/d{x}",
                              eq_check(f.re.diff(y), -f.im.diff(x), sampler))
    return report
