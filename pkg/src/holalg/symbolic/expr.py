"""Exact scalar expressions in canonical normal form.

An expression is a finite sum of monomials with Gaussian-rational
coefficients.  A monomial is a product of powers of atoms:

* coordinates (non-negative integer powers),
* the constant ``pi`` (any integer power),
* ``exp(P)``, ``sin(P)`` and ``cos(P)`` where ``P`` is a real polynomial
  in coordinates and ``pi``.

The representation is kept canonical by construction:

* at most one ``exp`` atom per monomial, ``exp(P)*exp(Q) -> exp(P+Q)``,
  ``exp(0) -> 1``;
* ``cos(P)**2 -> 1 - sin(P)**2``, so ``cos`` appears with exponent <= 1;
* ``sin``/``cos`` arguments carry a canonical sign
  (``sin(-P) -> -sin(P)``, ``cos(-P) -> cos(P)``);
* arguments with a nonzero imaginary part are rewritten through
  ``exp(P + iQ) = exp(P) (cos Q + i sin Q)``.

Two expressions with the same normal form compare equal with ``==``.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Iterable, Mapping, Union

import numpy as np
from gmpy2 import mpq

# atom kinds; the integer order fixes the canonical atom order
VAR, PI, EXP, SIN, COS = 0, 1, 2, 3, 4
_FUNC_NAMES = {EXP: "exp", SIN: "sin", COS: "cos"}

_Q0 = mpq(0)
_Q1 = mpq(1)
_C0 = (_Q0, _Q0)
_C1 = (_Q1, _Q0)

Number = Union[int, "mpq", complex]


class SymbolicError(ValueError):
    """Raised when an operation leaves the supported expression fragment."""


class UnboundVariableError(KeyError):
    """Raised by numeric evaluation when a coordinate has no value."""


def _cmul(a, b):
    return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])


def _to_coeff(value) -> tuple:
    if isinstance(value, tuple):
        return (mpq(value[0]), mpq(value[1]))
    if isinstance(value, complex):
        raise SymbolicError("floating constants are not allowed in symbolic trees")
    if isinstance(value, float):
        raise SymbolicError("floating constants are not allowed in symbolic trees")
    return (mpq(value), _Q0)


def _mono_merge(m1: tuple, m2: tuple) -> dict:
    powers = dict(m1)
    for atom, e in m2:
        powers[atom] = powers.get(atom, 0) + e
    return powers


@lru_cache(maxsize=200_000)
def _mono_mul(m1: tuple, m2: tuple) -> tuple:
    """Multiply two monomials; returns ``((mono, coeff), ...)``."""
    if not m1:
        return ((m2, _C1),)
    if not m2:
        return ((m1, _C1),)
    return _normalize_powers(_mono_merge(m1, m2))


def _normalize_powers(powers: dict) -> tuple:
    exp_arg = None
    cos_atoms = []
    out = {}
    for atom, e in powers.items():
        if e == 0:
            continue
        kind = atom[0]
        if kind == EXP:
            arg = ScalarExpr._from_key(atom[1]) * e
            exp_arg = arg if exp_arg is None else exp_arg + arg
        elif kind == COS and e >= 2:
            cos_atoms.append((atom, e))
        else:
            out[atom] = e
    if exp_arg is not None and not exp_arg.is_zero():
        out[(EXP, exp_arg.key)] = 1
    results = [(out, _C1)]
    for atom, e in cos_atoms:
        sin_atom = (SIN, atom[1])
        half, odd = divmod(e, 2)
        expanded = []
        # cos^(2h) = (1 - sin^2)^h = sum_k C(h,k) (-1)^k sin^(2k)
        for base, coeff in results:
            for k in range(half + 1):
                c = mpq(math.comb(half, k) * (-1) ** k)
                new = dict(base)
                if odd:
                    new[atom] = 1
                if k:
                    new[sin_atom] = new.get(sin_atom, 0) + 2 * k
                expanded.append((new, _cmul(coeff, (c, _Q0))))
        results = expanded
    return tuple((tuple(sorted(p.items())), c) for p, c in results)


class ScalarExpr:
    """Immutable exact expression kept in canonical normal form.

    Instances are built through the module-level constructors
    (:func:`const`, :func:`var`, :data:`PI_EXPR`, :func:`exp`, :func:`sin`,
    :func:`cos`), arithmetic operators, or :func:`holalg.symbolic.parse`.
    """

    __slots__ = ("_terms", "_key", "_hash")

    def __init__(self, terms: Mapping[tuple, tuple] | None = None):
        self._terms = {m: c for m, c in (terms or {}).items() if c[0] or c[1]}
        self._key = None
        self._hash = None

    # ---- construction helpers -------------------------------------------------
    @classmethod
    def _from_key(cls, key: tuple) -> "ScalarExpr":
        return _from_key_cached(key)

    @property
    def key(self) -> tuple:
        """Sorted tuple of ``(monomial, coefficient)`` pairs; total order."""
        if self._key is None:
            self._key = tuple(sorted(self._terms.items()))
        return self._key

    @property
    def terms(self) -> Mapping[tuple, tuple]:
        return self._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self.key)
        return self._hash

    def __eq__(self, other) -> bool:
        if not isinstance(other, ScalarExpr):
            try:
                other = as_expr(other)
            except (SymbolicError, TypeError):
                return NotImplemented
        return self._terms == other._terms

    def __repr__(self) -> str:
        return f"ScalarExpr({to_string(self)!r})"

    def __str__(self) -> str:
        return to_string(self)

    # ---- predicates ----------------------------------------------------------------
    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(not m for m in self._terms)

    def constant_value(self) -> tuple:
        """Return ``(re, im)`` of a constant expression."""
        if not self.is_constant():
            raise SymbolicError(f"{self} is not constant")
        return self._terms.get((), _C0)

    def is_real(self) -> bool:
        """True when no coefficient carries the formal imaginary unit."""
        return all(not c[1] for c in self._terms.values())

    def is_polynomial(self) -> bool:
        """Polynomial in coordinates and ``pi`` with non-negative powers."""
        return all(atom[0] in (VAR, PI) and e > 0 for m in self._terms for atom, e in m)

    def free_symbols(self) -> frozenset:
        names = set()
        for m in self._terms:
            for atom, _ in m:
                if atom[0] == VAR:
                    names.add(atom[1])
                elif atom[0] >= EXP:
                    names |= _from_key_cached(atom[1]).free_symbols()
        return frozenset(names)

    # ---- arithmetic --------------------------------------------------------------------
    def __add__(self, other) -> "ScalarExpr":
        other = as_expr(other)
        if not other._terms:
            return self
        if not self._terms:
            return other
        terms = dict(self._terms)
        for m, c in other._terms.items():
            old = terms.get(m)
            terms[m] = c if old is None else (old[0] + c[0], old[1] + c[1])
        return ScalarExpr(terms)

    __radd__ = __add__

    def __neg__(self) -> "ScalarExpr":
        return ScalarExpr({m: (-c[0], -c[1]) for m, c in self._terms.items()})

    def __sub__(self, other) -> "ScalarExpr":
        return self + (-as_expr(other))

    def __rsub__(self, other) -> "ScalarExpr":
        return as_expr(other) + (-self)

    def __mul__(self, other) -> "ScalarExpr":
        other = as_expr(other)
        if not self._terms or not other._terms:
            return ZERO
        if other.is_constant():
            c = other._terms[()]
            return ScalarExpr({m: _cmul(v, c) for m, v in self._terms.items()})
        if self.is_constant():
            c = self._terms[()]
            return ScalarExpr({m: _cmul(c, v) for m, v in other._terms.items()})
        terms: dict = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                c12 = _cmul(c1, c2)
                for m, c in _mono_mul(m1, m2):
                    cc = _cmul(c12, c) if c != _C1 else c12
                    old = terms.get(m)
                    terms[m] = cc if old is None else (old[0] + cc[0], old[1] + cc[1])
        return ScalarExpr(terms)

    __rmul__ = __mul__

    def inverse(self) -> "ScalarExpr":
        """Multiplicative inverse; only for ``c * pi^k * exp(P)`` monomials."""
        if len(self._terms) != 1:
            raise SymbolicError(f"division by non-constant expression {self}")
        (m, c), = self._terms.items()
        if any(atom[0] not in (PI, EXP) for atom, _ in m):
            raise SymbolicError(f"division by non-constant expression {self}")
        norm = c[0] * c[0] + c[1] * c[1]
        inv_c = (c[0] / norm, -c[1] / norm)
        powers = {atom: -e for atom, e in m}
        out: dict = {}
        for mono, cc in _normalize_powers(powers):
            out[mono] = _cmul(inv_c, cc)
        return ScalarExpr(out)

    def __truediv__(self, other) -> "ScalarExpr":
        other = as_expr(other)
        if other.is_zero():
            raise ZeroDivisionError("division by zero expression")
        return self * other.inverse()

    def __rtruediv__(self, other) -> "ScalarExpr":
        return as_expr(other) / self

    def __pow__(self, n: int) -> "ScalarExpr":
        if not isinstance(n, (int, np.integer)):
            raise SymbolicError("only integer powers are supported")
        n = int(n)
        if n < 0:
            return self.inverse() ** (-n)
        result = ONE
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    # ---- complex parts -----------------------------------------------------------------
    def real_part(self) -> "ScalarExpr":
        """Coefficientwise real part; meaningful when all symbols are real."""
        return ScalarExpr({m: (c[0], _Q0) for m, c in self._terms.items()})

    def imag_part(self) -> "ScalarExpr":
        return ScalarExpr({m: (c[1], _Q0) for m, c in self._terms.items()})

    def conjugate(self) -> "ScalarExpr":
        return ScalarExpr({m: (c[0], -c[1]) for m, c in self._terms.items()})

    # ---- calculus ----------------------------------------------------------------------
    def diff(self, name: str) -> "ScalarExpr":
        """Partial derivative with respect to the coordinate ``name``."""
        out = ZERO
        for m, c in self._terms.items():
            d = _mono_diff(m, name)
            if not d.is_zero():
                out = out + d * ScalarExpr({(): c})
        return out

    def subs(self, mapping: Mapping[str, "ScalarExpr"]) -> "ScalarExpr":
        """Simultaneous substitution of coordinates by expressions."""
        if not mapping:
            return self
        mapping = {k: as_expr(v) for k, v in mapping.items()}
        if not (self.free_symbols() & mapping.keys()):
            return self
        cache: dict = {}
        out = ZERO
        for m, c in self._terms.items():
            term = ScalarExpr({(): c})
            for atom, e in m:
                val = cache.get(atom)
                if val is None:
                    val = _atom_subs(atom, mapping)
                    cache[atom] = val
                term = term * (val ** e)
            out = out + term
        return out

    def rename(self, mapping: Mapping[str, str]) -> "ScalarExpr":
        return self.subs({k: var(v) for k, v in mapping.items()})


@lru_cache(maxsize=100_000)
def _from_key_cached(key: tuple) -> ScalarExpr:
    return ScalarExpr(dict(key))


def _atom_expr(atom) -> ScalarExpr:
    return ScalarExpr({((atom, 1),): _C1})


def _atom_subs(atom, mapping) -> ScalarExpr:
    kind = atom[0]
    if kind == VAR:
        val = mapping.get(atom[1])
        return _atom_expr(atom) if val is None else val
    if kind == PI:
        return PI_EXPR
    arg = _from_key_cached(atom[1]).subs(mapping)
    return {EXP: exp, SIN: sin, COS: cos}[kind](arg)


@lru_cache(maxsize=200_000)
def _mono_diff(m: tuple, name: str) -> ScalarExpr:
    out = ZERO
    for idx, (atom, e) in enumerate(m):
        datom = _atom_diff(atom, name)
        if datom.is_zero():
            continue
        rest = dict(m[:idx] + m[idx + 1:])
        if e != 1:
            rest[atom] = e - 1
        rest_expr = ZERO
        for mono, c in _normalize_powers(rest):
            rest_expr = rest_expr + ScalarExpr({mono: c})
        out = out + rest_expr * datom * e
    return out


def _atom_diff(atom, name: str) -> ScalarExpr:
    kind = atom[0]
    if kind == VAR:
        return ONE if atom[1] == name else ZERO
    if kind == PI:
        return ZERO
    arg = _from_key_cached(atom[1])
    darg = arg.diff(name)
    if darg.is_zero():
        return ZERO
    if kind == EXP:
        return darg * _atom_expr(atom)
    if kind == SIN:
        return darg * _atom_expr((COS, atom[1]))
    return -darg * _atom_expr((SIN, atom[1]))


# ---- constructors ---------------------------------------------------------------------

def const(re: Number = 0, im: Number = 0) -> ScalarExpr:
    """Gaussian-rational constant ``re + i*im``."""
    return ScalarExpr({(): (mpq(re), mpq(im))})


def var(name: str) -> ScalarExpr:
    """The coordinate function ``name``."""
    if name in ("pi", "i"):
        raise SymbolicError(f"{name!r} is reserved and cannot be a coordinate")
    return _atom_expr((VAR, name))


ZERO = ScalarExpr()
ONE = ScalarExpr({(): _C1})
I_UNIT = ScalarExpr({(): (_Q0, _Q1)})
PI_EXPR = _atom_expr((PI, ""))


def as_expr(value) -> ScalarExpr:
    """Coerce ints, rationals and ``(re, im)`` pairs to :class:`ScalarExpr`."""
    if isinstance(value, ScalarExpr):
        return value
    if isinstance(value, bool):
        raise TypeError("bool is not a scalar")
    if isinstance(value, (int, np.integer)) or type(value).__name__ in ("mpq", "mpz", "Fraction"):
        return const(mpq(value)) if value else ZERO
    if isinstance(value, tuple) and len(value) == 2:
        return ScalarExpr({(): _to_coeff(value)})
    if isinstance(value, (float, complex)):
        raise SymbolicError("floating constants are not allowed in symbolic trees")
    raise TypeError(f"cannot convert {type(value).__name__} to ScalarExpr")


def _check_argument(arg: ScalarExpr, fname: str) -> None:
    if not arg.is_polynomial():
        raise SymbolicError(f"non-polynomial argument to {fname}: {arg}")


def _canonical_sign(arg: ScalarExpr) -> tuple[ScalarExpr, int]:
    lead = arg.key[0][1][0]
    return (-arg, -1) if lead < 0 else (arg, 1)


def exp(arg) -> ScalarExpr:
    arg = as_expr(arg)
    _check_argument(arg, "exp")
    re_arg, im_arg = arg.real_part(), arg.imag_part()
    if not im_arg.is_zero():
        return exp(re_arg) * (cos(im_arg) + I_UNIT * sin(im_arg))
    if re_arg.is_zero():
        return ONE
    return _atom_expr((EXP, re_arg.key))


def sin(arg) -> ScalarExpr:
    arg = as_expr(arg)
    _check_argument(arg, "sin")
    re_arg, im_arg = arg.real_part(), arg.imag_part()
    if not im_arg.is_zero():
        # sin(w) = (e^{iw} - e^{-iw}) / (2i)
        w = I_UNIT * arg
        return (exp(w) - exp(-w)) * const(0, mpq(-1, 2))
    if re_arg.is_zero():
        return ZERO
    canon, sign = _canonical_sign(re_arg)
    atom = _atom_expr((SIN, canon.key))
    return atom if sign > 0 else -atom


def cos(arg) -> ScalarExpr:
    arg = as_expr(arg)
    _check_argument(arg, "cos")
    re_arg, im_arg = arg.real_part(), arg.imag_part()
    if not im_arg.is_zero():
        w = I_UNIT * arg
        return (exp(w) + exp(-w)) * const(mpq(1, 2))
    if re_arg.is_zero():
        return ONE
    canon, _ = _canonical_sign(re_arg)
    return _atom_expr((COS, canon.key))


def differentiate(e: ScalarExpr, v: str | ScalarExpr) -> ScalarExpr:
    """Partial derivative of ``e`` with respect to coordinate ``v``."""
    if isinstance(v, ScalarExpr):
        names = v.free_symbols()
        if len(names) != 1 or v != var(next(iter(names))):
            raise TypeError("differentiate expects a coordinate")
        v = next(iter(names))
    return as_expr(e).diff(v)


def expr_sum(items: Iterable) -> ScalarExpr:
    out = ZERO
    for it in items:
        out = out + it
    return out


# ---- printing ---------------------------------------------------------------------------

def _fmt_rational(q) -> str:
    q = mpq(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def _fmt_atom(atom, e: int) -> str:
    kind = atom[0]
    if kind == VAR:
        base = atom[1]
    elif kind == PI:
        base = "pi"
    else:
        base = f"{_FUNC_NAMES[kind]}({to_string(_from_key_cached(atom[1]))})"
    if e == 1:
        return base
    return f"{base}^{e}" if e > 0 else f"{base}^({e})"


def to_string(e: ScalarExpr) -> str:
    """Render in the input grammar; ``parse(to_string(e)) == e``."""
    if e.is_zero():
        return "0"
    parts = []
    for m, (re, im) in e.key:
        factors = [_fmt_atom(a, p) for a, p in m]
        sign = 1
        if im == 0:
            if re < 0:
                sign, re = -1, -re
            coeff = None if (re == 1 and factors) else _fmt_rational(re)
        elif re == 0:
            if im < 0:
                sign, im = -1, -im
            coeff = "i" if im == 1 else f"{_fmt_rational(im)}*i"
        else:
            coeff = f"({_fmt_rational(re)} + {_fmt_rational(im)}*i)" if im > 0 else \
                f"({_fmt_rational(re)} - {_fmt_rational(-im)}*i)"
        if coeff is not None and "/" in coeff and factors and not coeff.startswith("("):
            coeff = f"({coeff})"
        body = "*".join(([coeff] if coeff is not None else []) + factors)
        parts.append((sign, body))
    out = ("-" if parts[0][0] < 0 else "") + parts[0][1]
    for sign, body in parts[1:]:
        out += (" - " if sign < 0 else " + ") + body
    return out


# ---- numeric evaluation --------------------------------------------------------------------

def evaluate(e: ScalarExpr, point: Mapping[str, object]):
    """Double-precision evaluation; arrays in ``point`` broadcast.

    Returns a float (or ndarray) when the expression is real and a complex
    value otherwise.  ``pi`` is bound automatically.
    """
    e = as_expr(e)
    cache: dict = {}
    real = e.is_real()
    total = 0.0
    # fixed summation order keeps results bit-identical across runs
    for m, (re, im) in sorted(e.terms.items()):
        val = float(re) if real else complex(float(re), float(im))
        for atom, p in m:
            a = cache.get(atom)
            if a is None:
                a = _eval_atom(atom, point)
                cache[atom] = a
            val = val * (a ** p if p != 1 else a)
        total = total + val
    if isinstance(total, np.ndarray):
        return total
    return float(total) if real else complex(total)


def _eval_atom(atom, point):
    kind = atom[0]
    if kind == VAR:
        try:
            v = point[atom[1]]
        except KeyError:
            raise UnboundVariableError(atom[1]) from None
        return np.asarray(v, dtype=float) if isinstance(v, (list, np.ndarray)) else float(v)
    if kind == PI:
        return math.pi
    arg = evaluate(_from_key_cached(atom[1]), point)
    return {EXP: np.exp, SIN: np.sin, COS: np.cos}[kind](arg)
