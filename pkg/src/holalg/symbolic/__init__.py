"""Exact symbolic scalars: parsing, normal form, calculus, complex splitting."""

from .compare import (
    DEFAULT_SAMPLER,
    Comparison,
    EqOutcome,
    EvaluationOverflow,
    RandomPointConfig,
    eq_check,
    is_zero_check,
)
from .complexify import (
    ComplexScalar,
    Pairing,
    cauchy_riemann_check,
    holomorphic_derivative,
    split_complex,
)
from .expr import (
    I_UNIT,
    ONE,
    PI_EXPR,
    ZERO,
    ScalarExpr,
    SymbolicError,
    UnboundVariableError,
    as_expr,
    const,
    cos,
    differentiate,
    evaluate,
    exp,
    expr_sum,
    sin,
    to_string,
    var,
)
from .parse import ParseError, parse

__all__ = [
    "Comparison", "ComplexScalar", "DEFAULT_SAMPLER", "EqOutcome", "EvaluationOverflow",
    "I_UNIT", "ONE", "PI_EXPR", "Pairing", "ParseError", "RandomPointConfig", "ScalarExpr",
    "SymbolicError", "UnboundVariableError", "ZERO", "as_expr", "cauchy_riemann_check",
    "const", "cos", "differentiate", "eq_check", "evaluate", "exp", "expr_sum",
    "holomorphic_derivative", "is_zero_check", "parse", "sin", "split_complex",
    "to_string", "var",
]
