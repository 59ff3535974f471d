"""Equality decisions: exact normal forms first, random sampling second."""

from __future__ import annotations

import enum
import math
import random
from dataclasses import dataclass, replace

import numpy as np

from ..report import Verdict
from .expr import ScalarExpr, as_expr, evaluate, to_string


class EqOutcome(enum.Enum):
    EQUAL = "Equal"
    NOT_EQUAL = "NotEqual"
    PROBABLY_EQUAL = "ProbablyEqual"


@dataclass(frozen=True)
class RandomPointConfig:
    """Sampling parameters for the numeric fallback of :func:`eq_check`.

    Coordinates are drawn as rationals ``k / max_denominator`` in
    ``[low, high]``.
    """

    n_points: int = 64
    low: float = -1.0
    high: float = 1.0
    max_denominator: int = 2 ** 16
    tol: float = 1e-9
    seed: int = 0
    max_retries: int = 16

    def with_seed(self, seed: int) -> "RandomPointConfig":
        return replace(self, seed=seed)


DEFAULT_SAMPLER = RandomPointConfig()


class EvaluationOverflow(ArithmeticError):
    """Every resampling attempt produced a non-finite value."""


@dataclass(frozen=True)
class Comparison:
    outcome: EqOutcome
    max_deviation: float = 0.0
    witness: dict | None = None
    difference: str = "0"

    @property
    def verdict(self) -> Verdict:
        return {
            EqOutcome.EQUAL: Verdict.PASS,
            EqOutcome.NOT_EQUAL: Verdict.FAIL,
            EqOutcome.PROBABLY_EQUAL: Verdict.INCONCLUSIVE,
        }[self.outcome]

    def describe(self) -> str:
        if self.outcome is EqOutcome.EQUAL:
            return "Equal"
        if self.outcome is EqOutcome.PROBABLY_EQUAL:
            return (f"ProbablyEqual (normal forms differ by {self.difference}; "
                    f"max sampled deviation {self.max_deviation:.3g})")
        pt = ", ".join(f"{k}={v:.6g}" for k, v in sorted((self.witness or {}).items()))
        return (f"NotEqual: difference {self.difference} evaluates to "
                f"{self.max_deviation:.6g} at ({pt})")


def sample_points(names, config: RandomPointConfig = DEFAULT_SAMPLER, rng=None):
    """Yield random rational points as ``{name: float}`` dicts."""
    rng = rng or random.Random(config.seed)
    names = sorted(names)
    den = config.max_denominator
    lo, hi = math.ceil(config.low * den), math.floor(config.high * den)
    while True:
        yield {n: rng.randint(lo, hi) / den for n in names}


def eq_check(a, b, sampler: RandomPointConfig | None = None) -> Comparison:
    """Decide ``a == b``.

    ``Equal`` when ``a - b`` normalizes to zero; ``NotEqual`` when some
    sample point separates them beyond ``sampler.tol`` (relative to the
    magnitudes involved); ``ProbablyEqual`` otherwise.
    """
    config = sampler or DEFAULT_SAMPLER
    a, b = as_expr(a), as_expr(b)
    diff = a - b
    if diff.is_zero():
        return Comparison(EqOutcome.EQUAL)
    names = a.free_symbols() | b.free_symbols()
    rng = random.Random(config.seed)
    points = sample_points(names, config, rng)
    worst = 0.0
    taken = 0
    retries = 0
    while taken < config.n_points:
        point = next(points)
        with np.errstate(all="ignore"):
            va = evaluate(a, point)
            vb = evaluate(b, point)
        if not (_finite(va) and _finite(vb)):
            retries += 1
            if retries > config.max_retries:
                raise EvaluationOverflow(f"non-finite values while sampling {to_string(diff)}")
            continue
        taken += 1
        dev = abs(va - vb)
        scale = max(1.0, abs(va), abs(vb))
        if dev > config.tol * scale:
            return Comparison(EqOutcome.NOT_EQUAL, dev, point, to_string(diff))
        worst = max(worst, dev)
    return Comparison(EqOutcome.PROBABLY_EQUAL, worst, None, to_string(diff))


def is_zero_check(e, sampler: RandomPointConfig | None = None) -> Comparison:
    return eq_check(e, 0, sampler)


def _finite(v) -> bool:
    return math.isfinite(abs(v))

