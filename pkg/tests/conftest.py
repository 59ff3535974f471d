import cmath
import math

from hypothesis import settings, strategies as st

settings.register_profile("default", max_examples=40, deadline=None, derandomize=True)
settings.load_profile("default")

VARS = ("x", "y")


def _poly(depth: int):
    leaf = st.one_of(st.sampled_from(VARS), st.integers(-3, 3).map(str))
    return st.recursive(
        leaf,
        lambda inner: st.one_of(
            st.tuples(inner, st.sampled_from("+-*"), inner).map(lambda t: f"({t[0]}{t[1]}{t[2]})"),
            st.tuples(inner, st.integers(0, 3)).map(lambda t: f"({t[0]})^{t[1]}"),
        ),
        max_leaves=depth,
    )


polynomials = _poly(6)


def _with_atoms():
    small = _poly(3)
    atom = st.tuples(st.sampled_from(["exp", "sin", "cos"]), small).map(lambda t: f"{t[0]}({t[1]})")
    leaf = st.one_of(polynomials, atom)
    return st.recursive(
        leaf,
        lambda inner: st.tuples(inner, st.sampled_from("+-*"), inner).map(lambda t: f"({t[0]}{t[1]}{t[2]})"),
        max_leaves=4,
    )


expressions = _with_atoms()


def python_eval(text: str, point: dict) -> complex:
    """Independent evaluator: the grammar is a subset of Python once ``^`` is ``**``."""
    env = {"exp": cmath.exp, "sin": cmath.sin, "cos": cmath.cos, "pi": math.pi, "i": 1j}
    env.update(point)
    return complex(eval(text.replace("^", "**"), {"__builtins__": {}}, env))


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
