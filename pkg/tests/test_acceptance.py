"""Acceptance suite: one check per numbered criterion.

Each criterion records a PASS/FAIL line; the lines are printed together at
the end of the pytest run and also when this file is executed directly.
"""

import json
import math
import random
import time
from pathlib import Path

import numpy as np

from holalg.algebroid import (
    HolomorphicAlgebroidChart,
    central_extension,
    check_axioms,
    check_infinitesimal_multiplicative,
    cotangent_algebroid,
    realify,
    tangent_lift,
    torsion_report,
)
from holalg.calculus import (
    Chart,
    ComplexChart,
    DifferentialForm,
    Multivector,
    OneOneTensor,
    compare_fields,
    nijenhuis_torsion,
    torsion_oracle_report,
)
from holalg.cli import main
from holalg.periods import (
    Discreteness,
    discreteness,
    n_cross_n,
    period_vectors,
    sphere_period,
)
from holalg.poisson import (
    HolomorphicBivector,
    InvolutionVerdict,
    bracket_table_check,
    check_cotangent_realification,
    check_pngc,
    conjugation_involution,
    decompose,
    dirac_reduce,
    holomorphic_cotangent,
    holomorphic_extension,
    involution_check,
)
from holalg.report import Verdict
from holalg.symbolic import parse

RESULTS: dict[int, tuple[bool, str]] = {}

C1 = ComplexChart.standard(1, "C1")
C2 = ComplexChart.standard(2, "C2")
C3 = ComplexChart.standard(3, "C3")
R2 = Chart("R2", ("x1", "x2"))
R3 = Chart("R3", ("x1", "x2", "x3"))
GAUSS_Z = "exp((z1^2+z2^2+z3^2)/2)"
GAUSS_X = "exp((x1^2+x2^2+x3^2)/2)"

CORPUS = {
    "d1^d2": HolomorphicBivector(C2, {"1,2": "1"}, one_based=True),
    "z1 d1^d2": HolomorphicBivector(C2, {"1,2": "z1"}, one_based=True),
    "gaussian": HolomorphicBivector(C3, {"2,3": f"{GAUSS_Z}*z1", "3,1": f"{GAUSS_Z}*z2",
                                         "1,2": f"{GAUSS_Z}*z3"}, one_based=True),
}
REAL_CORPUS = {
    "constant": Multivector(R3, 2, {"1,2": "1"}, one_based=True),
    "so(3)": Multivector(R3, 2, {"1,2": "x3", "2,3": "x1", "3,1": "x2"}, one_based=True),
    "gaussian": Multivector(R3, 2, {"2,3": f"{GAUSS_X}*x1", "3,1": f"{GAUSS_X}*x2",
                                    "1,2": f"{GAUSS_X}*x3"}, one_based=True),
}
SQRT2 = math.sqrt(2.0)


def record(n: int, ok: bool, detail: str) -> None:
    RESULTS[n] = (ok, detail)
    assert ok, f"criterion {n}: {detail}"


def only_equal(rep) -> bool:
    """Every item decided exactly; a probable equality does not count."""
    return bool(rep.items) and all(it.verdict is Verdict.PASS for it in rep.items)


def random_holomorphic_c2(rng: random.Random) -> HolomorphicBivector:
    monomials = ["1", "z1", "z2", "z1^2", "z1*z2", "z2^2"]
    terms = [f"({rng.randint(-3, 3)} + {rng.randint(-3, 3)}*i)*{m}" for m in monomials]
    return HolomorphicBivector(C2, {(0, 1): " + ".join(terms)})


def random_poisson_r3(rng: random.Random) -> Multivector:
    """``pi^{ij} = g eps_{ijk} d_k C`` is Poisson for every C and g."""
    pool = ["x1", "x2", "x3", "x1*x2", "x2^2 - x3", "x1 + x2*x3", "x1^2 + x2^2 + x3^2", "x3^2"]
    C = R3.parse(" + ".join(rng.sample(pool, 2)))
    g = R3.parse(rng.choice(pool + ["1", "2"]))
    d = [C.diff(x) for x in R3.coords]
    return Multivector(R3, 2, {(0, 1): g * d[2], (1, 2): g * d[0], (0, 2): -(g * d[1])})


def test_criterion_01_bracket_table():
    t0 = time.perf_counter()
    ok = {name: only_equal(bracket_table_check(pi)) for name, pi in CORPUS.items()}
    elapsed = time.perf_counter() - t0
    record(1, all(ok.values()) and elapsed < 5.0,
           f"six identities Equal on {sum(ok.values())}/{len(ok)} bivectors in {elapsed:.2f}s (limit 5s)")


def test_criterion_02_pngc():
    rng = random.Random(2)
    randoms = [random_holomorphic_c2(rng) for _ in range(20)]
    corpus_ok = sum(check_pngc(pi).passed for pi in CORPUS.values())
    random_ok = sum(check_pngc(pi).passed for pi in randoms)
    control = check_pngc(HolomorphicBivector(C2, {"1,2": "x1 - i*y1"}, one_based=True))
    cr_fails = any(it.name.startswith("(1)") for it in control.failures())
    record(2, corpus_ok == 3 and random_ok == 20 and cr_fails,
           f"corpus {corpus_ok}/3, random degree<=2 {random_ok}/20, conj control fails CR: {cr_fails}")


def test_criterion_03_real_and_imaginary_algebroids():
    ok = {name: only_equal(check_cotangent_realification(pi)) for name, pi in CORPUS.items()}
    record(3, all(ok.values()),
           f"A_R = T*(4 pi_R) and A_I = T*(4 pi_I) Equal on {sum(ok.values())}/{len(ok)}")


def test_criterion_04_torsion():
    std = nijenhuis_torsion(C3.J).is_zero()
    j_ok = 0
    for pi in CORPUS.values():
        A_R, j = realify(holomorphic_cotangent(pi))
        j_ok += torsion_report(A_R, j).passed
    N = OneOneTensor(R2, [["0", "x1"], ["1", "0"]])
    value = compare_fields(nijenhuis_torsion(N).vector(0, 1), Multivector.vector(R2, ["0", "-1"])).passed
    oracle = torsion_oracle_report(N, n_points=16, tol=1e-6)
    dev = oracle.data["max_deviation"]
    record(4, std and j_ok == 3 and value and oracle.passed and dev < 1e-6,
           f"standard J {'0' if std else 'nonzero'}, j torsion 0 on {j_ok}/3, "
           f"N(d1,d2) = -d2: {value}, oracle max deviation {dev:.1e} (limit 1e-6)")


def test_criterion_05_tangent_lift():
    so3 = check_axioms(tangent_lift(cotangent_algebroid(REAL_CORPUS["so(3)"]))).passed
    rng = random.Random(5)
    lifted = 0
    for _ in range(10):
        A = cotangent_algebroid(random_poisson_r3(rng))
        lifted += check_axioms(A).passed and check_axioms(tangent_lift(A)).passed
    examples = [HolomorphicAlgebroidChart(C1, ["e"], [["0"]]), HolomorphicAlgebroidChart(C1, ["e"], [["z1"]])]
    examples += [holomorphic_cotangent(pi) for pi in CORPUS.values()]
    mult = 0
    for H in examples:
        A_R, j = realify(H, check=False)
        mult += check_infinitesimal_multiplicative(A_R, j, H.chart.J).passed
    bad_R, bad_j = realify(HolomorphicAlgebroidChart(C1, ["e"], [["z1*(x1^2+y1^2)"]]), check=False)
    control = check_infinitesimal_multiplicative(bad_R, bad_j, C1.J).verdict is Verdict.FAIL
    record(5, so3 and lifted == 10 and mult == len(examples) and control,
           f"so(3) lift axioms {so3}, random lifts {lifted}/10, multiplicative "
           f"{mult}/{len(examples)}, |z|^2 control fails: {control}")


def test_criterion_06_dirac_reduction():
    sigma = conjugation_involution(C3)
    locus = ["y1", "y2", "y3"]
    good = []
    for name, p in REAL_CORPUS.items():
        pi_R = decompose(holomorphic_extension(p, C3)).pi_R
        Q1, r1 = dirac_reduce(pi_R, sigma, locus, split="canonical")
        Q2, r2 = dirac_reduce(pi_R, sigma, locus, split="alternative")
        quarter = p.scale(parse("1/4"))
        ok = (r1.passed and r2.passed and only_equal(compare_fields(Q1, Q2))
              and only_equal(compare_fields(Multivector(R3, 2, Q1.components), quarter)))
        if ok:
            good.append(name)
    record(6, len(good) == 3, f"reduction = pi_real/4 with both splits agreeing on {len(good)}/3 ({', '.join(good)})")


def test_criterion_07_involution():
    cases = [(pi, conjugation_involution(pi.chart)) for pi in CORPUS.values()]
    cases += [(holomorphic_extension(p, C3), conjugation_involution(C3)) for p in REAL_CORPUS.values()]
    ok = 0
    for pi, sigma in cases:
        pair = decompose(pi)
        ok += (involution_check(pair.pi_R, sigma)[0] is InvolutionVerdict.POISSON
               and involution_check(pair.pi_I, sigma)[0] is InvolutionVerdict.ANTI_POISSON)
    record(7, ok == len(cases), f"sigma: Poisson on pi_R and AntiPoisson on pi_I for {ok}/{len(cases)}")


def test_criterion_08_periods():
    t0 = time.perf_counter()
    ex = n_cross_n()
    s1 = ex.classes[0]
    eta1, eta2 = ex.omega1.terms[0][1], ex.omega2.terms[0][1]
    i2 = sphere_period(eta2, s1, (256, 512))
    runs = [sphere_period(eta1, s1, (n, 2 * n)) for n in (64, 128, 256)]
    errs = [abs(r.value - 1 / math.pi) for r in runs]
    converging = all(b < a / 8 for a, b in zip(errs, errs[1:])) and errs[-1] <= 2 * runs[-1].error_estimate
    vs = period_vectors(ex.omega1, ex.omega2, ex.classes, (256, 512))
    ratio = vs[0].value[0] / vs[1].value[0]
    elapsed = time.perf_counter() - t0
    ok = (abs(i2.value) < 1e-8 and abs(runs[-1].value) > 1e-3 and converging
          and abs(ratio - SQRT2) < 1e-5 and elapsed < 30.0)
    record(8, ok, f"int eta2 = {i2.value:.1e} (limit 1e-8), int eta1 = {runs[-1].value:.12f} "
                  f"(1/pi oracle, error {errs[-1]:.1e}), ratio - sqrt2 = {ratio - SQRT2:.1e} "
                  f"(limit 1e-5), {elapsed:.2f}s (limit 30s)")


def test_criterion_09_discreteness():
    cases = [([(1, 0), (SQRT2, 0)], Discreteness.NOT_DISCRETE),
             ([(1, 0), (0, 1)], Discreteness.DISCRETE),
             ([(1, 0), (SQRT2, 1)], Discreteness.DISCRETE)]
    rng = np.random.default_rng(9)
    scalings = rng.uniform(1e-3, 1e3, 5)
    ok = 0
    for vecs, want in cases:
        ok += discreteness(vecs).verdict is want and all(
            discreteness([(c * a, c * b) for a, b in vecs]).verdict is want for c in scalings)
    record(9, ok == 3, f"expected verdicts on {ok}/3 sets, each under 5 random positive scalings")


def test_criterion_10_central_extension():
    closed = check_axioms(central_extension([DifferentialForm(Chart("R2", ("x", "y")), 2, {(0, 1): "1"})]))
    not_closed = check_axioms(central_extension([DifferentialForm(R3, 2, {(0, 1): "x3"})], warn=False))
    ok = closed.passed and not_closed.verdict is Verdict.FAIL and any(
        it.name.startswith("Jacobi") for it in not_closed.failures())
    record(10, ok, f"dx^dy: {closed.verdict.value}, x3 dx1^dx2: {not_closed.verdict.value} on Jacobi")


def test_criterion_11_end_to_end(tmp_path):
    out = tmp_path / "report.json"
    code = main(["run", "paper:NxN", "--report", "json", "--out", str(out)])
    report = json.loads(out.read_text())
    res = {r["id"]: r for r in report["results"]}
    group = res.get("period-group-NxN", {})
    verdict = (group.get("observed") or {}).get("verdict")
    ops = {r["op"] for r in report["results"]}
    ok = code == 0 and verdict == "NotDiscrete" and {"sphere_period", "period_check", "discreteness"} <= ops
    record(11, ok, f"paper:NxN exit {code}, period group verdict {verdict}, "
                   f"{sum(r['status'] == 'pass' for r in report['results'])}/{len(report['results'])} checks pass")


def test_acceptance_workspace_runs_clean(tmp_path):
    # the same criteria expressed as data
    ws = Path(__file__).resolve().parents[1] / "workspaces" / "acceptance.json"
    assert main(["run", str(ws), "--out", str(tmp_path / "r.txt")]) == 0


def summary_lines() -> list[str]:
    lines = []
    for n in range(1, 12):
        if n in RESULTS:
            ok, detail = RESULTS[n]
            lines.append(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
        else:
            lines.append(f"criterion {n:2d}: FAIL  not run or raised before recording")
    return lines


if __name__ == "__main__":
    import tempfile
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion"):
            try:
                if "tmp_path" in fn.__code__.co_varnames[:fn.__code__.co_argcount]:
                    with tempfile.TemporaryDirectory() as d:
                        fn(Path(d))
                else:
                    fn()
            except AssertionError:
                pass
    print("\n".join(summary_lines()))
