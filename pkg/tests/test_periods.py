import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from holalg.calculus import Chart, DifferentialForm, exterior_derivative
from holalg.periods import (
    Discreteness,
    DiscretenessConfig,
    NotClosedError,
    PeriodError,
    SeamError,
    SphereClass,
    WeightedForm,
    closedness_report,
    discreteness,
    n_cross_n,
    period_vectors,
    recognize_rational,
    sphere_period,
    unit_sphere,
)
from holalg.report import Verdict

from conftest import polynomials

R3 = Chart("R3", ("x1", "x2", "x3"))
S2 = SphereClass("S2", R3, tuple(unit_sphere()))
FINE = (256, 512)
SQRT2 = math.sqrt(2.0)

# x1 dx2^dx3 + c.p. pulls back to sin(theta) dtheta^dphi; by the divergence theorem its
# integral is 3 vol(B^3) = 4 pi.  Evaluated independently with mpmath.
AREA_FORM = DifferentialForm(R3, 2, {"2,3": "x1", "3,1": "x2", "1,2": "x3"}, one_based=True)
AREA = float(mpmath.quad(lambda t, p: mpmath.sin(t), [0, mpmath.pi], [0, 2 * mpmath.pi]))


@pytest.fixture(scope="module")
def example():
    return n_cross_n()


@pytest.fixture(scope="module")
def first_class_periods(example):
    s = example.classes[0]
    # unweighted eta_1 and eta_2 of the first factor
    eta1, eta2 = example.omega1.terms[0][1], example.omega2.terms[0][1]
    return sphere_period(eta1, s, FINE), sphere_period(eta2, s, FINE)


class TestSpherePeriod:
    def test_area_form(self):
        assert AREA == pytest.approx(4 * math.pi, abs=1e-12)
        r = sphere_period(AREA_FORM, S2, FINE, check_closed=False)
        assert abs(r.value - AREA) < 2e-10 * AREA
        assert abs(r.value - AREA) <= 1.01 * r.error_estimate < 1e-8

    def test_eta_imaginary_part_vanishes(self, first_class_periods):
        _, r2 = first_class_periods
        assert abs(r2.value) < 1e-8

    def test_eta_real_part_is_one_over_pi(self, first_class_periods):
        r1, _ = first_class_periods
        # same divergence-theorem value, scaled by 1/(4 pi^2)
        oracle = AREA / (4 * math.pi ** 2)
        assert oracle == pytest.approx(1 / math.pi, rel=1e-14)
        assert abs(r1.value - oracle) < 1e-8
        assert abs(r1.value - oracle) <= 10 * r1.error_estimate + 1e-15

    def test_ratio_between_classes(self, example):
        vs = period_vectors(example.omega1, example.omega2, example.classes, FINE)
        (a1, a2), (b1, b2) = vs[0].value, vs[1].value
        assert abs(a2) < 1e-8 and abs(b2) < 1e-8
        assert abs(a1 / b1 - SQRT2) < 1e-5

    def test_midpoint_converges_at_second_order(self):
        errs = [abs(sphere_period(AREA_FORM, S2, (n, 2 * n), check_closed=False).fine - AREA)
                for n in (16, 32, 64)]
        for coarse, fine in zip(errs, errs[1:]):
            assert 3.5 < coarse / fine < 4.5

    def test_richardson_converges_at_fourth_order(self):
        errs = [abs(sphere_period(AREA_FORM, S2, (n, 2 * n), check_closed=False).value - AREA)
                for n in (16, 32, 64)]
        for coarse, fine in zip(errs, errs[1:]):
            assert 14 < coarse / fine < 18

    @pytest.mark.parametrize("n", [16, 32, 64, 128])
    def test_error_estimate_bounds_the_error(self, n):
        r = sphere_period(AREA_FORM, S2, (n, 2 * n), check_closed=False)
        assert abs(r.value - AREA) <= 2 * r.error_estimate

    @settings(max_examples=15)
    @given(st.lists(polynomials, min_size=3, max_size=3))
    def test_exact_forms_integrate_to_zero(self, vals):
        rename = [v.replace("x", "x1").replace("y", "x2") for v in vals]
        alpha = DifferentialForm(R3, 1, {(k,): v for k, v in enumerate(rename)})
        r = sphere_period(exterior_derivative(alpha), S2, (64, 128))
        assert abs(r.value) <= max(1e-9, 10 * r.error_estimate)

    def test_weights_are_linear(self):
        w = WeightedForm(((SQRT2, AREA_FORM), (-0.5, AREA_FORM)))
        r = sphere_period(w, S2, (64, 128), check_closed=False)
        one = sphere_period(AREA_FORM, S2, (64, 128), check_closed=False)
        assert r.value == pytest.approx((SQRT2 - 0.5) * one.value, rel=1e-13)


class TestGates:
    def test_not_closed(self):
        with pytest.raises(NotClosedError):
            sphere_period(AREA_FORM, S2, (64, 128))

    def test_closed_on_constraint_set(self, example):
        # eta_1 is not closed on C^3 but its differential vanishes along the quadric
        form = example.omega1.terms[0][1]
        assert not exterior_derivative(form).is_zero()
        assert closedness_report(form, example.classes[0].constraints).passed
        assert closedness_report(form).verdict is Verdict.FAIL

    def test_open_seam(self):
        torn = SphereClass("torn", R3, ("sin(theta)*cos(phi/2)", "sin(theta)*sin(phi/2)", "cos(theta)"))
        with pytest.raises(SeamError):
            sphere_period(DifferentialForm(R3, 2), torn, (64, 128))

    def test_pole_must_collapse(self):
        cyl = SphereClass("cyl", R3, ("cos(phi)", "sin(phi)", "theta"))
        assert cyl.seam_check().verdict is Verdict.FAIL

    @pytest.mark.parametrize("res", [(8, 16), (18, 36), (64, 30)])
    def test_resolution_rules(self, res):
        with pytest.raises(PeriodError):
            sphere_period(DifferentialForm(R3, 2, {(0, 1): "1"}), S2, res)

    def test_classes_lie_on_the_quadric(self, example):
        for s in example.classes:
            assert s.constraint_check().passed


positive = st.floats(1e-3, 1e3, allow_nan=False, allow_infinity=False)


class TestDiscreteness:
    @pytest.mark.parametrize("vectors, verdict", [
        ([(1, 0), (SQRT2, 0)], Discreteness.NOT_DISCRETE),
        ([(1, 0), (0, 1)], Discreteness.DISCRETE),
        ([(1, 0), (SQRT2, 1)], Discreteness.DISCRETE),
        ([(1, 0), (3 / 7, 0)], Discreteness.DISCRETE),
        ([(1, 0), (0, 1), (SQRT2, 0)], Discreteness.NOT_DISCRETE),
        ([(1, 0), (0, 1), (0.5, 0.25)], Discreteness.DISCRETE),
        ([(0, 0)], Discreteness.DISCRETE),
    ])
    def test_verdicts(self, vectors, verdict):
        assert discreteness(vectors).verdict is verdict

    def test_witness_names_the_coefficient(self):
        v = discreteness([(1, 0), (SQRT2, 0)])
        assert v.real_rank == 1 and "0.70710678" in v.witness

    @settings(max_examples=5)
    @given(positive)
    def test_scale_invariance(self, c):
        for vecs in ([(1, 0), (SQRT2, 0)], [(1, 0), (0, 1)], [(1, 0), (SQRT2, 1)]):
            scaled = [(c * a, c * b) for a, b in vecs]
            assert discreteness(scaled).verdict is discreteness(vecs).verdict

    def test_loose_errors_are_inconclusive(self):
        v = discreteness([(1, 0), (SQRT2, 0)], errors=[1e-3, 1e-3])
        assert v.verdict is Discreteness.INCONCLUSIVE

    def test_near_degenerate_rank_is_inconclusive(self):
        v = discreteness([(1, 0), (0, 1e-8)], DiscretenessConfig(rank_tol=1e-6))
        assert v.verdict is Discreteness.INCONCLUSIVE


class TestRecognizeRational:
    def test_rational(self):
        r = recognize_rational(0.75, 1e-12, 100)
        assert r.rational is True and r.fraction == Fraction(3, 4)

    def test_irrational(self):
        r = recognize_rational(SQRT2, 1e-12, 10 ** 4)
        assert r.rational is False and r.error > 1e-12

    def test_threshold_too_loose(self):
        assert recognize_rational(SQRT2, 1e-3, 100).rational is None

    @given(st.integers(-50, 50), st.integers(1, 50))
    def test_small_fractions_are_found(self, p, q):
        r = recognize_rational(p / q, 1e-12, 100)
        assert r.rational is True and r.fraction == Fraction(p, q)
