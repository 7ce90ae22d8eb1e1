import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pmcsurf import curves
from pmcsurf.ambient import GeometryError, lorentz_inner3
from pmcsurf.curves import HYPERBOLIC, SPHERE, PrescribedCurveProblem, frenet_integrate


def closed_form(factor, k, s):
    return curves.sphere_circle(k, s) if factor == SPHERE else curves.hyperbolic_constant_curvature(k, s)


def integrate_like(factor, k, x_max, step=1e-3, speed=1.0):
    start = closed_form(factor, k, 0.0)
    kappa = curves.measured_curvature(start, factor)
    prob = PrescribedCurveProblem(factor, lambda x: speed, lambda x: kappa, x_max, step,
                                  position=start.pos, tangent=start.d1)
    return frenet_integrate(prob), kappa


@given(st.floats(-3, 3))
def test_sphere_circle_curvature(k):
    s = curves.sphere_circle(k, 0.7)
    assert abs(s.pos @ s.pos - 1) < 1e-14
    assert curves.measured_speed(s, SPHERE) == pytest.approx(1.0)
    assert abs(curves.measured_curvature(s, SPHERE)) == pytest.approx(abs(k), abs=1e-12)


@pytest.mark.parametrize("k", [0.0, 0.5, 1.0, 1.7, -0.5])
def test_hyperbolic_constant_curvature(k):
    s = curves.hyperbolic_constant_curvature(k, 0.4)
    assert lorentz_inner3(s.pos, s.pos) == pytest.approx(-1.0)
    assert s.pos[2] > 0
    assert curves.measured_speed(s, HYPERBOLIC) == pytest.approx(1.0)
    assert abs(curves.measured_curvature(s, HYPERBOLIC)) == pytest.approx(abs(k), abs=1e-12)


@pytest.mark.parametrize("factor,k", [(SPHERE, 0.5), (SPHERE, 2.0), (HYPERBOLIC, 0.5), (HYPERBOLIC, 1.0),
                                      (HYPERBOLIC, 1.5)])
def test_integrated_matches_closed_form(factor, k):
    curve, kappa = integrate_like(factor, k, 2.0)
    for x in (0.5, 1.3, 2.0):
        ref = closed_form(factor, k, x)
        got = curve.sample(x)
        assert np.abs(got.pos - ref.pos).max() < 1e-10
        assert np.abs(got.d1 - ref.d1).max() < 1e-10
        assert np.abs(got.d3 - ref.d3).max() < 1e-9
        assert curves.measured_curvature(got, factor) == pytest.approx(kappa, abs=1e-10)


def test_prescribed_speed_and_curvature_recovered():
    prob = PrescribedCurveProblem(HYPERBOLIC, lambda x: 1 + 0.3 * x * x, lambda x: 0.4 + 0.1 * x, 1.5,
                                  position=np.array([0.0, 0.0, 1.0]), tangent=np.array([1.0, 0.0, 0.0]))
    curve = frenet_integrate(prob)
    for x in (0.2, 0.77, 1.5):
        s = curve.sample(x)
        assert curves.measured_speed(s, HYPERBOLIC) == pytest.approx(1 + 0.3 * x * x, abs=1e-10)
        assert curves.measured_curvature(s, HYPERBOLIC) == pytest.approx(0.4 + 0.1 * x, abs=1e-9)


def test_rk4_convergence():
    errs = []
    for step in (2e-2, 1e-2):
        curve, _ = integrate_like(SPHERE, 0.8, 2.0, step=step)
        errs.append(np.abs(curve.sample(2.0).pos - curves.sphere_circle(0.8, 2.0).pos).max())
    assert errs[0] / errs[1] > 12


def test_bad_initial_data():
    prob = PrescribedCurveProblem(SPHERE, lambda x: 1.0, lambda x: 0.0, 1.0, position=np.array([0, 0, 2.0]))
    with pytest.raises(GeometryError):
        frenet_integrate(prob)
    with pytest.raises(GeometryError):
        PrescribedCurveProblem("torus", lambda x: 1.0, lambda x: 0.0, 1.0)


def test_sample_outside_range():
    curve, _ = integrate_like(SPHERE, 0.5, 1.0)
    with pytest.raises(GeometryError):
        curve.sample(1.5)
