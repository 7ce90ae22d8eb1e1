import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pmcsurf import jets
from pmcsurf.jets import Taylor

vals = st.floats(-1.5, 1.5)


def partials_of(f):
    return np.array([[f.partial(i, j) for j in range(4)] for i in range(4)])


@given(vals, vals)
def test_product_rule_against_closed_form(x0, y0):
    x, y = Taylor.variable(x0, 0), Taylor.variable(y0, 1)
    f = x * x * y
    # d^3/dx^2dy (x^2 y) = 2, d^2/dxdy = 2x, d/dy = x^2
    assert f.partial(2, 1) == pytest.approx(2.0)
    assert f.partial(1, 1) == pytest.approx(2 * x0)
    assert f.partial(0, 1) == pytest.approx(x0 * x0)
    assert f.partial(3, 0) == 0


@given(vals, vals)
def test_transcendentals(x0, y0):
    x, y = Taylor.variable(x0, 0), Taylor.variable(y0, 1)
    f = jets.sin(x + y)
    s, c = math.sin(x0 + y0), math.cos(x0 + y0)
    assert f.partial(1, 1) == pytest.approx(-s, abs=1e-14)
    assert f.partial(2, 1) == pytest.approx(-c, abs=1e-14)
    g = jets.cosh(2 * x)
    assert g.partial(3, 0) == pytest.approx(8 * math.sinh(2 * x0))
    r = jets.sqrt(1 + x * x)
    assert r.partial(1, 0) == pytest.approx(x0 / math.sqrt(1 + x0 * x0))


@given(st.floats(0.3, 3.0))
def test_reciprocal_and_division(x0):
    x = Taylor.variable(x0, 0)
    one = x * (1 / x)
    assert np.allclose(partials_of(one), np.eye(4)[0][:, None] * np.eye(4)[0][None, :], atol=1e-12)
    assert (1 / x).partial(3, 0) == pytest.approx(-6 / x0**4)


def test_complex_coefficients():
    x = Taylor.variable(0.0, 0)
    z = (1 + 2j) * x
    assert (z * z).partial(2, 0) == pytest.approx(2 * (1 + 2j) ** 2)


def test_truncation_drops_degree_four():
    x = Taylor.variable(0.0, 0)
    assert (x * x * x * x).partials().max() == 0


def test_ode_series_exponential():
    ys = jets.ode_series(lambda x, y: [y[0]], [2.0], x0=0.5)
    assert [ys[0].partial(n, 0) for n in range(4)] == pytest.approx([2.0] * 4)


def test_ode_series_time_dependent():
    # y' = x y, y(0) = 1 -> y = exp(x^2/2): y'' = 1, y''' = 0
    ys = jets.ode_series(lambda x, y: [x * y[0]], [1.0])
    assert [ys[0].partial(n, 0) for n in range(4)] == pytest.approx([1.0, 0.0, 1.0, 0.0], abs=1e-15)
