import math

import numpy as np
import pytest

from pmcsurf import hode
from pmcsurf.hode import ProfileError, integrate_h

SETS = [((1, 0.5, 0), "S1", 0.0), ((2, 0.5, 0), "S1", 0.0), ((1, 0.5, 0), "S2", 2.0)]


@pytest.mark.parametrize("abc,variant,h0,slope", [
    ((1, 0.5, 0), "S1", 0.0, math.sqrt(0.5)),
    ((2, 0.5, 0), "S1", 0.0, math.sqrt(3.0)),
    ((1, 0.5, 0), "S2", 2.0, math.sqrt(1.5)),
])
def test_initial_slope(abc, variant, h0, slope):
    sol = integrate_h(*abc, variant, h0, x_max=0.1)
    assert sol.dhs[0] == pytest.approx(slope, abs=1e-12)


@pytest.mark.parametrize("abc,variant,h0", SETS)
def test_energy_and_fourth_order(abc, variant, h0):
    coarse = integrate_h(*abc, variant, h0, x_max=2.0, step=1e-3)
    fine = integrate_h(*abc, variant, h0, x_max=2.0, step=5e-4)
    hi = min(coarse.admissible_range[1], fine.admissible_range[1])
    ec = coarse.energy_residuals()[coarse.xs <= hi].max()
    ef = fine.energy_residuals()[fine.xs <= hi].max()
    assert ec < 1e-6
    assert ec / ef >= 8


def test_domain_maintained_and_turning_points():
    sol = integrate_h(1, 0.5, 0, "S1", 0.0, x_max=5.0)
    assert np.all(1 - sol.hs**2 > 0)
    # the S1 profile oscillates, so h' changes sign
    assert sol.dhs.min() < 0 < sol.dhs.max()
    s2 = integrate_h(1, 0.5, 0, "S2", 2.0)
    assert np.all(s2.hs**2 - 1 > 0)


def test_acceleration_is_exact():
    sol = integrate_h(1, 0.5, 0, "S1", 0.3, x_max=0.5)
    poly = hode.profile_polynomial(1, 0.5, 0, "S1")
    assert sol.ddhs == pytest.approx(0.5 * poly.deriv()(sol.hs), abs=1e-14)


def test_dense_state_matches_nodes():
    sol = integrate_h(1, 0.5, 0, "S1", 0.0, x_max=1.0)
    h, p = sol.state(0.5)
    assert h == pytest.approx(sol.hs[500]) and p == pytest.approx(sol.dhs[500])
    h, p = sol.state(0.5004)
    assert abs(p * p - sol.P(h)) < 1e-10


def test_early_halt_is_reported():
    sol = integrate_h(1, 0.5, 0, "S2", 2.0, slope_sign=1, x_max=50)
    assert sol.halt_reason in ("h_cap", "domain")
    assert sol.admissible_range[1] < 50


@pytest.mark.parametrize("args", [
    (1, 0.5, 0, "S1", 2.0),     # outside a - h^2 > 0
    (1, -0.5, 0, "S1", 0.0),    # b <= 0
    (-1, 0.5, 0, "S1", 0.0),    # S1 needs a > 0
    (1, 0.5, 0, "S3", 0.0),
    (2, 1.0, 0, "S1", 1.3),     # P(h0) < 0
])
def test_preconditions(args):
    with pytest.raises(ProfileError):
        integrate_h(*args)


def test_default_h0_is_admissible():
    for variant, a in (("S1", 1.0), ("S2", 1.0)):
        h0 = hode.default_h0(a, 0.5, 0.0, variant)
        sol = integrate_h(a, 0.5, 0.0, variant, h0, x_max=0.1)
        assert sol.P(h0) > 0
