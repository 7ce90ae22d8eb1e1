import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pmcsurf import ambient as amb
from pmcsurf import curves
from pmcsurf import extrinsic as ex
from pmcsurf.ambient import GeometryError, minkowski_inner as ip
from pmcsurf.surfaces import ImmersionJet, SurfaceSpec, eval_jet, eval_jet_fd, sample_grid

PMC_SPECS = [
    SurfaceSpec("curve_product", {"k_alpha": 1.0, "k_beta": 0.5}),
    SurfaceSpec("special_1", {"a": 2.0, "b": 0.5, "c": 0.0}),
    SurfaceSpec("special_2", {"a": 1.25, "b": 0.5, "c": 0.5, "h0": 2.5, "slope_sign": -1}),
    SurfaceSpec("lift_H2xR", {"generator": {"kind": "rotational", "H": 0.7}}),
]


@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(0.2, 2.8), st.floats(-1.4, 1.4))
@settings(max_examples=40, deadline=None)
def test_product_mean_curvature_from_curves(ka, kb, x, y):
    if ka == 0 and kb == 0:
        ka = 0.5
    spec = SurfaceSpec("curve_product", {"k_alpha": ka, "k_beta": kb})
    H, n2 = ex.mean_curvature(eval_jet(spec, x, y))
    a, b = curves.sphere_circle(ka, x), curves.hyperbolic_constant_curvature(kb, y)
    # tangential accelerations of the unit-speed factor curves
    oracle = 0.5 * np.concatenate([a.d2 + a.pos, b.d2 - b.pos])
    assert np.abs(H - oracle).max() < 1e-10
    assert n2 == pytest.approx(ip(oracle, oracle), abs=1e-10)


@pytest.mark.parametrize("spec", PMC_SPECS)
def test_analytic_and_fd_routes_agree(spec):
    for x, y in sample_grid(spec, 3, 3, margin=0.2):
        a, f = eval_jet(spec, x, y, order=2), eval_jet_fd(spec, x, y, step=1e-4)
        Ha, na = ex.mean_curvature(a)
        Hf, nf = ex.mean_curvature(f)
        assert np.abs(Ha - Hf).max() < 1e-5
        assert abs(ex.hopf_coefficient(a) - ex.hopf_coefficient(f)) < 1e-5
        assert np.allclose(ex.kahler_functions(a), ex.kahler_functions(f), atol=1e-6)


@pytest.mark.parametrize("lam", [0.5, 2.0, 3.0])
def test_chart_rescaling(lam):
    jet = eval_jet(PMC_SPECS[1], *sample_grid(PMC_SPECS[1], 3, 3)[4])
    r = jet.rescaled(lam)
    H0, n0 = ex.mean_curvature(jet)
    H1, n1 = ex.mean_curvature(r)
    assert np.allclose(H0, H1, atol=1e-12)
    assert ex.hopf_coefficient(r) == pytest.approx(lam**2 * ex.hopf_coefficient(jet), abs=1e-12)
    assert np.allclose(ex.kahler_functions(r), ex.kahler_functions(jet), atol=1e-12)


def test_non_conformal_chart_is_rejected():
    jet = eval_jet(PMC_SPECS[0], 1.0, 0.3)
    p = jet.partials.copy()
    p[0, 1] = p[0, 1] + p[1, 0]
    sheared = ImmersionJet(jet.x, jet.y, p, 1)
    assert not ex.is_conformal(sheared)
    with pytest.raises(GeometryError):
        ex.hopf_coefficient(sheared)


@pytest.mark.parametrize("spec", PMC_SPECS)
def test_frames_and_kaehler_bounds(spec):
    for x, y in sample_grid(spec, 3, 3, margin=0.1):
        jet = eval_jet(spec, x, y, order=2)
        n1, n2 = ex.normal_frame(jet)
        for v in (n1, n2):
            assert abs(ip(v, jet.Phi_x)) < 1e-10 and abs(ip(v, jet.Phi_y)) < 1e-10
            assert abs(ip(v, jet.Phi)) < 1e-10
        assert abs(ip(n1, n2)) < 1e-12
        C1, C2 = ex.kahler_functions(jet)
        assert abs(C1) <= 1 + 1e-12 and abs(C2) <= 1 + 1e-12
        f = ex.f_matrix(jet)
        # F is an involution: f^2 + (normal block)^2 terms leave |f| <= 1
        assert np.abs(np.linalg.eigvalsh(f)).max() <= 1 + 1e-12
        assert abs(np.trace(f) + np.trace(ex.f_perp_matrix(jet))) < 1e-10


def test_curve_product_kaehler_and_projection():
    jet = eval_jet(PMC_SPECS[0], 1.0, 0.3)
    assert ex.kahler_functions(jet) == pytest.approx((0.0, 0.0), abs=1e-14)
    assert min(ex.projection_rank_defect(jet)) < 1e-7


@pytest.mark.parametrize("spec", PMC_SPECS)
def test_shape_operator_identities(spec):
    for x, y in sample_grid(spec, 3, 3, margin=0.1):
        sd = ex.shape_and_f(eval_jet(spec, x, y, order=2))
        assert sd.relation_residual < 1e-9
        assert sd.ricci_residual < 1e-6
        assert np.allclose(sd.A_H, sd.A_H.T)


def test_shape_matrix_route_validation():
    jet = eval_jet(PMC_SPECS[0], 1.0, 0.3)
    with pytest.raises(ValueError):
        ex.shape_matrix(jet, jet.Phi, route="guess")


@pytest.mark.parametrize("spec", PMC_SPECS)
def test_pmc_residual_small_on_pmc_surfaces(spec):
    for x, y in sample_grid(spec, 3, 3, margin=0.1):
        assert ex.pmc_residual(spec, x, y) < 1e-6


def test_pmc_residual_detects_perturbation():
    spec = SurfaceSpec("curve_product", {"k_alpha": 1.0, "k_beta": 0.5, "modulation": 0.01})
    worst = max(ex.pmc_residual(spec, x, y) for x, y in sample_grid(spec, 4, 2, margin=0.1))
    assert worst > 1e-3


def test_pmc_residual_needs_margin():
    spec = PMC_SPECS[0]
    with pytest.raises(GeometryError):
        ex.pmc_residual(spec, 0.0, 0.0)


@pytest.mark.parametrize("spec", PMC_SPECS[:3])
def test_codazzi_rhs_matches_curvature_tensor(spec):
    jet = eval_jet(spec, *sample_grid(spec, 3, 3)[4])
    d = np.array([jet.Phi_x, jet.Phi_y])
    for X, Y, Z in (((1, 0), (0, 1), (1, 0)), ((0, 1), (1, 0), (1, 1))):
        vx, vy, vz = (np.asarray(v, float) @ d for v in (X, Y, Z))
        half_F = 0.5 * ex.normal_part(jet, amb.product_structure(amb.wedge(vx, vy, vz)))
        assert np.abs(half_F - ex.codazzi_rhs_curvature(jet, X, Y, Z)).max() < 1e-12


@pytest.mark.parametrize("spec", PMC_SPECS[:3])
def test_codazzi_converges(spec):
    jet = eval_jet(spec, *sample_grid(spec, 3, 3)[4])
    r1 = ex.codazzi_residual(jet, (1, 0), (0, 1), (1, 0), delta=1e-3)
    r2 = ex.codazzi_residual(jet, (1, 0), (0, 1), (1, 0), delta=5e-4)
    assert r1 < 1e-3
    assert r1 < 1e-9 or r1 / r2 > 3


def test_codazzi_needs_third_order():
    jet = eval_jet(PMC_SPECS[0], 1.0, 0.3, order=2)
    with pytest.raises(GeometryError):
        ex.codazzi_residual(jet, (1, 0), (0, 1), (1, 0))


def test_analyze_row_order():
    rep = ex.analyze(PMC_SPECS[1], *sample_grid(PMC_SPECS[1], 3, 3)[4])
    row = rep.row()
    assert len(row) == len(ex.CSV_COLUMNS) == 15
    assert ex.CSV_COLUMNS[:3] == ("x", "y", "E") and ex.CSV_COLUMNS[-1] == "pseudo_umbilical"
    assert row[ex.CSV_COLUMNS.index("Hnorm2")] == rep.Hnorm2
    assert rep.u == pytest.approx(0.5 * np.log(rep.E))
    d = rep.to_dict()
    assert isinstance(d["H_vec"], list)
