"""Pointwise extrinsic geometry of a surface in S^2 x H^2.

Everything is computed from an :class:`~pmcsurf.surfaces.ImmersionJet`.
Chart quantities use the coordinate basis (Phi_x, Phi_y); matrices of
tensors (f, A_xi) are expressed in the orthonormal frame
e1 = Phi_x/|Phi_x|, e2 = Gram-Schmidt(Phi_y).
"""

import math
from dataclasses import dataclass, asdict

import numpy as np

from . import ambient as amb
from .ambient import GeometryError, minkowski_inner as ip
from .surfaces import eval_jet

TAU_RANK = 1e-10
TAU_CONFORMAL = 1e-6
DEFAULT_FD_STEP = 1e-4

CSV_COLUMNS = ("x", "y", "E", "F", "G", "u", "Hnorm2", "theta_re", "theta_im", "C1", "C2",
               "smin_dphi", "smin_dpsi", "pmc_residual", "pseudo_umbilical")


def metric(jet):
    g = np.array([[ip(jet.Phi_x, jet.Phi_x), ip(jet.Phi_x, jet.Phi_y)],
                  [ip(jet.Phi_y, jet.Phi_x), ip(jet.Phi_y, jet.Phi_y)]], dtype=float)
    if np.linalg.det(g) <= TAU_RANK:
        raise GeometryError("rank-deficient jet (Gram determinant below tolerance)")
    return g


def is_conformal(jet, tol=TAU_CONFORMAL):
    g = metric(jet)
    return abs(g[0, 0] - g[1, 1]) <= tol * g[0, 0] and abs(g[0, 1]) <= tol * g[0, 0]


def normal_part(jet, w, g=None):
    """Component of w in R^6_1 normal to Sigma inside T(S^2 x H^2)."""
    g = metric(jet) if g is None else g
    w = amb.tangent_project(jet.Phi, w)
    c = np.linalg.solve(g, np.array([ip(w, jet.Phi_x), ip(w, jet.Phi_y)]))
    return w - c[0] * jet.Phi_x - c[1] * jet.Phi_y


def tangent_part(jet, w, g=None):
    """Chart coefficients of the Sigma-tangent component of w."""
    g = metric(jet) if g is None else g
    return np.linalg.solve(g, np.array([ip(w, jet.Phi_x), ip(w, jet.Phi_y)]))


def second_fundamental(jet):
    """h(d_x, d_x), h(d_x, d_y), h(d_y, d_y)."""
    g = metric(jet)
    return tuple(normal_part(jet, jet.d(i, j), g) for i, j in ((2, 0), (1, 1), (0, 2)))


def mean_curvature(jet):
    g = metric(jet)
    hxx, hxy, hyy = second_fundamental(jet)
    gi = np.linalg.inv(g)
    H = 0.5 * (gi[0, 0] * hxx + 2 * gi[0, 1] * hxy + gi[1, 1] * hyy)
    return H, float(ip(H, H))


def tangent_frame(jet):
    """Orthonormal (e1, e2) with e1 along Phi_x; same orientation as (d_x, d_y)."""
    e1 = jet.Phi_x / math.sqrt(ip(jet.Phi_x, jet.Phi_x))
    w = jet.Phi_y - ip(jet.Phi_y, e1) * e1
    return e1, w / math.sqrt(ip(w, w))


def frame_coefficients(jet):
    """2x2 matrix P with (e1, e2) = (d_x, d_y) P."""
    e1, e2 = tangent_frame(jet)
    g = metric(jet)
    return np.column_stack([tangent_part(jet, e1, g), tangent_part(jet, e2, g)])


def normal_frame(jet):
    """Orthonormal basis of the normal plane of Sigma in T(S^2 x H^2).

    The plane is the Minkowski-orthogonal complement of
    span{Phi_x, Phi_y, Phi, Phi_hat}; it is found as the null space of a
    4x6 matrix and then orthonormalized with the (positive) ambient metric.
    """
    rows = np.array([jet.Phi_x, jet.Phi_y, jet.Phi, amb.hat(jet.Phi)]) * amb.ETA
    _, _, vt = np.linalg.svd(rows)
    basis = [vt[4], vt[5]]
    out = []
    for v in basis:
        for q in out:
            v = v - ip(v, q) * q
        out.append(v / math.sqrt(ip(v, v)))
    return out


def shape_matrix(jet, xi, route="projected"):
    """Matrix of A_xi in the orthonormal frame (e1, e2).

    ``route='projected'`` pairs xi with h(e_a, e_b); ``route='weingarten'``
    pairs xi with the raw second derivatives, i.e. uses
    <A_xi X, Y> = -<D_X xi, Y> = <xi, D_X Y>.
    """
    P = frame_coefficients(jet)
    if route == "projected":
        hxx, hxy, hyy = second_fundamental(jet)
    elif route == "weingarten":
        hxx, hxy, hyy = jet.Phi_xx, jet.Phi_xy, jet.Phi_yy
    else:
        raise ValueError(route)
    chart = np.array([[ip(hxx, xi), ip(hxy, xi)], [ip(hxy, xi), ip(hyy, xi)]])
    return P.T @ chart @ P


def f_matrix(jet):
    """f = (F .)^T on T Sigma, in the frame (e1, e2)."""
    e = tangent_frame(jet)
    return np.array([[ip(amb.product_structure(a), b) for b in e] for a in e])


def f_perp_matrix(jet, normals=None):
    n = normal_frame(jet) if normals is None else normals
    return np.array([[ip(amb.product_structure(a), b) for b in n] for a in n])


def adj(m):
    return np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]])


def hopf_coefficient(jet, H=None):
    """4<h(d_z, d_z), H> + <F d_z, d_z> in the given conformal chart."""
    if not is_conformal(jet):
        raise GeometryError("hopf_coefficient needs a conformal chart")
    if H is None:
        H, _ = mean_curvature(jet)
    hxx, hxy, hyy = second_fundamental(jet)
    hzz = (hxx - hyy - 2j * hxy) / 4
    dz = (jet.Phi_x - 1j * jet.Phi_y) / 2
    return complex(4 * ip(hzz, H) + ip(amb.product_structure(dz), dz))


def kahler_functions(jet):
    g = metric(jet)
    area = math.sqrt(np.linalg.det(g))
    return tuple(float(ip(amb.apply_J(j, jet.Phi, jet.Phi_x), jet.Phi_y)) / area for j in (1, 2))


def projection_rank_defect(jet):
    """Smallest singular values of d(pi_1 o Phi) and d(pi_2 o Phi) w.r.t. the induced metric."""
    g = metric(jet)
    d = [jet.Phi_x, jet.Phi_y]
    gs = np.array([[a[:3] @ b[:3] for b in d] for a in d])
    gh = np.array([[amb.lorentz_inner3(a[3:], b[3:]) for b in d] for a in d])
    L = np.linalg.cholesky(g)
    Li = np.linalg.inv(L)
    out = []
    for m in (gs, gh):
        lam = np.linalg.eigvalsh(Li @ m @ Li.T)
        out.append(math.sqrt(max(lam[0], 0.0)))
    return tuple(out)


@dataclass
class ShapeData:
    A_H: np.ndarray
    A_perp: np.ndarray
    f_mat: np.ndarray
    pseudo_umbilical: bool
    ricci_residual: float
    ah_residual: float
    relation_residual: float


def shape_and_f(jet):
    H, n2 = mean_curvature(jet)
    n1, n2v = normal_frame(jet)
    A_H = shape_matrix(jet, H)
    norm = math.sqrt(n2)
    if norm > 0:
        Ht = _rotate_normal(H / norm, (n1, n2v)) * norm
    else:
        Ht = n2v
    A_perp = shape_matrix(jet, Ht)
    f = f_matrix(jet)
    tau = 1e-7 * (1 + np.abs(A_H).max())
    pu = bool(np.abs(A_H - n2 * np.eye(2)).max() < tau)
    A1, A2 = shape_matrix(jet, n1), shape_matrix(jet, n2v)
    ricci = float(np.abs(A1 @ A2 - A2 @ A1).max())
    ah = float(np.abs(A_H - (n2 * np.eye(2) - f / 8 + adj(f) / 8)).max())
    rel = max(float(np.abs(shape_matrix(jet, xi) - shape_matrix(jet, xi, "weingarten")).max()) for xi in (H, Ht))
    return ShapeData(A_H, A_perp, f, pu, ricci, ah, rel)


def _rotate_normal(eta, normals):
    """Unit normal orthogonal to eta, turned by +90 degrees in the basis ``normals``."""
    a, b = ip(eta, normals[0]), ip(eta, normals[1])
    return -b * normals[0] + a * normals[1]


def pmc_residual(spec, x, y, fd_step=DEFAULT_FD_STEP):
    """|nabla^perp H| along the chart directions (per unit length).

    H is evaluated from analytic jets at the four neighbours (x +- d, y),
    (x, y +- d); the central difference is projected onto the normal plane.
    """
    if not spec.contains(x, y, margin=fd_step):
        raise GeometryError("chart point closer to the boundary than fd_step")
    jet = eval_jet(spec, x, y, order=2)
    g = metric(jet)
    out = 0.0
    for k, (dx, dy) in enumerate(((fd_step, 0.0), (0.0, fd_step))):
        hp, _ = mean_curvature(eval_jet(spec, x + dx, y + dy, order=2))
        hm, _ = mean_curvature(eval_jet(spec, x - dx, y - dy, order=2))
        dH = (hp - hm) / (2 * fd_step)
        v = normal_part(jet, dH, g)
        out = max(out, math.sqrt(max(ip(v, v), 0.0) / g[k, k]))
    return out


def christoffel(jet):
    """Gamma[l, k, i] = Gamma^l_{ki} of the induced metric, from the 2-jet."""
    g = metric(jet)
    gi = np.linalg.inv(g)
    d = [jet.Phi_x, jet.Phi_y]
    second = {(0, 0): jet.Phi_xx, (0, 1): jet.Phi_xy, (1, 0): jet.Phi_xy, (1, 1): jet.Phi_yy}
    low = np.array([[[ip(second[k, i], d[m]) for m in range(2)] for i in range(2)] for k in range(2)])
    return np.einsum("lm,kim->lki", gi, low)


def _nabla_bar_h(jet, delta):
    """(nabla-bar h)_k(ij) as an array [k, i, j] of normal vectors."""
    hs = {(0, 0): 0, (0, 1): 1, (1, 0): 1, (1, 1): 2}
    h0 = second_fundamental(jet)
    dh = []
    for dx, dy in ((delta, 0.0), (0.0, delta)):
        hp = second_fundamental(jet.shifted(dx, dy))
        hm = second_fundamental(jet.shifted(-dx, -dy))
        dh.append([(a - b) / (2 * delta) for a, b in zip(hp, hm)])
    gam = christoffel(jet)
    g = metric(jet)
    out = np.zeros((2, 2, 2, 6))
    for k in range(2):
        for i in range(2):
            for j in range(2):
                v = normal_part(jet, dh[k][hs[i, j]], g)
                for l in range(2):
                    v = v - gam[l, k, i] * h0[hs[l, j]] - gam[l, k, j] * h0[hs[i, l]]
                out[k, i, j] = v
    return out


def codazzi_residual(jet, X, Y, Z, delta=1e-4):
    """|(nb h)(X,Y,Z) - (nb h)(Y,X,Z) - (1/2)(F (X^Y) Z)^perp| for chart vectors X, Y, Z.

    Derivatives of h come from central differences of 2-jets re-expanded from
    the order-3 jet at distance ``delta``.
    """
    if jet.order < 3:
        raise GeometryError("codazzi_residual needs an order-3 jet")
    X, Y, Z = (np.asarray(v, dtype=float) for v in (X, Y, Z))
    nb = _nabla_bar_h(jet, delta)
    lhs = np.einsum("k,i,j,kijn->n", X, Y, Z, nb) - np.einsum("k,i,j,kijn->n", Y, X, Z, nb)
    d = np.array([jet.Phi_x, jet.Phi_y])
    vx, vy, vz = X @ d, Y @ d, Z @ d
    rhs = 0.5 * normal_part(jet, amb.product_structure(amb.wedge(vx, vy, vz)))
    r = lhs - rhs
    return math.sqrt(max(ip(r, r), 0.0))


def codazzi_rhs_curvature(jet, X, Y, Z):
    """(R(X,Y)Z)^perp from the ambient curvature tensor (cross-check of the right-hand side)."""
    d = np.array([jet.Phi_x, jet.Phi_y])
    vx, vy, vz = (np.asarray(v, dtype=float) @ d for v in (X, Y, Z))
    return normal_part(jet, amb.riemann_tensor(vx, vy, vz))


@dataclass
class ExtrinsicReport:
    x: float
    y: float
    E: float
    F: float
    G: float
    u: float
    Hnorm2: float
    theta_re: float
    theta_im: float
    C1: float
    C2: float
    smin_dphi: float
    smin_dpsi: float
    pmc_residual: float
    pseudo_umbilical: bool
    H_vec: np.ndarray = None
    A_H: np.ndarray = None
    A_perp: np.ndarray = None
    f_mat: np.ndarray = None
    ricci_residual: float = float("nan")
    ah_residual: float = float("nan")
    relation_residual: float = float("nan")

    @property
    def theta(self):
        return complex(self.theta_re, self.theta_im)

    def row(self):
        return [getattr(self, c) for c in CSV_COLUMNS]

    def to_dict(self):
        out = {}
        for k, v in asdict(self).items():
            out[k] = v.tolist() if isinstance(v, np.ndarray) else v
        return out


def analyze(spec, x, y, fd_step=DEFAULT_FD_STEP, with_pmc=True):
    """Full pointwise report at a chart point of ``spec``."""
    jet = eval_jet(spec, x, y, order=2)
    g = metric(jet)
    E, F, G = g[0, 0], g[0, 1], g[1, 1]
    conformal = is_conformal(jet)
    u = 0.5 * math.log(E) if conformal else float("nan")
    H, n2 = mean_curvature(jet)
    theta = hopf_coefficient(jet, H) if conformal else complex("nan")
    C1, C2 = kahler_functions(jet)
    s1, s2 = projection_rank_defect(jet)
    sd = shape_and_f(jet)
    pmc = pmc_residual(spec, x, y, fd_step) if with_pmc else float("nan")
    return ExtrinsicReport(
        x, y, E, F, G, u, n2, theta.real, theta.imag, C1, C2, s1, s2, pmc, sd.pseudo_umbilical,
        H, sd.A_H, sd.A_perp, sd.f_mat, sd.ricci_residual, sd.ah_residual, sd.relation_residual)
