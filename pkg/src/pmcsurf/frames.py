"""Complex Frenet data and the real adapted frame of a PMC surface.

Frenet data (conformal chart, H != 0)
    eta = H/|H|, eta~ completes (e1, e2, eta~, eta) to a positive frame,
    xi = (eta - i eta~)/sqrt(2), f1 = <Phi_zz, conj(xi)>, f2 = <Phi_zz, xi>.
    gamma_j is the normal coefficient of J_j d_z:

        J_1 d_z = i C_1 d_z + gamma_1 xi,    J_2 d_z = i C_2 d_z + gamma_2 conj(xi).

    With this choice |gamma_j|^2 = e^{2u}(1 - C_j^2)/2 and
    gamma_1 gamma_2 = <F d_z, d_z> hold identically, and the z-derivative
    relations come out with the signs used in :func:`frenet_pde_residuals`.

Adapted frame (off pseudo-umbilical points)
    X1, X2 diagonalize f = (F .)^T with cos(alpha) > cos(beta); xi_1, xi_2
    diagonalize f^perp with eigenvalues -cos(alpha), -cos(beta).
"""

import math
from dataclasses import dataclass

import numpy as np

from . import ambient as amb
from . import extrinsic as ex
from .ambient import GeometryError, minkowski_inner as ip
from .surfaces import eval_jet

DEFAULT_FD_STEP = 1e-3
SQ2 = math.sqrt(2.0)
TAU_SIN = 1e-8


@dataclass
class FrenetData:
    x: float
    y: float
    u: float
    C1: float
    C2: float
    gamma1: complex
    gamma2: complex
    f1: complex
    f2: complex
    Hnorm: float
    xi: np.ndarray
    dz: np.ndarray
    Phi: np.ndarray

    def invariants(self):
        """Residuals of the pointwise identities."""
        e2u = math.exp(2 * self.u)
        F_dz = amb.product_structure(self.dz)
        xi, xib = self.xi, np.conj(self.xi)
        return {
            "gammanorm1": abs(abs(self.gamma1) ** 2 - e2u / 2 * (1 - self.C1**2)),
            "gammanorm2": abs(abs(self.gamma2) ** 2 - e2u / 2 * (1 - self.C2**2)),
            "gamma_product": abs(self.gamma1 * self.gamma2 - ip(F_dz, self.dz)),
            "xi_norm": max(abs(ip(xi, xib) - 1), abs(ip(xi, xi))),
            "F_xi": max(abs(ip(F_dz, xi) + 1j * self.C1 * self.gamma2),
                        abs(ip(F_dz, xib) + 1j * self.C2 * self.gamma1)),
        }

    @property
    def hopf_alternative(self):
        return 2 * SQ2 * self.Hnorm * (self.f1 + self.f2) + self.gamma1 * self.gamma2


def frenet_data(jet):
    if not ex.is_conformal(jet):
        raise GeometryError("frenet_data needs a conformal chart")
    g = ex.metric(jet)
    E = g[0, 0]
    H, n2 = ex.mean_curvature(jet)
    if n2 <= 1e-20:
        raise GeometryError("mean curvature vanishes; eta = H/|H| undefined")
    norm = math.sqrt(n2)
    eta = H / norm
    eta_t = ex._rotate_normal(eta, ex.normal_frame(jet))
    eu = math.sqrt(E)
    if amb.orientation_sign(jet.Phi, [jet.Phi_x / eu, jet.Phi_y / eu, eta_t, eta]) < 0:
        eta_t = -eta_t
    xi = (eta - 1j * eta_t) / SQ2
    dz = (jet.Phi_x - 1j * jet.Phi_y) / 2
    zz = (jet.Phi_xx - jet.Phi_yy - 2j * jet.Phi_xy) / 4
    C1, C2 = ex.kahler_functions(jet)
    g1 = complex(ip(amb.apply_J(1, jet.Phi, dz), np.conj(xi)))
    g2 = complex(ip(amb.apply_J(2, jet.Phi, dz), xi))
    return FrenetData(jet.x, jet.y, 0.5 * math.log(E), C1, C2, g1, g2,
                      complex(ip(zz, np.conj(xi))), complex(ip(zz, xi)), norm, xi, dz, jet.Phi)


def _stencil(spec, x, y, step, fn):
    """fn at the centre and the four axis neighbours; returns (centre, d/dx, d/dy)."""
    if not spec.contains(x, y, margin=step):
        raise GeometryError("chart point closer to the boundary than the FD step")
    c = fn(eval_jet(spec, x, y, order=2))
    vals = [fn(eval_jet(spec, x + dx, y + dy, order=2)) for dx, dy in
            ((step, 0), (-step, 0), (0, step), (0, -step))]
    return c, vals


def frenet_pde_residuals(spec, x, y, fd_step=DEFAULT_FD_STEP):
    """Residual magnitudes of the z-derivative relations of the Frenet system."""
    c, nb = _stencil(spec, x, y, fd_step, frenet_data)

    def dxy(attr):
        vals = [getattr(n, attr) for n in nb]
        return (vals[0] - vals[1]) / (2 * fd_step), (vals[2] - vals[3]) / (2 * fd_step)

    def dz(attr):
        a, b = dxy(attr)
        return (a - 1j * b) / 2

    def dzb(attr):
        a, b = dxy(attr)
        return (a + 1j * b) / 2

    e2u = math.exp(2 * c.u)
    nh = c.Hnorm
    out = {}
    for j, (C, g, f) in enumerate(((c.C1, c.gamma1, c.f1), (c.C2, c.gamma2, c.f2)), start=1):
        out[f"dzC{j}"] = abs(dz(f"C{j}") - (2j / e2u * np.conj(g) * f - 1j * nh / SQ2 * g))
        out[f"dzbgamma{j}"] = abs(dzb(f"gamma{j}") + 1j * nh * e2u * C / SQ2)
        out[f"dzgamma{j}"] = abs(dz(f"gamma{j}") - (2 * dz("u") * g - 2j * C * f))
    out["dzbf1"] = abs(dzb("f1") - 1j * e2u / 4 * c.C2 * c.gamma1)
    out["dzbf2"] = abs(dzb("f2") - 1j * e2u / 4 * c.C1 * c.gamma2)
    return {k: float(v) for k, v in out.items()}


# -- adapted frame ----------------------------------------------------------

@dataclass
class AdaptedFrame:
    X1: np.ndarray
    X2: np.ndarray
    xi1: np.ndarray
    xi2: np.ndarray
    alpha: float
    beta: float
    gamma_angle: float
    nu: float
    Hnorm: float
    chart1: np.ndarray
    chart2: np.ndarray
    hxx: tuple
    h12: tuple

    @property
    def dcos(self):
        return math.cos(self.alpha) - math.cos(self.beta)

    def h(self, i, j):
        """<h(X_i, X_i), xi_j> with 1-based indices."""
        return self.hxx[i - 1][j - 1]

    def f_matrix_residual(self):
        basis = [self.X1, self.X2, self.xi1, self.xi2]
        m = np.array([[ip(amb.product_structure(a), b) for b in basis] for a in basis])
        ca, sa, cb, sb = math.cos(self.alpha), math.sin(self.alpha), math.cos(self.beta), math.sin(self.beta)
        ref = np.array([[ca, 0, sa, 0], [0, cb, 0, sb], [sa, 0, -ca, 0], [0, sb, 0, -cb]])
        return float(np.abs(m - ref).max())

    def identities(self):
        """Residuals of the algebraic relations (A_H, A_H~, <h(X_i,X_i), xi_j>)."""
        nh, d, g, nu = self.Hnorm, self.dcos, self.gamma_angle, self.nu
        cg, sg = math.cos(g), math.sin(g)
        exp = {
            (1, 1): nh * cg - (cg + nu * sg) * d / (8 * nh),
            (1, 2): nh * sg - (sg - nu * cg) * d / (8 * nh),
            (2, 1): nh * cg + (cg + nu * sg) * d / (8 * nh),
            (2, 2): nh * sg + (sg - nu * cg) * d / (8 * nh),
        }
        hx = max(abs(self.h(i, j) - v) for (i, j), v in exp.items())
        # A_H and A_H~ in (X1, X2); <h(X_i,X_i),H> = |H| (cos g h_i1 + sin g h_i2)
        ah = [nh * (cg * self.h(i, 1) + sg * self.h(i, 2)) for i in (1, 2)]
        aht = [nh * (-sg * self.h(i, 1) + cg * self.h(i, 2)) for i in (1, 2)]
        matrix_ah = max(abs(ah[0] - (nh**2 - d / 8)), abs(ah[1] - (nh**2 + d / 8)), abs(self.h12[0]))
        matrix_aht = max(abs(aht[0] - nu * d / 8), abs(aht[1] + nu * d / 8), abs(self.h12[1]))
        return {"hXiXixij": hx, "matrixAH": matrix_ah, "matrixHtilde": matrix_aht}

    def nucomp(self, tol=1e-4):
        """Which disjunct of the (i)/(ii)/(iii) alternative holds, by residual."""
        g, nu = self.gamma_angle, self.nu
        r3 = 8 * self.Hnorm**2 + self.dcos * ((1 - nu * nu) * math.cos(2 * g) + 2 * nu * math.sin(2 * g))
        res = {"i": abs(math.sin(self.alpha)), "ii": abs(math.sin(self.beta)), "iii": abs(r3)}
        holds = [k for k, v in res.items() if v < tol]
        return {"residuals": res, "holds": holds}


def _unwrap(angle, ref):
    return angle + 2 * math.pi * round((ref - angle) / (2 * math.pi))


def adapted_frame(jet, reference=None, flip=False):
    """Adapted frame at ``jet``.

    Without ``reference`` signs follow the fixed rules: <X1, d_x> >= 0, X2 is
    X1 turned by +90 degrees, and <F X_i, xi_i> >= 0 (falling back to
    <H, xi_i> >= 0 where sin vanishes). With ``reference`` (a frame at a
    nearby point) every sign is chosen by continuity instead. ``flip``
    applies the gauge change (X1, xi1) -> (-X1, -xi1).
    """
    g = ex.metric(jet)
    H, n2 = ex.mean_curvature(jet)
    if n2 <= 1e-20:
        raise GeometryError("mean curvature vanishes")
    e1, e2 = ex.tangent_frame(jet)
    f = ex.f_matrix(jet)
    lam, vec = np.linalg.eigh(f)
    scale = 1e-7 * (1 + np.abs(f).max())
    if lam[1] - lam[0] < scale:
        raise GeometryError("pseudo-umbilical point: f has a double eigenvalue")
    # cos(alpha) is the larger eigenvalue
    X1 = vec[0, 1] * e1 + vec[1, 1] * e2
    normals = ex.normal_frame(jet)
    fp = ex.f_perp_matrix(jet, normals)
    mu, nvec = np.linalg.eigh(fp)
    xi1 = nvec[0, 0] * normals[0] + nvec[1, 0] * normals[1]  # eigenvalue -cos(alpha)
    xi2 = nvec[0, 1] * normals[0] + nvec[1, 1] * normals[1]

    if reference is None:
        if ip(X1, jet.Phi_x) < 0:
            X1 = -X1
        X2 = ex._rotate_normal(X1, (e1, e2))
        xis = []
        for X, xi in ((X1, xi1), (X2, xi2)):
            s = ip(amb.product_structure(X), xi)
            if abs(s) > TAU_SIN:
                xi = xi if s > 0 else -xi
            elif ip(H, xi) < 0:
                xi = -xi
            xis.append(xi)
        xi1, xi2 = xis
        if flip:
            X1, xi1 = -X1, -xi1
    else:
        if abs(ip(X1, reference.X1)) < 0.5 or abs(ip(xi1, reference.xi1)) < 0.5:
            raise GeometryError("frame discontinuity: eigenvalue crossing inside the stencil")
        X1 = X1 if ip(X1, reference.X1) > 0 else -X1
        X2 = ex._rotate_normal(X1, (e1, e2))
        X2 = X2 if ip(X2, reference.X2) > 0 else -X2
        xi1 = xi1 if ip(xi1, reference.xi1) > 0 else -xi1
        xi2 = xi2 if ip(xi2, reference.xi2) > 0 else -xi2

    FX1, FX2 = amb.product_structure(X1), amb.product_structure(X2)
    alpha = math.atan2(ip(FX1, xi1), ip(FX1, X1))
    beta = math.atan2(ip(FX2, xi2), ip(FX2, X2))
    norm = math.sqrt(n2)
    gam = math.atan2(ip(H, xi2), ip(H, xi1))
    if reference is not None:
        alpha = _unwrap(alpha, reference.alpha)
        beta = _unwrap(beta, reference.beta)
        gam = _unwrap(gam, reference.gamma_angle)
    Ht = norm * (-math.sin(gam) * xi1 + math.cos(gam) * xi2)

    c1, c2 = ex.tangent_part(jet, X1, g), ex.tangent_part(jet, X2, g)
    hxx_, hxy_, hyy_ = ex.second_fundamental(jet)

    def h(a, b):
        return a[0] * b[0] * hxx_ + (a[0] * b[1] + a[1] * b[0]) * hxy_ + a[1] * b[1] * hyy_

    h11, h22, h12 = h(c1, c1), h(c2, c2), h(c1, c2)
    dcos = math.cos(alpha) - math.cos(beta)
    # A_{H~} = diag(nu d, -nu d)/8 in (X1, X2)
    nu = 8 * ip(h11, Ht) / dcos
    hxx = ((ip(h11, xi1), ip(h11, xi2)), (ip(h22, xi1), ip(h22, xi2)))
    return AdaptedFrame(X1, X2, xi1, xi2, alpha, beta, gam, nu, norm, c1, c2, hxx,
                        (ip(h12, H), ip(h12, Ht)))


def adapted_pde_residuals(spec, x, y, fd_step=DEFAULT_FD_STEP, flip=False):
    """Residuals of the first-order PDEs of the adapted frame at (x, y).

    Directional derivatives X_i(g) = a d_x g + b d_y g use central
    differences with all stencil frames sign-matched to the centre frame.
    """
    if not spec.contains(x, y, margin=fd_step):
        raise GeometryError("chart point closer to the boundary than the FD step")
    c = adapted_frame(eval_jet(spec, x, y, order=2), flip=flip)
    nb = []
    for dx, dy in ((fd_step, 0), (-fd_step, 0), (0, fd_step), (0, -fd_step)):
        nb.append(adapted_frame(eval_jet(spec, x + dx, y + dy, order=2), reference=c))

    def grad(get):
        v = [get(n) for n in nb]
        return (v[0] - v[1]) / (2 * fd_step), (v[2] - v[3]) / (2 * fd_step)

    def along(chart, get):
        gx, gy = grad(get)
        return chart[0] * gx + chart[1] * gy

    d = c.dcos
    sa, sb = math.sin(c.alpha), math.sin(c.beta)
    nh, gm, nu = c.Hnorm, c.gamma_angle, c.nu
    out = {
        "X1alpha": abs(along(c.chart1, lambda f: f.alpha) + 2 * c.h(1, 1)),
        "X2alpha": abs(along(c.chart2, lambda f: f.alpha)),
        "X1beta": abs(along(c.chart1, lambda f: f.beta)),
        "X2beta": abs(along(c.chart2, lambda f: f.beta) + 2 * c.h(2, 2)),
        "X1gamma": abs(along(c.chart1, lambda f: f.gamma_angle) + sa / d * c.h(1, 2)),
        "X2gamma": abs(along(c.chart2, lambda f: f.gamma_angle) + sb / d * c.h(2, 1)),
        "X1nu": abs(along(c.chart1, lambda f: f.nu) - 4 * nh * sa * (math.sin(gm) - nu * math.cos(gm)) / d),
        "X2nu": abs(along(c.chart2, lambda f: f.nu) - 4 * nh * sb * (math.cos(gm) + nu * math.sin(gm)) / d),
    }
    # <nabla_{X1} X1, X2> and <nabla_{X2} X1, X2> from the ambient derivative of X1
    D1 = along(c.chart1, lambda f: f.X1)
    D2 = along(c.chart2, lambda f: f.X1)
    out["nablaX1X1"] = abs(ip(D1, c.X2) - sb / d * c.h(1, 2))
    out["nablaX2X1"] = abs(ip(D2, c.X2) - sa / d * c.h(2, 1))
    return {k: float(v) for k, v in out.items()}


def sin_product(frame):
    return abs(math.sin(frame.alpha) * math.sin(frame.beta))
