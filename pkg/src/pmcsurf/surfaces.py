"""Example PMC immersions into S^2 x H^2 and their jets.

Every family is described by a serializable :class:`SurfaceSpec`. The
first use of a spec builds (and caches) an implementation object that can
expand the immersion as a degree-3 Taylor polynomial around any chart
point; :func:`eval_jet` turns that into an :class:`ImmersionJet`.

Families
--------
curve_product
    (alpha(x), beta(y)) with constant-curvature unit-speed factor curves.
    A non-zero ``modulation`` m integrates alpha with curvature
    k_alpha + m sin(x) instead (a deliberately non-PMC control).
special_1, special_2
    The two families built from the profile ODE of :mod:`pmcsurf.hode`.
lift_S2xR, lift_H2xR
    A CMC surface of S^2 x R (resp. H^2 x R) composed with the totally
    geodesic embedding that sends the R factor to a unit-speed geodesic of
    the other factor.
"""

import functools
import math
from dataclasses import dataclass, field

import numpy as np

from . import curves, hode, jets
from .ambient import GeometryError, membership_residual
from .jets import Taylor

FAMILIES = ("curve_product", "special_1", "special_2", "lift_S2xR", "lift_H2xR")
TAU_RANK = 1e-10


@dataclass
class SurfaceSpec:
    family: str
    params: dict
    domain: tuple = None
    _impl: object = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise GeometryError(f"unknown surface family {self.family!r}")

    @property
    def impl(self):
        if self._impl is None:
            self._impl = _BUILDERS[self.family](**self.params)
        return self._impl

    @property
    def chart_domain(self):
        if self.domain is not None:
            return tuple(tuple(map(float, d)) for d in self.domain)
        return self.impl.domain

    def contains(self, x, y, margin=0.0):
        (x0, x1), (y0, y1) = self.chart_domain
        return x0 + margin <= x <= x1 - margin and y0 + margin <= y <= y1 - margin

    def to_dict(self):
        out = {"family": self.family, "params": _jsonable(self.params)}
        if self.domain is not None:
            out["domain"] = [list(d) for d in self.domain]
        return out

    @classmethod
    def from_dict(cls, data):
        unknown = set(data) - {"family", "params", "domain"}
        if unknown:
            raise GeometryError(f"unknown surface fields: {sorted(unknown)}")
        dom = data.get("domain")
        return cls(data["family"], dict(data.get("params", {})), tuple(map(tuple, dom)) if dom else None)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


@dataclass(frozen=True)
class ImmersionJet:
    """Partial derivatives of the immersion at a chart point.

    ``partials[i, j]`` is d^(i+j) Phi / dx^i dy^j (a 6-vector) for
    i + j <= order; higher entries are zero.
    """

    x: float
    y: float
    partials: np.ndarray
    order: int = 3
    kind: str = "analytic"

    def d(self, i, j):
        return self.partials[i, j]

    @property
    def Phi(self):
        return self.partials[0, 0]

    @property
    def Phi_x(self):
        return self.partials[1, 0]

    @property
    def Phi_y(self):
        return self.partials[0, 1]

    @property
    def Phi_xx(self):
        return self.partials[2, 0]

    @property
    def Phi_xy(self):
        return self.partials[1, 1]

    @property
    def Phi_yy(self):
        return self.partials[0, 2]

    def shifted(self, dx, dy):
        """Degree-3 Taylor re-expansion at (x + dx, y + dy).

        Derivatives of order k come out with error O(|d|^(4-k)).
        """
        c = self.partials / jets._FACT[:, :, None]
        out = np.zeros_like(self.partials)
        for i in range(4):
            for j in range(4 - i):
                acc = np.zeros(6)
                for a in range(i, 4):
                    for b in range(j, 4 - a):
                        acc = acc + c[a, b] * math.comb(a, i) * math.comb(b, j) * dx ** (a - i) * dy ** (b - j)
                out[i, j] = acc * jets._FACT[i, j]
        return ImmersionJet(self.x + dx, self.y + dy, out, self.order, "taylor_shift")

    def rescaled(self, lam):
        """Jet of (x', y') -> Phi(lam x', lam y') at the corresponding point."""
        i, j = np.indices((4, 4))
        scale = float(lam) ** (i + j)
        return ImmersionJet(self.x / lam, self.y / lam, self.partials * scale[:, :, None], self.order, self.kind)


def eval_jet(spec, x, y, order=3, check_domain=True):
    """Analytic jet of the immersion of ``spec`` at (x, y)."""
    if order not in (1, 2, 3):
        raise ValueError("order must be 1, 2 or 3")
    if check_domain and not spec.contains(x, y):
        raise GeometryError(f"chart point ({x}, {y}) outside the domain {spec.chart_domain}")
    comps = spec.impl.series(float(x), float(y))
    partials = jets.stack(comps)
    i, j = np.indices((4, 4))
    partials[(i + j) > order] = 0.0
    return ImmersionJet(float(x), float(y), partials, order, "analytic")


def eval_point(spec, x, y):
    return eval_jet(spec, x, y, order=1, check_domain=False).Phi


def eval_jet_fd(spec, x, y, step=1e-4, order=2):
    """Jet by central finite differences of point evaluations (test oracle only)."""
    f = lambda a, b: eval_point(spec, a, b)
    p = np.zeros((4, 4, 6))
    h = step
    p[0, 0] = f(x, y)
    p[1, 0] = (f(x + h, y) - f(x - h, y)) / (2 * h)
    p[0, 1] = (f(x, y + h) - f(x, y - h)) / (2 * h)
    if order >= 2:
        p[2, 0] = (f(x + h, y) - 2 * p[0, 0] + f(x - h, y)) / h**2
        p[0, 2] = (f(x, y + h) - 2 * p[0, 0] + f(x, y - h)) / h**2
        p[1, 1] = (f(x + h, y + h) - f(x + h, y - h) - f(x - h, y + h) + f(x - h, y - h)) / (4 * h * h)
    if order >= 3:
        p[3, 0] = (f(x + 2 * h, y) - 2 * f(x + h, y) + 2 * f(x - h, y) - f(x - 2 * h, y)) / (2 * h**3)
        p[0, 3] = (f(x, y + 2 * h) - 2 * f(x, y + h) + 2 * f(x, y - h) - f(x, y - 2 * h)) / (2 * h**3)
        p[2, 1] = ((f(x + h, y + h) - 2 * f(x, y + h) + f(x - h, y + h))
                   - (f(x + h, y - h) - 2 * f(x, y - h) + f(x - h, y - h))) / (2 * h**3)
        p[1, 2] = ((f(x + h, y + h) - 2 * f(x + h, y) + f(x + h, y - h))
                   - (f(x - h, y + h) - 2 * f(x - h, y) + f(x - h, y - h))) / (2 * h**3)
    return ImmersionJet(x, y, p, order, "finite_difference")


def gram(jet):
    from .ambient import minkowski_inner
    E = minkowski_inner(jet.Phi_x, jet.Phi_x)
    F = minkowski_inner(jet.Phi_x, jet.Phi_y)
    G = minkowski_inner(jet.Phi_y, jet.Phi_y)
    return float(E), float(F), float(G)


def check_jet(jet, tol=1e-8):
    """Membership, tangency and rank of a jet; raises GeometryError."""
    from .ambient import check_tangent
    if membership_residual(jet.Phi) > tol:
        raise GeometryError("jet base point is off S^2 x H^2")
    check_tangent(jet.Phi, jet.Phi_x, tol)
    check_tangent(jet.Phi, jet.Phi_y, tol)
    E, F, G = gram(jet)
    if E * G - F * F <= TAU_RANK:
        raise GeometryError("immersion is rank deficient at this point")


def sample_grid(spec, nx, ny, margin=0.05):
    """Row-major interior grid; ``margin`` is a fraction of each side."""
    (x0, x1), (y0, y1) = spec.chart_domain
    mx, my = margin * (x1 - x0), margin * (y1 - y0)
    xs = np.linspace(x0 + mx, x1 - mx, nx)
    ys = np.linspace(y0 + my, y1 - my, ny)
    return [(float(x), float(y)) for y in ys for x in xs]


# -- series helpers ---------------------------------------------------------

def _curve_series(sample, axis):
    """Componentwise series of a curve sample in the chart variable ``axis``."""
    out = []
    for k in range(3):
        c = np.zeros((4, 4))
        for n, d in enumerate((sample.pos, sample.d1, sample.d2, sample.d3)):
            c[(n, 0) if axis == 0 else (0, n)] = d[k] / math.factorial(n)
        out.append(Taylor(c))
    return out


def _scale_series(series, s):
    return [t * s for t in series]


# -- curve products ---------------------------------------------------------

class _CurveProduct:
    def __init__(self, k_alpha, k_beta, minimal=False, modulation=0.0, length=3.0, step=curves.DEFAULT_STEP):
        if k_alpha == 0 and k_beta == 0 and not minimal and modulation == 0:
            raise GeometryError("both curvatures zero gives a minimal surface; pass minimal=True")
        self.k_alpha, self.k_beta = float(k_alpha), float(k_beta)
        self.modulation = float(modulation)
        self.domain = ((0.0, float(length)), (-0.5 * length, 0.5 * length))
        self._alpha = None
        if self.modulation:
            k, m = self.k_alpha, self.modulation
            prob = curves.PrescribedCurveProblem(
                curves.SPHERE, lambda x: 1.0, lambda x: k + m * jets.sin(x), x_max=float(length), step=step)
            self._alpha = curves.frenet_integrate(prob)

    def series(self, x, y):
        a = self._alpha.sample(x) if self._alpha is not None else curves.sphere_circle(self.k_alpha, x)
        b = curves.hyperbolic_constant_curvature(self.k_beta, y)
        return _curve_series(a, 0) + _curve_series(b, 1)


def make_curve_product(k_alpha, k_beta, minimal=False, modulation=0.0, length=3.0):
    params = {"k_alpha": float(k_alpha), "k_beta": float(k_beta)}
    if minimal:
        params["minimal"] = True
    if modulation:
        params["modulation"] = float(modulation)
    if length != 3.0:
        params["length"] = float(length)
    spec = SurfaceSpec("curve_product", params)
    spec.impl
    return spec


# -- special surfaces -------------------------------------------------------

class _Special:
    def __init__(self, variant, a, b, c, h0=None, slope_sign=1, x_max=hode.DEFAULT_X_MAX, step=hode.DEFAULT_STEP):
        if b <= 0:
            raise GeometryError("b must be positive")
        if h0 is None:
            h0 = hode.default_h0(a, b, c, variant)
        self.a, self.b, self.c, self.variant = float(a), float(b), float(c), variant
        self.profile = hode.integrate_h(a, b, c, variant, h0, slope_sign, x_max=x_max, step=step)
        lo, hi = self.profile.admissible_range
        if hi - lo < 10 * step:
            raise GeometryError("profile ODE admits almost no interval; choose other parameters")
        factor = curves.HYPERBOLIC if variant == "S1" else curves.SPHERE
        prob = curves.PrescribedCurveProblem(factor, self._speed, self._curvature, x_max=hi - lo, step=step)
        self.curve = curves.frenet_integrate(prob)
        # stencils revisit the same x many times
        self._curve_sample = functools.lru_cache(maxsize=4096)(self.curve.sample)
        # S2 with h < 0 lands on the lower sheet; -id of R^3_1 is an isometry back up
        self.sheet = 1.0 if h0 > 0 or variant == "S1" else -1.0
        if abs(a) > 0:
            period = 2 * math.pi / math.sqrt(abs(a))
            ydom = (0.0, period) if (variant == "S1" or a > 0) else (-1.0, 1.0)
        else:
            ydom = (-1.0, 1.0)
        self.domain = ((lo, hi), ydom)

    def _h(self, x):
        return self.profile.h_series(x)

    def _speed(self, x, h=None):
        h = self._h(x) if h is None else h
        return jets.sqrt(self.b * (1 + (h - self.c) * (h - self.c)))

    def _curvature(self, x):
        h = self._h(x)
        v = self._speed(x, h)
        gap = self.a - h * h if self.variant == "S1" else h * h - self.a
        return -self.b * gap / (v * v * v)

    def series(self, x, y):
        X, Y = Taylor.variable(x, 0), Taylor.variable(y, 1)
        h = self._h(X)
        curve = _curve_series(self._curve_sample(x), 0)
        a = self.a
        if self.variant == "S1":
            ra = math.sqrt(a)
            g = jets.sqrt(a - h * h)
            phi = [g * jets.cos(ra * Y) / ra, g * jets.sin(ra * Y) / ra, h / ra]
            return phi + curve
        if a > 0:
            ra = math.sqrt(a)
            g = jets.sqrt(h * h - a)
            psi = [g * jets.cos(ra * Y) / ra, g * jets.sin(ra * Y) / ra, h / ra]
        elif a < 0:
            ra = math.sqrt(-a)
            g = jets.sqrt(h * h - a)
            psi = [h / ra, g * jets.sinh(ra * Y) / ra, g * jets.cosh(ra * Y) / ra]
        else:
            inv = 1.0 / (2 * h)
            hh = h * h
            psi = [((Y * Y - 1) * hh + 1) * inv, 2 * Y * hh * inv, ((Y * Y + 1) * hh + 1) * inv]
        if a >= 0:
            psi = _scale_series(psi, self.sheet)
        return curve + psi


def _make_special(family, variant, a, b, c, h0, slope_sign, x_max, step):
    params = {"a": float(a), "b": float(b), "c": float(c), "slope_sign": int(1 if slope_sign in (1, "+") else -1)}
    if h0 is not None:
        params["h0"] = float(h0)
    if x_max != hode.DEFAULT_X_MAX:
        params["x_max"] = float(x_max)
    if step != hode.DEFAULT_STEP:
        params["step"] = float(step)
    spec = SurfaceSpec(family, params)
    spec.impl
    return spec


def make_special_1(a, b, c, h0=None, slope_sign=1, x_max=hode.DEFAULT_X_MAX, step=hode.DEFAULT_STEP):
    if a <= 0 or b <= 0:
        raise GeometryError("special_1 requires a > 0 and b > 0")
    return _make_special("special_1", "S1", a, b, c, h0, slope_sign, x_max, step)


def make_special_2(a, b, c, h0=None, slope_sign=1, x_max=hode.DEFAULT_X_MAX, step=hode.DEFAULT_STEP):
    if b <= 0:
        raise GeometryError("special_2 requires b > 0")
    return _make_special("special_2", "S2", a, b, c, h0, slope_sign, x_max, step)


# -- CMC generators in M^2(eps) x R and their lifts ---------------------------

def _warp(eps):
    """f and f' of the rotationally symmetric metric d theta^2 + f(theta)^2 d phi^2."""
    if eps == 1:
        return jets.sin, jets.cos
    return jets.sinh, jets.cosh


class RotationalProfile:
    """Generating curve of a rotational CMC surface in M^2(eps) x R.

    The profile (theta, t) is parametrized by the isothermal variable x
    (ds/dx = f(theta)) so that (x, rotation angle) is a conformal chart:

        theta' = f cos(sigma),  t' = f sin(sigma),
        sigma' = 2 H f - f'(theta) sin(sigma).
    """

    kind = "rotational"

    def __init__(self, eps, H, step=1e-3, theta_start=1e-4, theta_min=0.05, x_limit=60.0):
        if eps not in (1, -1):
            raise GeometryError("eps must be +1 or -1")
        if H <= 0 or (eps == -1 and H <= 0.5):
            raise GeometryError("rotational CMC spheres need H > 0 (eps=+1) or H > 1/2 (eps=-1)")
        self.eps, self.H, self.step = eps, float(H), float(step)
        f, df = _warp(eps)
        self._f, self._df = f, df
        # axis regularity: sigma ~ H theta near the pole
        y = np.array([theta_start, 0.0, self.H * theta_start])
        xs, ys = [0.0], [y]
        n_max = int(x_limit / step)
        closed = False
        for i in range(n_max):
            y = self._rk4(y, step)
            xs.append((i + 1) * step)
            ys.append(y)
            if y[2] > math.pi / 2 and y[0] < theta_start:
                closed = True
                break
            if y[0] <= 0:
                break
        if not closed:
            raise GeometryError("rotational profile did not close up (pole-start failure)")
        self.xs, self.ys = np.array(xs), np.array(ys)
        inside = np.nonzero(self.ys[:, 0] > theta_min)[0]
        self.domain_x = (float(self.xs[inside[0]]), float(self.xs[inside[-1]]))

    def _rhs(self, y):
        th, _, sg = y
        f, df = self._f(th), self._df(th)
        return np.array([f * math.cos(sg), f * math.sin(sg), 2 * self.H * f - df * math.sin(sg)])

    def _rk4(self, y, dt):
        k1 = self._rhs(y)
        k2 = self._rhs(y + dt / 2 * k1)
        k3 = self._rhs(y + dt / 2 * k2)
        k4 = self._rhs(y + dt * k3)
        return y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)

    def state(self, x):
        i = int(round((x - self.xs[0]) / self.step))
        i = min(max(i, 0), len(self.xs) - 1)
        dx = x - self.xs[i]
        return self.ys[i] if dx == 0 else self._rk4(self.ys[i], dx)

    def series(self, x, y):
        """(point of M^2 as a 3-vector series, height series) at (x, y)."""
        f, df, H = self._f, self._df, self.H

        def rhs(_, s):
            th, _t, sg = s
            return [f(th) * jets.cos(sg), f(th) * jets.sin(sg), 2 * H * f(th) - df(th) * jets.sin(sg)]

        th, t, _ = jets.ode_series(rhs, list(self.state(x)), x0=x)
        Y = Taylor.variable(y, 1)
        r = f(th)
        return [r * jets.cos(Y), r * jets.sin(Y), df(th)], t


class VerticalCylinder:
    """(constant-curvature curve of M^2(eps)) x R."""

    kind = "cylinder"

    def __init__(self, eps, k):
        self.eps, self.k = eps, float(k)
        if self.k == 0:
            raise GeometryError("a geodesic cylinder is minimal")
        self.domain_x = (0.0, 3.0)

    def series(self, x, y):
        smp = curves.sphere_circle(self.k, x) if self.eps == 1 else curves.hyperbolic_constant_curvature(self.k, x)
        return _curve_series(smp, 0), Taylor.variable(y, 1)


def rotational_cmc_profile(eps, H, step=1e-3):
    return RotationalProfile(eps, H, step)


def _generator(eps, desc):
    kind = desc.get("kind")
    if kind == "rotational":
        return RotationalProfile(eps, desc["H"], desc.get("step", 1e-3))
    if kind == "cylinder":
        return VerticalCylinder(eps, desc["k"])
    raise GeometryError(f"unknown generator kind {kind!r}")


class _Lift:
    def __init__(self, factor, generator, geodesic_angle=0.0):
        self.factor = factor
        self.eps = 1 if factor == "S2xR" else -1
        self.gen = _generator(self.eps, generator)
        self.angle = float(geodesic_angle)
        if self.gen.kind == "rotational":
            self.domain = (self.gen.domain_x, (0.0, 2 * math.pi))
        else:
            self.domain = (self.gen.domain_x, (-1.5, 1.5))

    def series(self, x, y):
        point, t = self.gen.series(x, y)
        ca, sa = math.cos(self.angle), math.sin(self.angle)
        if self.eps == 1:
            geo = [jets.sinh(t) * ca, jets.sinh(t) * sa, jets.cosh(t)]
            return point + geo
        geo = [jets.cos(t), jets.sin(t) * ca, jets.sin(t) * sa]
        return geo + point


def make_lift(factor, generator, geodesic_angle=0.0):
    """Compose a CMC generator of S^2 x R or H^2 x R with the geodesic lift.

    ``generator`` is a descriptor: ``{"kind": "rotational", "H": 1.0}`` or
    ``{"kind": "cylinder", "k": 1.0}``.
    """
    if factor not in ("S2xR", "H2xR"):
        raise GeometryError("factor must be 'S2xR' or 'H2xR'")
    params = {"generator": dict(generator)}
    if geodesic_angle:
        params["geodesic_angle"] = float(geodesic_angle)
    spec = SurfaceSpec("lift_" + factor, params)
    spec.impl
    return spec


_BUILDERS = {
    "curve_product": _CurveProduct,
    "special_1": lambda **kw: _Special("S1", **kw),
    "special_2": lambda **kw: _Special("S2", **kw),
    "lift_S2xR": lambda **kw: _Lift("S2xR", **kw),
    "lift_H2xR": lambda **kw: _Lift("H2xR", **kw),
}
