"""Curves in the factors S^2 and H^2.

Closed forms for constant geodesic curvature, plus a fixed-step RK4
integrator for curves with prescribed speed and signed curvature. Signed
curvature is measured against N = J T with J the factor rotation of
:mod:`pmcsurf.ambient`.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import jets
from .ambient import GeometryError, cross3, lorentz_cross, lorentz_inner3

SPHERE = "sphere"
HYPERBOLIC = "hyperbolic"
DEFAULT_STEP = 1e-3


@dataclass(frozen=True)
class CurveSample:
    x: float
    pos: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    d3: np.ndarray

    def series(self):
        """Componentwise Taylor series in the curve parameter."""
        return jets.vector_series(self.pos, self.d1, self.d2, self.d3)


def _inner(factor, u, v):
    return float(u @ v) if factor == SPHERE else float(lorentz_inner3(u, v))


def _rotate(factor, p, w):
    return cross3(p, w) if factor == SPHERE else lorentz_cross(p, w)


def measured_curvature(sample, factor):
    """Signed geodesic curvature from (pos, d1, d2): <D_c' c', J c'> / |c'|^3."""
    c, d1, d2 = sample.pos, sample.d1, sample.d2
    speed2 = _inner(factor, d1, d1)
    if factor == SPHERE:
        acc = d2 + speed2 * c
    else:
        acc = d2 - speed2 * c
    return _inner(factor, acc, _rotate(factor, c, d1)) / speed2**1.5


def measured_speed(sample, factor):
    return float(np.sqrt(_inner(factor, sample.d1, sample.d1)))


def sphere_circle(k, t):
    """Unit-speed latitude circle of geodesic curvature k (polar angle arccot k)."""
    theta = np.arctan2(1.0, k)
    r, z = np.sin(theta), np.cos(theta)
    w = 1.0 / r
    ct, st = np.cos(w * t), np.sin(w * t)
    return CurveSample(
        float(t),
        np.array([r * ct, r * st, z]),
        np.array([-st, ct, 0.0]),
        np.array([-w * ct, -w * st, 0.0]),
        np.array([w * w * st, -w * w * ct, 0.0]),
    )


def hyperbolic_constant_curvature(k, s):
    """Unit-speed curve in the hyperboloid with constant geodesic curvature |k|.

    Geodesic (k = 0), hypercycle (0 < |k| < 1), horocycle (|k| = 1) or
    circle (|k| > 1). Negative k mirrors the curve, flipping the signed
    curvature.
    """
    m = -1.0 if k < 0 else 1.0
    k = abs(k)
    s = float(s)
    if k == 0.0:
        out = (
            np.array([np.sinh(s), 0.0, np.cosh(s)]),
            np.array([np.cosh(s), 0.0, np.sinh(s)]),
            np.array([np.sinh(s), 0.0, np.cosh(s)]),
            np.array([np.cosh(s), 0.0, np.sinh(s)]),
        )
    elif k < 1.0:
        ch = 1.0 / np.sqrt(1.0 - k * k)
        sh = k * ch
        u = s / ch
        out = (
            np.array([ch * np.sinh(u), sh, ch * np.cosh(u)]),
            np.array([np.cosh(u), 0.0, np.sinh(u)]),
            np.array([np.sinh(u), 0.0, np.cosh(u)]) / ch,
            np.array([np.cosh(u), 0.0, np.sinh(u)]) / ch**2,
        )
    elif k == 1.0:
        out = (
            np.array([s, 0.5 * s * s, 1.0 + 0.5 * s * s]),
            np.array([1.0, s, s]),
            np.array([0.0, 1.0, 1.0]),
            np.zeros(3),
        )
    else:
        sh = 1.0 / np.sqrt(k * k - 1.0)
        ch = k * sh
        u = s / sh
        out = (
            np.array([sh * np.cos(u), sh * np.sin(u), ch]),
            np.array([-np.sin(u), np.cos(u), 0.0]),
            -np.array([np.cos(u), np.sin(u), 0.0]) / sh,
            np.array([np.sin(u), -np.cos(u), 0.0]) / sh**2,
        )
    mirror = np.array([1.0, m, 1.0])
    return CurveSample(s, *(v * mirror for v in out))


@dataclass
class PrescribedCurveProblem:
    """Curve data for :func:`frenet_integrate`.

    ``speed`` and ``signed_curvature`` are callables of x; they must accept
    either floats or :class:`pmcsurf.jets.Taylor` series so that third-order
    jets can be formed.
    """

    factor: str
    speed: Callable
    signed_curvature: Callable
    x_max: float
    step: float = DEFAULT_STEP
    position: np.ndarray = None
    tangent: np.ndarray = None
    x0: float = 0.0

    def __post_init__(self):
        if self.factor not in (SPHERE, HYPERBOLIC):
            raise GeometryError(f"unknown factor {self.factor!r}")
        if self.position is None:
            self.position = np.array([0.0, 0.0, 1.0])
        if self.tangent is None:
            self.tangent = np.array([1.0, 0.0, 0.0])
        self.position = np.asarray(self.position, dtype=float)
        self.tangent = np.asarray(self.tangent, dtype=float)


def _renormalize(factor, c, T):
    if factor == SPHERE:
        c = c / np.linalg.norm(c)
        T = T - (T @ c) * c
        return c, T / np.linalg.norm(T)
    c = c / np.sqrt(-lorentz_inner3(c, c))
    T = T + lorentz_inner3(T, c) * c
    return c, T / np.sqrt(lorentz_inner3(T, T))


class IntegratedCurve:
    """Samples of an integrated curve plus dense evaluation between nodes."""

    def __init__(self, problem, xs, cs, Ts):
        self.problem = problem
        self.xs = xs
        self._cs = cs
        self._Ts = Ts
        self._samples = None

    def __len__(self):
        return len(self.xs)

    def __iter__(self):
        return iter(self.samples)

    def __getitem__(self, i):
        return self.samples[i]

    @property
    def samples(self):
        if self._samples is None:
            self._samples = [self._sample_from_state(x, c, T) for x, c, T in zip(self.xs, self._cs, self._Ts)]
        return self._samples

    @property
    def x_range(self):
        return float(self.xs[0]), float(self.xs[-1])

    def state(self, x):
        lo, hi = self.x_range
        if not (lo - 1e-12 <= x <= hi + 1e-12):
            raise GeometryError(f"x={x} outside the integrated range [{lo}, {hi}]")
        i = int(round((x - lo) / self.problem.step))
        i = min(max(i, 0), len(self.xs) - 1)
        dx = x - self.xs[i]
        c, T = self._cs[i], self._Ts[i]
        if dx == 0.0:
            return c, T
        return _rk4_step(self.problem, self.xs[i], c, T, dx)

    def sample(self, x):
        c, T = self.state(x)
        return self._sample_from_state(x, c, T)

    def _sample_from_state(self, x, c, T):
        prob = self.problem
        # speed and curvature depend on x only; expand them once
        xs = jets.Taylor.variable(x, 0)
        v, kappa = prob.speed(xs), prob.signed_curvature(xs)

        def rhs(_, ys):
            return _frenet_rhs(prob.factor, v, kappa, ys[:3], ys[3:], series=True)

        ser = jets.ode_series(rhs, list(c) + list(T), x0=x)[:3]
        d = [np.array([s.partial(n, 0) for s in ser]) for n in range(4)]
        return CurveSample(float(x), d[0], d[1], d[2], d[3])


def _frenet_rhs(factor, v, kappa, c, T, series=False):
    """c' = v T,  T' = v (kappa J(c) T + eps <T, T> c), eps = -1 on S^2, +1 on H^2."""
    if series:
        if factor == SPHERE:
            rot = _cross_series(c, T)
            tt = T[0] * T[0] + T[1] * T[1] + T[2] * T[2]
            dT = [v * (kappa * rot[k] - tt * c[k]) for k in range(3)]
        else:
            rot = _cross_series(c, T)
            rot[2] = -rot[2]
            tt = T[0] * T[0] + T[1] * T[1] - T[2] * T[2]
            dT = [v * (kappa * rot[k] + tt * c[k]) for k in range(3)]
        return [v * T[k] for k in range(3)] + dT
    if factor == SPHERE:
        dT = v * (kappa * cross3(c, T) - (T @ T) * c)
    else:
        dT = v * (kappa * lorentz_cross(c, T) + lorentz_inner3(T, T) * c)
    return v * T, dT


def _cross_series(a, b):
    return [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]


def _rk4_step(prob, x, c, T, dt):
    # the two midpoint stages share one speed/curvature evaluation
    coef = [(prob.speed(t), prob.signed_curvature(t)) for t in (x, x + dt / 2, x + dt)]

    def f(k, cc, tt):
        return _frenet_rhs(prob.factor, *coef[k], cc, tt)

    k1 = f(0, c, T)
    k2 = f(1, c + dt / 2 * k1[0], T + dt / 2 * k1[1])
    k3 = f(1, c + dt / 2 * k2[0], T + dt / 2 * k2[1])
    k4 = f(2, c + dt * k3[0], T + dt * k3[1])
    c = c + dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
    T = T + dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    return c, T


def frenet_integrate(prob):
    """Integrate a curve with prescribed speed and signed curvature.

    Unit-tangent form of the Frenet system, RK4 at fixed step, with the
    position re-projected onto the factor and the tangent re-orthonormalized
    after every step. Returns an :class:`IntegratedCurve` (a sequence of
    :class:`CurveSample`).
    """
    if prob.step <= 0:
        raise GeometryError("step must be positive")
    c, T = prob.position, prob.tangent
    tol = 1e-9
    if prob.factor == SPHERE:
        ok = abs(c @ c - 1) < tol and abs(c @ T) < tol and abs(T @ T - 1) < tol
    else:
        ok = (abs(lorentz_inner3(c, c) + 1) < tol and c[2] > 0 and abs(lorentz_inner3(c, T)) < tol
              and abs(lorentz_inner3(T, T) - 1) < tol)
    if not ok:
        raise GeometryError("initial position/tangent violate membership, tangency or unit length")

    n = int(round(prob.x_max / prob.step))
    xs = prob.x0 + prob.step * np.arange(n + 1)
    cs, Ts = [c], [T]
    for i in range(n):
        v = prob.speed(xs[i])
        if not v > 0:
            raise GeometryError(f"non-positive speed {v} at x={xs[i]}")
        c, T = _rk4_step(prob, xs[i], c, T, prob.step)
        c, T = _renormalize(prob.factor, c, T)
        cs.append(c)
        Ts.append(T)
    if not prob.speed(xs[-1]) > 0:
        raise GeometryError(f"non-positive speed at x={xs[-1]}")
    return IntegratedCurve(prob, xs, cs, Ts)
