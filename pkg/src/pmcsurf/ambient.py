"""Closed-form primitives of S^2 x H^2 sitting inside R^3 x R^3_1 = R^6_1.

Vectors are length-6 numpy arrays. Components 0-2 belong to the sphere
factor (Euclidean R^3), components 3-5 to the hyperboloid factor with
component 5 timelike. Tangent vectors are passed together with their base
point ``p`` wherever the operation depends on it.

Complex vectors (used for d/dz combinations) are supported everywhere: the
inner product is the complex *bilinear* extension, never Hermitian.
"""

import numpy as np

ETA = np.array([1.0, 1.0, 1.0, 1.0, 1.0, -1.0])
_ETA3 = np.array([1.0, 1.0, -1.0])

#: membership tolerance for points produced by ODE integration
TAU_MEM = 1e-9


class GeometryError(ValueError):
    """Input violates a geometric precondition (membership, rank, ...)."""


def minkowski_inner(u, v):
    """Signature (+,+,+,+,+,-) bilinear form on R^6_1."""
    return np.sum(np.asarray(u) * ETA * np.asarray(v), axis=-1)


def lorentz_inner3(u, v):
    """Signature (+,+,-) form on the hyperboloid factor R^3_1."""
    return np.sum(np.asarray(u) * _ETA3 * np.asarray(v), axis=-1)


def riemannian_norm(v):
    """Norm of a real vector tangent to S^2 x H^2 (the metric is positive there)."""
    return float(np.sqrt(max(minkowski_inner(v, v), 0.0)))


def split(v):
    v = np.asarray(v)
    return v[..., :3], v[..., 3:]


def hat(p):
    """The companion normal (p_S, -p_H) of S^2 x H^2 at p."""
    p = np.asarray(p)
    return np.concatenate([p[..., :3], -p[..., 3:]], axis=-1)


def membership_residual(p):
    """Largest violation of |p_S| = 1 and <p_H, p_H>_L = -1."""
    s, h = split(p)
    return max(abs(float(s @ s) - 1.0), abs(float(lorentz_inner3(h, h)) + 1.0))


def check_point(p, tol=TAU_MEM):
    p = np.asarray(p, dtype=float)
    if p.shape != (6,):
        raise GeometryError(f"expected a 6-vector, got shape {p.shape}")
    if membership_residual(p) > tol or p[5] <= 0:
        raise GeometryError(f"{p} is not a point of S^2 x H^2 (upper sheet)")
    return p


def check_tangent(p, v, tol=TAU_MEM):
    s, h = split(p)
    vs, vh = split(v)
    scale = 1.0 + float(np.max(np.abs(v)))
    if abs(s @ vs) > tol * scale or abs(lorentz_inner3(h, vh)) > tol * scale:
        raise GeometryError("vector is not tangent to S^2 x H^2 at the given point")
    return v


def product_structure(v):
    """F(v1, v2) = (v1, -v2)."""
    return hat(v)


def cross3(a, b):
    """Cross product of two 3-vectors (np.cross carries heavy overhead at this size)."""
    return np.array([a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]])


def sphere_rotation(p_s, w):
    """J on T S^2: w -> p x w."""
    return cross3(p_s, w)


def lorentz_cross(a, b):
    """Lorentzian cross product in R^3_1; <a x_L b, c>_L = det(a, b, c)."""
    return cross3(a, b) * _ETA3


def hyperbolic_rotation(p_h, w):
    """J on T H^2: w -> p x_L w. Squares to -id on tangent vectors."""
    return lorentz_cross(p_h, w)


def apply_J(j, p, v):
    """Kaehler structures J1 = (J_S2, J_H2) and J2 = (J_S2, -J_H2)."""
    if j not in (1, 2):
        raise ValueError("j must be 1 or 2")
    ps, ph = split(p)
    vs, vh = split(v)
    sign = 1.0 if j == 1 else -1.0
    return np.concatenate([sphere_rotation(ps, vs), sign * hyperbolic_rotation(ph, vh)])


def tangent_project(p, w):
    """Orthogonal projection of w in R^6_1 onto T_p(S^2 x H^2)."""
    ps, ph = split(p)
    ws, wh = split(w)
    return np.concatenate([ws - (ws @ ps) * ps, wh + lorentz_inner3(wh, ph) * ph])


def wedge(a, b, c):
    """(a ^ b) c = <b, c> a - <a, c> b."""
    return minkowski_inner(b, c) * a - minkowski_inner(a, c) * b


def riemann_tensor(x, y, z):
    """R(x, y) z = (x+Fx)/2 ^ (y+Fy)/2 - (x-Fx)/2 ^ (y-Fy)/2, applied to z."""
    fx, fy = product_structure(x), product_structure(y)
    return wedge((x + fx) / 2, (y + fy) / 2, z) - wedge((x - fx) / 2, (y - fy) / 2, z)


def _dpi1(v):
    return (v + product_structure(v)) / 2


def _dpi2(v):
    return (v - product_structure(v)) / 2


def riemann_tensor_alternatives(x, y, z):
    """The three rewritings of the curvature tensor through d(pi_1), d(pi_2)."""
    return (
        wedge(_dpi1(x), _dpi1(y), z) - wedge(_dpi2(x), _dpi2(y), z),
        -wedge(x, y, z) + wedge(_dpi1(x), y, z) + wedge(x, _dpi1(y), z),
        wedge(x, y, z) - wedge(_dpi2(x), y, z) - wedge(x, _dpi2(y), z),
    )


def normalize_point(p):
    """Radially project onto S^2 and rescale onto the upper hyperboloid sheet."""
    ps, ph = split(np.asarray(p, dtype=float))
    ps = ps / np.sqrt(ps @ ps)
    q = -lorentz_inner3(ph, ph)
    if q <= 0 or ph[2] <= 0:
        raise GeometryError("hyperboloid component left the upper sheet")
    return np.concatenate([ps, ph / np.sqrt(q)])


def orientation_sign(p, frame):
    """+1 if the four tangent vectors in ``frame`` are positively oriented.

    Positive means: same orientation as (e, J_S e, f, J_H f) for unit
    tangents e of S^2 and f of H^2.
    """
    ps, ph = split(p)
    ns = np.concatenate([ps, np.zeros(3)])
    nh = np.concatenate([np.zeros(3), ph])
    frame = [np.real(v) for v in frame]
    d = np.linalg.det(np.column_stack(frame + [ns, nh]))
    return 1.0 if d * _reference_det(p) > 0 else -1.0


def _reference_det(p):
    ps, ph = split(p)
    e = _some_tangent_sphere(ps)
    f = _some_tangent_hyperboloid(ph)
    z = np.zeros(3)
    cols = [
        np.concatenate([e, z]),
        np.concatenate([sphere_rotation(ps, e), z]),
        np.concatenate([z, f]),
        np.concatenate([z, hyperbolic_rotation(ph, f)]),
        np.concatenate([ps, z]),
        np.concatenate([z, ph]),
    ]
    return np.linalg.det(np.column_stack(cols))


def _some_tangent_sphere(ps):
    probe = np.eye(3)[int(np.argmin(np.abs(ps)))]
    e = probe - (probe @ ps) * ps
    return e / np.linalg.norm(e)


def _some_tangent_hyperboloid(ph):
    probe = np.array([1.0, 0.0, 0.0]) if abs(ph[0]) <= abs(ph[1]) else np.array([0.0, 1.0, 0.0])
    f = probe + lorentz_inner3(probe, ph) * ph
    return f / np.sqrt(lorentz_inner3(f, f))
