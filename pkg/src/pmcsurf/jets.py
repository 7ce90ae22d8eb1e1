"""Truncated bivariate Taylor arithmetic (total degree <= 3).

A ``Taylor`` holds coefficients ``c[i, j]`` of ``dx**i * dy**j`` around a
chart point, so that ``d^(i+j) f / dx^i dy^j = i! j! c[i, j]``. Composition
with elementary functions uses the fact that the non-constant part is
nilpotent of order 4.
"""

import math

import numpy as np

ORDER = 3
_N = ORDER + 1
_MASK = np.add.outer(np.arange(_N), np.arange(_N)) <= ORDER
_FACT = np.array([[math.factorial(i) * math.factorial(j) for j in range(_N)] for i in range(_N)], dtype=float)


def _product_table():
    # flat index pairs (a, b) whose product lands on a kept coefficient t
    pa, pb, pt = [], [], []
    for i1, j1, i2, j2 in np.ndindex(_N, _N, _N, _N):
        if i1 + j1 + i2 + j2 <= ORDER:
            pa.append(i1 * _N + j1)
            pb.append(i2 * _N + j2)
            pt.append((i1 + i2) * _N + j1 + j2)
    return np.array(pa), np.array(pb), np.array(pt)


_PA, _PB, _PT = _product_table()


class Taylor:
    __slots__ = ("c",)
    __array_priority__ = 100

    def __init__(self, coeffs):
        self.c = np.where(_MASK, coeffs, 0.0)

    @classmethod
    def constant(cls, value):
        c = np.zeros((_N, _N), dtype=np.result_type(value, float))
        c[0, 0] = value
        return cls(c)

    @classmethod
    def variable(cls, value, axis):
        """The coordinate function x (axis=0) or y (axis=1) expanded at ``value``."""
        t = cls.constant(value)
        t.c[(1, 0) if axis == 0 else (0, 1)] = 1.0
        return t

    @classmethod
    def from_derivatives(cls, derivs):
        """Univariate series in x from [f, f', f'', f''']."""
        c = np.zeros((_N, _N), dtype=np.result_type(*derivs, float))
        for i, d in enumerate(derivs[:_N]):
            c[i, 0] = d / math.factorial(i)
        return cls(c)

    @property
    def value(self):
        return self.c[0, 0]

    def partial(self, i, j):
        return self.c[i, j] * _FACT[i, j]

    def partials(self):
        return self.c * _FACT

    def dx(self):
        """Derivative in x, as a series (the top degree is lost)."""
        c = np.zeros_like(self.c)
        c[:-1, :] = self.c[1:, :] * np.arange(1, _N)[:, None]
        return Taylor(c)

    def integrate_x(self):
        c = np.zeros_like(self.c)
        c[1:, :] = self.c[:-1, :] / np.arange(1, _N)[:, None]
        return Taylor(c)

    def _lift(self, other):
        return other if isinstance(other, Taylor) else Taylor.constant(other)

    def __add__(self, other):
        return Taylor(self.c + self._lift(other).c)

    __radd__ = __add__

    def __sub__(self, other):
        return Taylor(self.c - self._lift(other).c)

    def __rsub__(self, other):
        return Taylor(self._lift(other).c - self.c)

    def __neg__(self):
        return Taylor(-self.c)

    def __mul__(self, other):
        if not isinstance(other, Taylor):
            return Taylor(self.c * other)
        w = self.c.ravel()[_PA] * other.c.ravel()[_PB]
        if np.iscomplexobj(w):
            out = np.bincount(_PT, w.real, _N * _N) + 1j * np.bincount(_PT, w.imag, _N * _N)
        else:
            out = np.bincount(_PT, w, _N * _N)
        return Taylor(out.reshape(_N, _N))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Taylor):
            return Taylor(self.c / other)
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, n):
        if n == 2:
            return self * self
        if n == 3:
            return self * self * self
        return compose(self, _power_derivs(self.value, n))

    def reciprocal(self):
        v = self.value
        return compose(self, [1 / v, -1 / v**2, 2 / v**3, -6 / v**4])

    def __repr__(self):
        return f"Taylor(value={self.value!r})"


def _power_derivs(v, n):
    return [v**n, n * v ** (n - 1), n * (n - 1) * v ** (n - 2), n * (n - 1) * (n - 2) * v ** (n - 3)]


def compose(t, derivs):
    """f(t) from the derivatives [f(a), f'(a), f''(a), f'''(a)] at a = t.value."""
    d = t - t.value
    d2 = d * d
    d3 = d2 * d
    return Taylor.constant(derivs[0]) + d * derivs[1] + d2 * (derivs[2] / 2) + d3 * (derivs[3] / 6)


def _dispatch(x, scalar, derivs):
    if isinstance(x, Taylor):
        return compose(x, derivs(x.value))
    return scalar(x)


def sqrt(x):
    def derivs(v):
        s = math.sqrt(v)
        return [s, 0.5 / s, -0.25 / (s * v), 0.375 / (s * v * v)]

    return _dispatch(x, math.sqrt, derivs)


def sin(x):
    return _dispatch(x, math.sin, lambda v: [math.sin(v), math.cos(v), -math.sin(v), -math.cos(v)])


def cos(x):
    return _dispatch(x, math.cos, lambda v: [math.cos(v), -math.sin(v), -math.cos(v), math.sin(v)])


def sinh(x):
    return _dispatch(x, math.sinh, lambda v: [math.sinh(v), math.cosh(v), math.sinh(v), math.cosh(v)])


def cosh(x):
    return _dispatch(x, math.cosh, lambda v: [math.cosh(v), math.sinh(v), math.cosh(v), math.sinh(v)])


def value(x):
    return x.value if isinstance(x, Taylor) else x


def stack(components):
    """Stack scalar series into an array of partials, shape (4, 4, n)."""
    out = []
    for comp in components:
        if isinstance(comp, Taylor):
            out.append(comp.partials())
        else:
            out.append(Taylor.constant(comp).partials())
    return np.stack(out, axis=-1)


def vector_series(d0, d1, d2, d3):
    """Componentwise univariate series in x from derivative vectors."""
    return [Taylor.from_derivatives([d0[k], d1[k], d2[k], d3[k]]) for k in range(len(d0))]


def ode_series(rhs, y0, x0=0.0):
    """Taylor expansion of the solution of y' = rhs(x, y) through (x0, y0).

    Picard iteration in truncated arithmetic; each pass fixes one more
    degree, so ORDER passes give the exact degree-3 expansion.
    """
    x = Taylor.variable(x0, 0)
    ys = [Taylor.constant(v) for v in y0]
    for _ in range(ORDER):
        f = rhs(x, ys)
        ys = [Taylor.constant(v) + fi.integrate_x() if isinstance(fi, Taylor) else Taylor.constant(v) + Taylor.variable(0.0, 0) * fi
              for v, fi in zip(y0, f)]
    return ys
