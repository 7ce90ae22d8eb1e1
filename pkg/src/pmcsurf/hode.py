"""Profile functions h(x) of the two special surface families.

Both families use (h')^2 = P(h) with

    S1:  P(h) = (a - h^2 - b(1 + (h - c)^2)) (a - h^2),   a - h^2 > 0
    S2:  P(h) = (a - h^2 + b(1 + (h - c)^2)) (a - h^2),   h^2 - a > 0

We integrate the second-order consequence h'' = P'(h)/2 with fixed-step RK4,
which passes through turning points (h' = 0) without the sign ambiguity of
the square-root form. The first-order equation is only used as an energy
monitor.
"""

from dataclasses import dataclass, field

import numpy as np

from . import jets

DEFAULT_STEP = 1e-3
DEFAULT_X_MAX = 5.0
#: integration stops once |h| exceeds this (S2 solutions blow up in finite x)
DEFAULT_H_CAP = 6.0
_DOMAIN_MARGIN = 1e-8


class ProfileError(ValueError):
    pass


def profile_polynomial(a, b, c, variant):
    """Coefficients of P, lowest degree first."""
    sign = {"S1": -1.0, "S2": 1.0}[variant]
    first = np.polynomial.Polynomial([a, 0.0, -1.0]) + sign * b * np.polynomial.Polynomial([1.0 + c * c, -2.0 * c, 1.0])
    second = np.polynomial.Polynomial([a, 0.0, -1.0])
    return first * second


def _horner(coeffs, h):
    acc = 0.0
    for k in reversed(coeffs):
        acc = acc * h + k
    return acc


@dataclass
class ProfileSolution:
    a: float
    b: float
    c: float
    variant: str
    step: float
    xs: np.ndarray
    hs: np.ndarray
    dhs: np.ndarray
    halt_reason: str = "x_max"
    _p: tuple = field(default=(), repr=False)
    _dp: tuple = field(default=(), repr=False)
    _ddp: tuple = field(default=(), repr=False)

    def __post_init__(self):
        poly = profile_polynomial(self.a, self.b, self.c, self.variant)
        self._p = tuple(poly.coef)
        self._dp = tuple(poly.deriv(1).coef)
        self._ddp = tuple(poly.deriv(2).coef)

    @property
    def admissible_range(self):
        return (float(self.xs[0]), float(self.xs[-1]))

    @property
    def ddhs(self):
        return np.array([self.accel(h) for h in self.hs])

    @property
    def samples(self):
        return list(zip(self.xs, self.hs, self.dhs, self.ddhs))

    def P(self, h):
        return _horner(self._p, h)

    def dP(self, h):
        return _horner(self._dp, h)

    def accel(self, h):
        return 0.5 * _horner(self._dp, h)

    def energy_residuals(self):
        return np.array([abs(p * p - self.P(h)) for h, p in zip(self.hs, self.dhs)])

    def in_domain(self, h):
        gap = self.a - h * h if self.variant == "S1" else h * h - self.a
        return gap > _DOMAIN_MARGIN

    def state(self, x):
        """(h, h') at x: one RK4 step of the exact length from the nearest node."""
        lo, hi = self.admissible_range
        if not (lo - 1e-12 <= x <= hi + 1e-12):
            raise ProfileError(f"x={x} outside the achieved range [{lo}, {hi}]")
        i = int(round((x - lo) / self.step))
        i = min(max(i, 0), len(self.xs) - 1)
        dx = x - self.xs[i]
        h, p = self.hs[i], self.dhs[i]
        if dx == 0.0:
            return h, p
        return _rk4(self.accel, h, p, dx)

    def h_series(self, x):
        """h as a truncated Taylor series; ``x`` may be a float or a series in x."""
        x0 = jets.value(x)
        h, p = self.state(x0)
        if not isinstance(x, jets.Taylor):
            return h
        d2 = self.accel(h)
        d3 = 0.5 * _horner(self._ddp, h) * p
        return jets.compose(x, [h, p, d2, d3])


def _rk4_increment(accel, h, p, dt):
    k1h, k1p = p, accel(h)
    k2h, k2p = p + 0.5 * dt * k1p, accel(h + 0.5 * dt * k1h)
    k3h, k3p = p + 0.5 * dt * k2p, accel(h + 0.5 * dt * k2h)
    k4h, k4p = p + dt * k3p, accel(h + dt * k3h)
    return dt / 6.0 * (k1h + 2 * k2h + 2 * k3h + k4h), dt / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p)


def _rk4(accel, h, p, dt):
    dh, dp = _rk4_increment(accel, h, p, dt)
    return h + dh, p + dp


def integrate_h(a, b, c, variant, h0, slope_sign=1, x_max=DEFAULT_X_MAX, step=DEFAULT_STEP, h_cap=DEFAULT_H_CAP):
    """Integrate the profile ODE from x = 0 with h(0) = h0.

    The achieved interval is data: integration stops early, without error,
    when the next step would leave the variant's domain or exceed ``h_cap``.
    """
    if variant not in ("S1", "S2"):
        raise ProfileError(f"unknown variant {variant!r}")
    if b <= 0:
        raise ProfileError("b must be positive")
    if variant == "S1" and a <= 0:
        raise ProfileError("S1 requires a > 0")
    if step <= 0 or x_max <= 0:
        raise ProfileError("step and x_max must be positive")
    if slope_sign not in (1, -1, "+", "-"):
        raise ProfileError("slope_sign must be +1 or -1")
    sign = 1.0 if slope_sign in (1, "+") else -1.0

    sol = ProfileSolution(a, b, c, variant, step, np.zeros(1), np.zeros(1), np.zeros(1))
    if not sol.in_domain(h0):
        raise ProfileError(f"domain inequality fails at h0={h0}")
    p0sq = sol.P(h0)
    if p0sq < -1e-14:
        raise ProfileError(f"P(h0) = {p0sq} < 0: no real slope")
    if abs(p0sq) <= 1e-14 and abs(sol.dP(h0)) <= 1e-14:
        raise ProfileError("initial data gives a constant solution")

    n = int(round(x_max / step))
    xs, hs, ps = [0.0], [float(h0)], [sign * np.sqrt(max(p0sq, 0.0))]
    reason = "x_max"
    # compensated (Kahan) accumulation keeps roundoff below the O(step^4) error
    h, p, carry_h, carry_p = hs[0], ps[0], 0.0, 0.0
    for i in range(n):
        dh, dp = _rk4_increment(sol.accel, h, p, step)
        dh -= carry_h
        dp -= carry_p
        h_new, p_new = h + dh, p + dp
        carry_h, carry_p = (h_new - h) - dh, (p_new - p) - dp
        h, p = h_new, p_new
        if not sol.in_domain(h):
            reason = "domain"
            break
        if abs(h) > h_cap:
            reason = "h_cap"
            break
        xs.append((i + 1) * step)
        hs.append(h)
        ps.append(p)

    return ProfileSolution(a, b, c, variant, step, np.array(xs), np.array(hs), np.array(ps), halt_reason=reason)


def default_h0(a, b, c, variant):
    """A starting height with P(h0) > 0 inside the variant's domain."""
    sol = ProfileSolution(a, b, c, variant, DEFAULT_STEP, np.zeros(1), np.zeros(1), np.zeros(1))
    if variant == "S1":
        candidates = np.linspace(0.0, np.sqrt(max(a, 0.0)), 50, endpoint=False)
    else:
        start = np.sqrt(max(a, 0.0))
        candidates = start + np.linspace(0.05, 5.0, 200)
    for h in candidates:
        if sol.in_domain(h) and sol.P(h) > 1e-3:
            return float(h)
    raise ProfileError(f"no admissible starting height for (a, b, c) = {(a, b, c)}")
