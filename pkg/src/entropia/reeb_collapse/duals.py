"""Forward-mode second-order derivatives for the profile constructions.

The entropy-collapse profiles are built from smooth-step and flat-exponential
primitives; their first and second derivatives are needed analytically (the
contact volume density uses h = f g' - f' g, flow Jacobians use d/dr of
g'/h and f'/h).  A tiny (value, d1, d2) triple with arithmetic and exp is
all that takes.
"""

import numpy as np


class Dual:
    """Value with first and second derivative, broadcasting over arrays."""

    __slots__ = ("v", "d1", "d2")

    def __init__(self, v, d1=0.0, d2=0.0):
        self.v = np.asarray(v, dtype=float)
        self.d1 = np.broadcast_to(np.asarray(d1, dtype=float), self.v.shape).copy() \
            if np.shape(d1) != self.v.shape else np.asarray(d1, dtype=float)
        self.d2 = np.broadcast_to(np.asarray(d2, dtype=float), self.v.shape).copy() \
            if np.shape(d2) != self.v.shape else np.asarray(d2, dtype=float)

    @classmethod
    def variable(cls, v):
        v = np.asarray(v, dtype=float)
        return cls(v, np.ones_like(v), np.zeros_like(v))

    @classmethod
    def constant(cls, v):
        v = np.asarray(v, dtype=float)
        return cls(v, np.zeros_like(v), np.zeros_like(v))

    def _coerce(self, other):
        return other if isinstance(other, Dual) else Dual.constant(
            np.broadcast_to(np.asarray(other, float), self.v.shape))

    def __add__(self, other):
        o = self._coerce(other)
        return Dual(self.v + o.v, self.d1 + o.d1, self.d2 + o.d2)

    __radd__ = __add__

    def __neg__(self):
        return Dual(-self.v, -self.d1, -self.d2)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) + (-self)

    def __mul__(self, other):
        o = self._coerce(other)
        return Dual(
            self.v * o.v,
            self.d1 * o.v + self.v * o.d1,
            self.d2 * o.v + 2.0 * self.d1 * o.d1 + self.v * o.d2,
        )

    __rmul__ = __mul__

    def reciprocal(self):
        inv = 1.0 / self.v
        return Dual(
            inv,
            -self.d1 * inv ** 2,
            (2.0 * self.d1 ** 2 * inv - self.d2) * inv ** 2,
        )

    def __truediv__(self, other):
        return self * self._coerce(other).reciprocal()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.reciprocal()

    def exp(self):
        e = np.exp(self.v)
        return Dual(e, self.d1 * e, (self.d2 + self.d1 ** 2) * e)

    def where(self, mask, other):
        """Select self where mask, other elsewhere (both Duals)."""
        o = self._coerce(other)
        return Dual(
            np.where(mask, self.v, o.v),
            np.where(mask, self.d1, o.d1),
            np.where(mask, self.d2, o.d2),
        )


# clamp for the flat step: beyond this the exponent under/overflows and the
# function is flat to far below machine precision anyway
_STEP_CLIP = 0.004


def smooth_step(x, p: float = 1.0) -> Dual:
    """C-infinity step S_p(x) = 1 / (1 + exp(p (1/x - 1/(1-x)))).

    Identically 0 for x <= 0 and 1 for x >= 1 with infinitely flat contact.
    The parameter p < 1 slows the step, lowering its maximal slope (2p at
    the midpoint), which the profile constructions use to respect slope
    budgets.
    """
    xd = x if isinstance(x, Dual) else Dual.variable(x)
    lo = xd.v <= _STEP_CLIP
    hi = xd.v >= 1.0 - _STEP_CLIP
    mid = ~(lo | hi)
    safe = Dual(np.where(mid, xd.v, 0.5), xd.d1, xd.d2)
    q = (safe.reciprocal() - (1.0 - safe).reciprocal()) * p
    s = (q.exp() + 1.0).reciprocal()
    zero = Dual.constant(np.zeros_like(xd.v))
    one = Dual.constant(np.ones_like(xd.v))
    return s.where(mid, zero.where(lo, one))


def smooth_step_on(x, a: float, b: float, p: float = 1.0) -> Dual:
    """Step from 0 at a to 1 at b (a < b), flat at both ends."""
    xd = x if isinstance(x, Dual) else Dual.variable(x)
    return smooth_step((xd - a) * (1.0 / (b - a)), p=p)


def poly_smoothstep7(x) -> Dual:
    """Seventh-order polynomial smoothstep 35x^4 - 84x^5 + 70x^6 - 20x^7,
    clamped to [0, 1]; C^3 at the endpoints."""
    xd = x if isinstance(x, Dual) else Dual.variable(x)
    t = xd.v
    inside = (t > 0.0) & (t < 1.0)
    safe = Dual(np.where(inside, t, 0.5), xd.d1, xd.d2)
    x2 = safe * safe
    x4 = x2 * x2
    val = x4 * (35.0 + safe * (-84.0 + safe * (70.0 + safe * (-20.0))))
    zero = Dual.constant(np.zeros_like(t))
    one = Dual.constant(np.ones_like(t))
    return val.where(inside, zero.where(t <= 0.0, one))
