"""Radial profile functions (f, g, h = f g' - f' g) for the entropy-collapse
contact forms on solid tori.

Two families:

dim3    on [0, 1]: f decreases from 2 - r^4 behaviour at 0 to 2 - r at 1;
        g rises from r^2/2 to 1 with all derivatives vanishing at 1.
        Near 0 this gives h(r) = r (2 + r^4) identically.

higher  on [0, r_eps], parameters 0 < s < r_eps/2: f = 1 near 0, passes
        through 1/2 at r_eps/2, equals s/r near r_eps, with slope bounded
        by 2/r_eps; g = r^2/2 near 0 and 1 on [r_eps/2, r_eps] with slope
        bounded by 4/r_eps.  Then h > 0 on (0, r_eps], h = r near 0,
        h <= 6/r_eps and g'/h <= 2.

The constructions are closed-form blends of smooth steps.  A validator
samples the profiles densely and asserts every required property; the
construction itself carries no proofs.
"""

from dataclasses import dataclass, field

import numpy as np

from .duals import Dual, smooth_step_on


class ProfileError(Exception):
    pass


class InfeasibleParameters(ProfileError):
    pass


class ProfileValidationError(ProfileError):
    pass


@dataclass
class ProfileFunctions:
    """Profile triple on [0, r_eps]; values and first two derivatives."""

    r_eps: float
    s: float
    family: str
    meta: dict = field(default_factory=dict, compare=False)

    # -- family evaluators returning Duals ---------------------------------

    def _f_zones(self):
        """Blend windows of the higher-family f; see _f_dual."""
        r_eps, s = self.r_eps, self.s
        lo = max(2.0 * s, r_eps / 2.0)
        b1 = lo + 0.1 * (r_eps - lo)
        b2 = r_eps - 0.1 * (r_eps - lo)
        m1 = 0.5 - s / b1  # > 0 since b1 > 2s
        kappa = min(0.5 * m1 / (b2 - r_eps / 2.0), 0.5 / r_eps)
        return b1, b2, kappa

    def _f_dual(self, r: Dual) -> Dual:
        if self.family == "dim3":
            # f = 2 - m, m blending r^4 into r
            w = smooth_step_on(r, 0.15, 0.85)
            r2 = r * r
            m = (1.0 - w) * (r2 * r2) + w * r
            return 2.0 - m
        # higher family: 1 near 0, the gentle line through (r_eps/2, 1/2)
        # in the middle, s/r near r_eps.  Blends always go from the larger
        # branch to the smaller one, which keeps f' <= 0.
        r_eps, s = self.r_eps, self.s
        b1, b2, kappa = self._f_zones()
        line = 0.5 - kappa * (r - r_eps / 2.0)
        w1 = smooth_step_on(r, 0.05 * r_eps, 0.48 * r_eps, p=0.6)
        left = (1.0 - w1) * 1.0 + w1 * line
        w2 = smooth_step_on(r, b1, b2, p=0.5)
        # guard r = 0 in the s/r branch; w2 is identically 0 there
        r_safe = Dual(np.maximum(r.v, 1e-300), r.d1, r.d2)
        return (1.0 - w2) * left + w2 * (s * r_safe.reciprocal())

    def _g_dual(self, r: Dual) -> Dual:
        if self.family == "dim3":
            # g = (1-W) r^2/2 + W, W flat-one exactly at r = 1
            w = smooth_step_on(r, 0.25, 1.0)
            return (1.0 - w) * (r * r * 0.5) + w * 1.0
        # higher: same blend compressed into [0, r_eps/2], slowed step
        u = r * (2.0 / self.r_eps)
        w = smooth_step_on(u, 0.1, 1.0, p=0.55)
        return (1.0 - w) * (r * r * 0.5) + w * 1.0

    # -- plain evaluators ----------------------------------------------------

    def f(self, r):
        return self._f_dual(Dual.variable(r)).v

    def fp(self, r):
        return self._f_dual(Dual.variable(r)).d1

    def g(self, r):
        return self._g_dual(Dual.variable(r)).v

    def gp(self, r):
        return self._g_dual(Dual.variable(r)).d1

    def h(self, r):
        rd = Dual.variable(r)
        f, g = self._f_dual(rd), self._g_dual(rd)
        return (f * Dual(g.d1, g.d2, 0.0) - Dual(f.d1, f.d2, 0.0) * g).v

    def h_dual(self, r) -> Dual:
        """h and h' (second derivative not propagated)."""
        rd = Dual.variable(r)
        f, g = self._f_dual(rd), self._g_dual(rd)
        hv = f.v * g.d1 - f.d1 * g.v
        hp = f.v * g.d2 - f.d2 * g.v
        return Dual(hv, hp, np.zeros_like(hv))

    def angular_speed(self, r):
        """-f'/h, the theta component of the Reeb field."""
        rd = Dual.variable(np.asarray(r, dtype=float))
        f, g = self._f_dual(rd), self._g_dual(rd)
        return -f.d1 / (f.v * g.d1 - f.d1 * g.v)

    def fiber_speed(self, r):
        """g'/h, the base-direction component before the 1/s factor."""
        rd = Dual.variable(np.asarray(r, dtype=float))
        f, g = self._f_dual(rd), self._g_dual(rd)
        return g.d1 / (f.v * g.d1 - f.d1 * g.v)

    def speed_derivatives(self, r):
        """d/dr of (-f'/h) and of (g'/h), for flow Jacobians."""
        rd = Dual.variable(np.asarray(r, dtype=float))
        f, g = self._f_dual(rd), self._g_dual(rd)
        h = f.v * g.d1 - f.d1 * g.v
        hp = f.v * g.d2 - f.d2 * g.v
        d_ang = -(f.d2 * h - f.d1 * hp) / h ** 2
        d_fib = (g.d2 * h - g.d1 * hp) / h ** 2
        return d_ang, d_fib


_N_VALIDATE = 10_000


def _check(cond, msg):
    if not cond:
        raise ProfileValidationError(msg)


# Constructions with infinitely flat contact have derivatives below the
# double-precision floor within ~0.5% of the flat endpoint; strict sign
# checks stop just short of it.
_FLAT_SKIN = 0.995


def _validate_dim3(p: ProfileFunctions):
    r = np.linspace(1e-9, 1.0, _N_VALIDATE)
    rd = Dual.variable(r)
    f, g = p._f_dual(rd), p._g_dual(rd)
    _check(np.all(f.d1 < 0.0), "dim3: f' must be negative on (0, 1]")
    near1 = r >= 0.9
    _check(np.max(np.abs(f.v[near1] - (2.0 - r[near1]))) < 1e-12,
           "dim3: f must equal 2 - r near 1")
    near0 = r <= 0.1
    _check(np.max(np.abs(f.v[near0] - (2.0 - r[near0] ** 4))) < 1e-12,
           "dim3: f must equal 2 - r^4 near 0")
    inner = (r > 0.0) & (r <= _FLAT_SKIN)
    _check(np.all(g.d1[inner] > 0.0), "dim3: g' must be positive on (0, 1)")
    _check(np.all(g.d1 >= 0.0), "dim3: g' must be nonnegative")
    g1 = p._g_dual(Dual.variable(np.array([1.0])))
    _check(abs(g1.v[0] - 1.0) < 1e-12 and abs(g1.d1[0]) < 1e-12
           and abs(g1.d2[0]) < 1e-12, "dim3: g flat-one at 1")
    _check(np.max(np.abs(g.v[near0] - r[near0] ** 2 / 2)) < 1e-12,
           "dim3: g must equal r^2/2 near 0")
    small = r <= 0.05
    h = p.h(r)
    _check(np.max(np.abs(h[small] - r[small] * (2.0 + r[small] ** 4))) < 1e-10,
           "dim3: h must equal r(2 + r^4) near 0")
    _check(np.all(h > 0.0), "dim3: h must be positive on (0, 1]")


def _validate_higher(p: ProfileFunctions):
    r_eps, s = p.r_eps, p.s
    b1, b2, _ = p._f_zones()
    r = np.linspace(1e-12 * r_eps, r_eps, _N_VALIDATE)
    rd = Dual.variable(r)
    f, g = p._f_dual(rd), p._g_dual(rd)
    near_end = r >= b2
    _check(np.max(np.abs(f.v[near_end] - s / r[near_end])) < 1e-12,
           "higher: f must equal s/r near r_eps")
    near0 = r <= 0.05 * r_eps
    _check(np.max(np.abs(f.v[near0] - 1.0)) < 1e-12, "higher: f must be 1 near 0")
    f_half = p.f(np.array([r_eps / 2.0]))[0]
    _check(abs(f_half - 0.5) < 1e-12, "higher: f(r_eps/2) must be 1/2")
    _check(np.all(f.d1 <= 1e-15), "higher: f' must be <= 0")
    _check(np.min(f.d1) >= -2.0 / r_eps * (1.0 + 1e-9),
           "higher: f' must be >= -2/r_eps")
    right = r >= r_eps / 2.0
    _check(np.all(f.d1[right] < 0.0), "higher: f' < 0 on [r_eps/2, r_eps]")
    _check(np.all(g.d1 >= -1e-15), "higher: g' must be >= 0")
    _check(np.max(g.d1) <= 4.0 / r_eps * (1.0 + 1e-9),
           "higher: g' must be <= 4/r_eps")
    interior = (r > 0.0) & (r <= _FLAT_SKIN * r_eps / 2.0)
    _check(np.all(g.d1[interior] > 0.0), "higher: g' > 0 on (0, r_eps/2)")
    _check(np.max(np.abs(g.v[right] - 1.0)) < 1e-12,
           "higher: g = 1 on [r_eps/2, r_eps]")
    _check(np.max(np.abs(g.v[near0] - r[near0] ** 2 / 2)) < 1e-12,
           "higher: g = r^2/2 near 0")
    h = p.h(r)
    _check(np.all(h > 0.0), "higher: h > 0 on (0, r_eps]")
    near0_h = r <= 0.04 * r_eps
    _check(np.max(np.abs(h[near0_h] - r[near0_h])) < 1e-10, "higher: h = r near 0")
    _check(np.max(h) <= 6.0 / r_eps * (1.0 + 1e-9), "higher: h <= 6/r_eps")
    _check(np.max(g.d1 / h) <= 2.0 * (1.0 + 1e-9), "higher: g'/h <= 2")


def build_profiles(r_eps: float, s: float, family: str = "higher") -> ProfileFunctions:
    """Construct and validate a profile triple.

    family "higher" requires 0 < s < r_eps/2.  family "dim3" fixes
    r_eps = 1; s is only used downstream in the contact form and the
    validator ignores it.
    """
    if family == "dim3":
        p = ProfileFunctions(1.0, float(s), "dim3")
        _validate_dim3(p)
    elif family == "higher":
        if not (0.0 < s < r_eps / 2.0):
            raise InfeasibleParameters("need 0 < s < r_eps / 2")
        p = ProfileFunctions(float(r_eps), float(s), "higher")
        _validate_higher(p)
    else:
        raise ProfileError(f"unknown family {family!r}")
    p.meta.update(validated_points=_N_VALIDATE)
    return p
