"""Entropy-collapse contact forms on mapping tori and solid tori, their
Reeb fields, flows, return maps and volume estimates.

Concrete instances:

MappingTorusSpec   page = annulus [1,3] x S^1 with primitive (2-r) dx and
                   monodromy a k-fold Dehn twist (r, x) -> (r, x + tau(r)).
                   The glued solid torus uses the dim3 profile family, so
                   the collar forms match exactly: near r = 1 both read
                   dtheta + s (2-r) dx.

OpenBook3D         the one-complex-dimensional page instance of the general
                   construction: page (0, R] x S^1 with primitive
                   (eps_hat / r) dx, binding circle with base form
                   eps_hat dx where eps_hat = eps / (2 pi), so the raw
                   contact integral over the binding is eps.  The glued
                   solid torus uses the higher profile family on [0, r_eps].

All coordinates are (theta, r, x) with theta the open-book angle and x the
fiber/binding angle.  Everything is x-independent, so flows reduce to
(theta, r)-dependent quadratures, but the public ops integrate the actual
ODEs as a cross-check.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .duals import Dual, poly_smoothstep7, smooth_step_on
from .profiles import ProfileFunctions

TWO_PI = 2.0 * math.pi

# reported in place of an infinite contact threshold (trivial monodromy)
S_SCAN_CAP = 1e6


class FormsError(Exception):
    pass


class GridTooCoarse(FormsError):
    pass


class NoReturn(FormsError):
    pass


class FitPoor(FormsError):
    pass


class NonPositiveVolume(FormsError):
    pass


@dataclass
class FlowState:
    chart: str  # "mapping_torus" | "solid_torus"
    coords: tuple  # (theta, r, x)
    time: float = 0.0

    def reduced(self) -> "FlowState":
        th, r, x = self.coords
        return FlowState(self.chart, (th % TWO_PI, r, x % TWO_PI), self.time)


# --------------------------------------------------------------- mapping torus

@dataclass
class MappingTorusSpec:
    """Annulus page [1, 3] x S^1, lambda = (2 - r) dx, k-fold Dehn twist.

    tau is a smooth monotone step of total increment 2 pi k supported in
    the middle of the annulus; chi is the 7th-order polynomial smoothstep
    in theta / 2 pi (chi' vanishes to third order at the ends).
    """

    k_twists: int = 1
    s: float = 0.01
    r_range: tuple = (1.0, 3.0)
    tau_support: tuple = (1.3, 2.7)
    meta: dict = field(default_factory=dict, compare=False)

    # -- building blocks ----------------------------------------------------

    def _tau_dual(self, r) -> Dual:
        a, b = self.tau_support
        return smooth_step_on(r, a, b) * (TWO_PI * self.k_twists)

    def tau(self, r):
        return self._tau_dual(Dual.variable(np.asarray(r, float))).v

    def tau_prime(self, r):
        return self._tau_dual(Dual.variable(np.asarray(r, float))).d1

    def _chi_dual(self, theta) -> Dual:
        td = Dual.variable(np.asarray(theta, float))
        return poly_smoothstep7(td * (1.0 / TWO_PI))

    def chi(self, theta):
        return self._chi_dual(theta).v

    def chi_prime(self, theta):
        return self._chi_dual(theta).d1

    def lam(self, r):
        """Coefficient of dx in the primitive lambda."""
        return 2.0 - np.asarray(r, float)

    # -- derived fields ------------------------------------------------------

    def y_x(self, theta, r):
        """Page vector field Y = y_x(theta, r) d_x solving i_Y dlambda =
        -chi' lambda_psi."""
        return -self.chi_prime(theta) * self.lam(r) * self.tau_prime(r)

    def lambda_theta_of_y(self, theta, r):
        """lambda_theta(Y) = (2-r) y_x; the return-time correction density."""
        return self.lam(r) * self.y_x(theta, r)

    def contact_density(self, s, theta, r):
        """alpha_s ^ dalpha_s = s (1 + s lambda_theta(Y)) dtheta dx dr."""
        return s * (1.0 + s * self.lambda_theta_of_y(theta, r))

    def page_area(self) -> float:
        r0, r1 = self.r_range
        return TWO_PI * (r1 - r0)

    def dlambda_page_integral(self) -> float:
        """int over the page of dlambda = omega (the area form)."""
        return self.page_area()

    def monodromy(self, r, x):
        return r, x + self.tau(r)

    # -- serialization -------------------------------------------------------

    def to_json(self) -> dict:
        return {"k_twists": self.k_twists, "s": self.s,
                "r_range": list(self.r_range),
                "tau_support": list(self.tau_support)}

    @classmethod
    def from_json(cls, obj) -> "MappingTorusSpec":
        return cls(int(obj.get("k_twists", 1)), float(obj.get("s", 0.01)),
                   tuple(obj.get("r_range", (1.0, 3.0))),
                   tuple(obj.get("tau_support", (1.3, 2.7))))


def mapping_torus_reeb(spec: MappingTorusSpec, state, s: float | None = None):
    """Reeb velocity (theta_dot, r_dot, x_dot) of alpha_s at the state."""
    s = spec.s if s is None else s
    theta, r, x = state
    y = spec.y_x(theta, r)
    denom = 1.0 + s * spec.lam(r) * y
    return np.array([1.0, 0.0, y]) / denom if np.isscalar(theta) else (
        np.stack([np.ones_like(y), np.zeros_like(y), y]) / denom)


def contact_threshold(spec: MappingTorusSpec, grid: int = 64,
                      tol: float = 1e-4, cap: float = S_SCAN_CAP):
    """(s0, s1): contactness and bounded-speed thresholds, by bisection.

    s0 is the largest grid-verified s with alpha_s ^ dalpha_s > 0 on a
    grid^3 lattice; s1 the largest s with 1/2 <= theta_dot <= 2 there.
    The instance is x-independent, so the x-axis of the lattice carries
    identical values.  tau' == 0 yields the scan cap for both.
    """
    theta = np.linspace(0.0, TWO_PI, grid, endpoint=False)
    r = np.linspace(spec.r_range[0], spec.r_range[1], grid)
    th, rr = np.meshgrid(theta, r, indexing="ij")
    lam_y = spec.lambda_theta_of_y(th, rr)  # x-independent
    if not np.all(np.isfinite(lam_y)):
        raise GridTooCoarse("non-finite correction density on the grid")

    def refine(sign):
        """Polish the lattice extremum of sign*lam_y by local grid zoom."""
        vals = sign * lam_y
        k = int(np.argmax(vals))
        t0, r0 = th.flat[k], rr.flat[k]
        wt, wr = TWO_PI / grid, (spec.r_range[1] - spec.r_range[0]) / grid
        best = vals.flat[k]
        for _ in range(6):
            tg = np.linspace(t0 - wt, t0 + wt, 17)
            rg = np.clip(np.linspace(r0 - wr, r0 + wr, 17), *spec.r_range)
            tt, rr2 = np.meshgrid(tg, rg, indexing="ij")
            local = sign * spec.lambda_theta_of_y(tt % TWO_PI, rr2)
            j = int(np.argmax(local))
            best = max(best, float(local.flat[j]))
            t0, r0 = tt.flat[j], rr2.flat[j]
            wt, wr = wt / 4.0, wr / 4.0
        return best

    neg = max(float(-lam_y.min()), refine(-1.0))  # kills contactness
    pos = max(float(lam_y.max()), refine(+1.0))

    def bisect(limit):
        if limit <= 0.0:
            return cap
        lo, hi = 0.0, 1.0 / limit
        return hi * (1.0 - tol)

    # contactness: 1 + s lam_y > 0  <=>  s < 1/neg
    s0 = bisect(neg)
    # speed: 1/2 <= 1/(1 + s lam_y) <= 2  <=>  s <= 1/(2 neg) and s <= 1/(2 pos)
    s1 = min(bisect(2.0 * neg), bisect(2.0 * pos), s0)
    # bisection refinement against the grid test keeps the contract honest
    def verify(s, bound):
        q = 1.0 + s * lam_y
        return bool(q.min() > 0.0) if bound == "contact" else bool(
            q.min() >= 0.5 and q.max() <= 2.0)

    for name, guess, kind in (("s0", s0, "contact"), ("s1", s1, "speed")):
        if guess < cap and not verify(guess, kind):
            lo, hi = 0.0, guess
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                if verify(mid, kind):
                    lo = mid
                else:
                    hi = mid
            if name == "s0":
                s0 = lo
            else:
                s1 = lo
    return s0, min(s1, s0)


def return_map_and_time(spec: MappingTorusSpec, start, s: float | None = None,
                        n_steps: int = 4096):
    """First return to the page {theta = 0}: (T_s, (r, x) image).

    Integrates dt/dtheta = 1 + s lambda_theta(Y) and dx/dtheta = y_x over
    one revolution (Runge-Kutta nodes batched over theta; r is constant
    along the flow), then applies the monodromy gluing
    (2 pi, p) ~ (0, psi(p)).  Raises NoReturn past time 8 pi.
    """
    s = spec.s if s is None else s
    r, x0 = float(start[0]), float(start[1])
    h = TWO_PI / n_steps
    nodes = np.arange(2 * n_steps + 1) * (0.5 * h)
    chi_p = spec.chi_prime(nodes)
    y = -chi_p * spec.lam(r) * spec.tau_prime(np.array([r]))[0]
    dt = 1.0 + s * spec.lam(r) * y
    if np.any(dt[::2] <= 0.0):
        raise NoReturn("Reeb field not positively transverse to the pages")
    left, mid, right = dt[0:-2:2], dt[1::2], dt[2::2]
    t_acc = float(np.sum(h / 6.0 * (left + 4.0 * mid + right)))
    yl, ym, yr = y[0:-2:2], y[1::2], y[2::2]
    x = x0 + float(np.sum(h / 6.0 * (yl + 4.0 * ym + yr)))
    if t_acc > 8.0 * math.pi:
        raise NoReturn("no page return within time 8 pi")
    r_im, x_im = spec.monodromy(r, x)
    return t_acc, (r_im, x_im % TWO_PI)


def mapping_torus_volume(spec: MappingTorusSpec, s: float,
                         grid: int = 256) -> float:
    """int alpha_s ^ dalpha_s over the mapping torus by midpoint quadrature
    (the x direction contributes a factor 2 pi exactly)."""
    r0, r1 = spec.r_range
    theta = (np.arange(grid) + 0.5) * TWO_PI / grid
    r = r0 + (np.arange(grid) + 0.5) * (r1 - r0) / grid
    th, rr = np.meshgrid(theta, r, indexing="ij")
    dens = spec.contact_density(s, th, rr)
    return TWO_PI * float(dens.mean()) * TWO_PI * (r1 - r0)


# --------------------------------------------------------------- solid torus

def solid_torus_reeb(profiles: ProfileFunctions, state, s: float):
    """Reeb velocity of sigma_s = g dtheta + s f dx at (theta, r, x):
    (-f'/h, 0, g'/(s h)); on the core circle the dim3 family gives
    (0, 0, 1/(2s)) and the higher family (0, 0, 1/s)."""
    theta, r, x = state
    if r <= 1e-12:
        core = 0.5 / s if profiles.family == "dim3" else 1.0 / s
        return np.array([0.0, 0.0, core])
    rr = np.asarray([r], float)
    ang = profiles.angular_speed(rr)[0]
    fib = profiles.fiber_speed(rr)[0] / s
    return np.array([ang, 0.0, fib])


def solid_torus_flow(profiles: ProfileFunctions, state, t: float, s: float,
                     reduce_angles: bool = True):
    """Closed-form linear flow on the invariant torus {r = const}."""
    theta, r, x = state
    vel = solid_torus_reeb(profiles, state, s)
    th = theta + vel[0] * t
    xx = x + vel[2] * t
    if reduce_angles:
        th, xx = th % TWO_PI, xx % TWO_PI
    return FlowState("solid_torus", (th, r, xx), t)


def solid_torus_flow_rk4(profiles: ProfileFunctions, state, t: float, s: float,
                         dt: float = 1e-3):
    """Fixed-step RK4 integration of the solid-torus Reeb field (oracle
    companion to the closed form; angles left unreduced).

    The field depends on the state only through r, so stage evaluations at
    an unchanged r reuse the cached velocity; the integration is bit-exact
    against a stage-by-stage field query.
    """
    y = np.asarray(state, float)
    n = max(1, int(round(abs(t) / dt)))
    hstep = t / n
    cache_r = None
    cache_v = None

    def f(yy):
        nonlocal cache_r, cache_v
        if cache_r is None or yy[1] != cache_r:
            cache_r = yy[1]
            cache_v = solid_torus_reeb(profiles, yy, s)
        return cache_v

    for _ in range(n):
        k1 = f(y)
        k2 = f(y + 0.5 * hstep * k1)
        k3 = f(y + 0.5 * hstep * k2)
        k4 = f(y + hstep * k3)
        y = y + hstep / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    return FlowState("solid_torus", tuple(y), t)


def solid_torus_volume(profiles: ProfileFunctions, s: float,
                       x_coefficient: float = 1.0) -> float:
    """int sigma_s ^ dsigma_s = s c (2 pi)^2 int h dr, c the dx scale of the
    base form (1 for the dim3 torus, eps/(2 pi) for the open-book binding)."""
    val, _ = integrate.quad(lambda r: profiles.h(np.array([r]))[0],
                            0.0, profiles.r_eps, limit=200)
    return s * x_coefficient * TWO_PI ** 2 * val


def solid_torus_time_one_jacobian(profiles: ProfileFunctions, r, t: float,
                                  s: float):
    """d of the time-t solid-torus flow in (theta, r, x); a shear in r."""
    rr = np.asarray(r, float)
    d_ang, d_fib = profiles.speed_derivatives(rr)
    n = len(rr)
    jac = np.tile(np.eye(3), (n, 1, 1))
    jac[:, 0, 1] = d_ang * t
    jac[:, 2, 1] = d_fib * t / s
    return jac


# --------------------------------------------------------------- assembly

def collapse_volumes(spec: MappingTorusSpec, profiles: ProfileFunctions,
                     s_list, grid: int = 256, fit_tol: float = 0.01):
    """Volume table of the glued form over a sweep of s.

    Returns (rows, fit) where rows have s, vol_mt, vol_st, vol_total and
    fit has the least-squares coefficients of vol(s) = a s + b s^2, the
    relative residual, and the quadrature prediction for a.  Raises
    FitPoor when the relative residual exceeds fit_tol.
    """
    s_arr = np.asarray(sorted(s_list), float)
    if np.any(s_arr <= 0):
        raise FormsError("s values must be positive")
    h_int, _ = integrate.quad(lambda r: profiles.h(np.array([r]))[0],
                              0.0, profiles.r_eps, limit=200)
    rows = []
    for s in s_arr:
        vol_mt = mapping_torus_volume(spec, s, grid)
        vol_st = solid_torus_volume(profiles, s)
        rows.append({"s": float(s), "vol_mt": vol_mt, "vol_st": vol_st,
                     "vol_total": vol_mt + vol_st})
    totals = np.array([row["vol_total"] for row in rows])
    design = np.stack([s_arr, s_arr ** 2], axis=1)
    coef, *_ = np.linalg.lstsq(design, totals, rcond=None)
    a, b = float(coef[0]), float(coef[1])
    resid = float(np.sqrt(np.mean((design @ coef - totals) ** 2))
                  / np.mean(np.abs(totals)))
    predicted = TWO_PI * spec.dlambda_page_integral() + TWO_PI ** 2 * h_int
    if resid > fit_tol:
        raise FitPoor(f"volume fit residual {resid} exceeds {fit_tol}")
    fit = {"a": a, "b": b, "residual": resid, "a_predicted": predicted,
           "curvature_ratio": abs(b) * float(s_arr.max()) / a}
    return rows, fit


def normalize_form(vol: float, n: int, gamma_or_h: float):
    """Scale to contact volume one: c = vol^(-1/(n+1)); the growth rate of
    the scaled form is gamma vol^(1/(n+1))."""
    if vol <= 0:
        raise NonPositiveVolume("volume must be positive")
    scale = vol ** (-1.0 / (n + 1))
    return scale, gamma_or_h * vol ** (1.0 / (n + 1))


# --------------------------------------------------------------- open book 3d

@dataclass
class OpenBook3D:
    """The one-dimensional-binding instance of the general construction.

    Page (0, R] x S^1 with ideal primitive lambda = (eps_hat / r) dx,
    eps_hat = eps / (2 pi) so the raw contact integral of the base form
    eps_hat dx over the binding circle equals eps.  Monodromy is a k-fold
    Dehn twist supported in [tau_lo, tau_hi], away from [0, r_eps].
    """

    eps: float = 0.1
    r_eps: float = 0.4
    page_r_max: float = 3.0
    k_twists: int = 1
    tau_support: tuple = (1.0, 2.5)
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.tau_support[0] <= self.r_eps:
            raise FormsError("monodromy support must avoid [0, r_eps]")

    @property
    def eps_hat(self) -> float:
        return self.eps / TWO_PI

    def _tau_dual(self, r) -> Dual:
        a, b = self.tau_support
        return smooth_step_on(r, a, b) * (TWO_PI * self.k_twists)

    def tau_prime(self, r):
        return self._tau_dual(Dual.variable(np.asarray(r, float))).d1

    def chi_prime(self, theta):
        td = Dual.variable(np.asarray(theta, float))
        return poly_smoothstep7(td * (1.0 / TWO_PI)).d1

    def lambda_theta_of_y(self, theta, r):
        """lambda_theta(Y) = -eps_hat chi'(theta) tau'(r)."""
        return -self.eps_hat * self.chi_prime(theta) * self.tau_prime(r)

    def dlambda_page_integral(self, r_lo: float) -> float:
        """int of dlambda over the truncated page {r >= r_lo}."""
        return self.eps * (1.0 / r_lo - 1.0 / self.page_r_max)

    def mapping_torus_volume(self, s: float, r_lo: float,
                             grid: int = 256) -> float:
        theta = (np.arange(grid) + 0.5) * TWO_PI / grid
        r = r_lo + (np.arange(grid) + 0.5) * (self.page_r_max - r_lo) / grid
        th, rr = np.meshgrid(theta, r, indexing="ij")
        dens = s * (self.eps_hat / rr ** 2) * (
            1.0 + s * self.lambda_theta_of_y(th, rr))
        return TWO_PI * float(dens.mean()) * TWO_PI * (self.page_r_max - r_lo)

    def total_volume(self, profiles: ProfileFunctions, s: float) -> float:
        if profiles.family != "higher" or profiles.r_eps != self.r_eps:
            raise FormsError("open book needs higher-family profiles on [0, r_eps]")
        mt = self.mapping_torus_volume(s, self.r_eps)
        st = solid_torus_volume(profiles, 1.0, x_coefficient=self.eps_hat)
        return mt + st

    def volume_bound(self, s: float) -> float:
        """Right-hand side 2 s int_{F_eps} dlambda + 12 pi n eps, n = 1."""
        return 2.0 * s * self.dlambda_page_integral(self.r_eps) + 12.0 * math.pi * self.eps

    def return_time(self, s: float, r: float) -> float:
        """T_s(r) = 2 pi + s int lambda_theta(Y) dtheta = 2 pi - s eps_hat tau'(r)."""
        return TWO_PI - s * self.eps_hat * self.tau_prime(np.array([r]))[0]
