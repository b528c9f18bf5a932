"""Collapse sweep: volumes, return times, and normalized norm growth of
the glued contact forms over a range of s."""

import numpy as np

from ..entropy_estimators import DiscreteSystem, gamma_plus
from .duals import Dual, poly_smoothstep7, smooth_step_on
from .forms import (
    MappingTorusSpec,
    collapse_volumes,
    contact_threshold,
    normalize_form,
    return_map_and_time,
    solid_torus_time_one_jacobian,
)
from .profiles import ProfileFunctions, build_profiles

TWO_PI = 2.0 * np.pi


def _chart_metric(a, b):
    """Distance on the (theta, r, x) charts: angles wrap at 2 pi, the
    radial coordinate is absolute."""
    d0 = np.abs(a[..., 0] - b[..., 0]) % TWO_PI
    d0 = np.minimum(d0, TWO_PI - d0)
    d2 = np.abs(a[..., 2] - b[..., 2]) % TWO_PI
    d2 = np.minimum(d2, TWO_PI - d2)
    return np.sqrt(d0 ** 2 + (a[..., 1] - b[..., 1]) ** 2 + d2 ** 2)


def solid_torus_system(profiles: ProfileFunctions, s: float) -> DiscreteSystem:
    """Time-one map of the solid-torus Reeb flow as a DiscreteSystem;
    states (theta, r, x) with angles in [0, 2 pi), analytic Jacobian."""

    def step(states):
        out = states.copy()
        r = states[:, 1]
        out[:, 0] = (states[:, 0] + profiles.angular_speed(r)) % TWO_PI
        out[:, 2] = (states[:, 2] + profiles.fiber_speed(r) / s) % TWO_PI
        return out

    def jac(states):
        return solid_torus_time_one_jacobian(profiles, states[:, 1], 1.0, s)

    def sampler(m, rng):
        st = np.empty((m, 3))
        st[:, 0] = rng.random(m) * TWO_PI
        st[:, 1] = 0.05 + 0.9 * rng.random(m) * profiles.r_eps
        st[:, 2] = rng.random(m) * TWO_PI
        return st

    metric = _chart_metric

    def inverse():
        inv = solid_torus_system(profiles, s)

        def back(states):
            out = states.copy()
            r = states[:, 1]
            out[:, 0] = (states[:, 0] - profiles.angular_speed(r)) % TWO_PI
            out[:, 2] = (states[:, 2] - profiles.fiber_speed(r) / s) % TWO_PI
            return out

        inv.step = back
        inv.jacobian = lambda st: solid_torus_time_one_jacobian(
            profiles, st[:, 1], -1.0, s)
        return inv

    return DiscreteSystem("map", 3, step, jac, metric=metric, sampler=sampler,
                          inverse=inverse, period=TWO_PI,
                          name=f"reeb_solid_torus(s={s})")


def mapping_torus_system(spec: MappingTorusSpec, s: float,
                         dt: float = 0.02) -> DiscreteSystem:
    """Time-one map of the mapping-torus Reeb flow with the variational
    Jacobian integrated alongside (RK4, analytic field derivatives)."""

    def field_and_grad(states):
        th, r = states[:, 0] % TWO_PI, states[:, 1]
        thd = Dual.variable(th)
        chi_p = poly_smoothstep7(thd * (1.0 / TWO_PI))
        rd = Dual.variable(r)
        tau = smooth_step_on(rd, *spec.tau_support) * (TWO_PI * spec.k_twists)
        lam = 2.0 - r
        # y = -chi' lam tau', with theta and r derivatives
        y = -chi_p.d1 * lam * tau.d1
        dy_dth = -chi_p.d2 * lam * tau.d1
        dy_dr = -chi_p.d1 * (-tau.d1 + lam * tau.d2)
        denom = 1.0 + s * lam * y
        dden_dth = s * lam * dy_dth
        dden_dr = s * (-y + lam * dy_dr)
        vth = 1.0 / denom
        vx = y / denom
        grad = np.zeros((len(th), 3, 3))
        grad[:, 0, 0] = -dden_dth / denom ** 2
        grad[:, 0, 1] = -dden_dr / denom ** 2
        grad[:, 2, 0] = (dy_dth * denom - y * dden_dth) / denom ** 2
        grad[:, 2, 1] = (dy_dr * denom - y * dden_dr) / denom ** 2
        vel = np.zeros((len(th), 3))
        vel[:, 0] = vth
        vel[:, 2] = vx
        return vel, grad

    def advance(states, t_total, with_jac):
        y = states.copy().astype(float)
        jac = np.tile(np.eye(3), (len(y), 1, 1))
        n = max(1, int(round(abs(t_total) / dt)))
        h = t_total / n
        for _ in range(n):
            k1, g1 = field_and_grad(y)
            j1 = np.einsum("mij,mjk->mik", g1, jac)
            k2, g2 = field_and_grad(y + 0.5 * h * k1)
            j2 = np.einsum("mij,mjk->mik", g2, jac + 0.5 * h * j1)
            k3, g3 = field_and_grad(y + 0.5 * h * k2)
            j3 = np.einsum("mij,mjk->mik", g3, jac + 0.5 * h * j2)
            k4, g4 = field_and_grad(y + h * k3)
            j4 = np.einsum("mij,mjk->mik", g4, jac + h * j3)
            y = y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
            jac = jac + h / 6.0 * (j1 + 2 * j2 + 2 * j3 + j4)
            # monodromy gluing when theta passes 2 pi
            wrap = y[:, 0] >= TWO_PI
            if wrap.any():
                idx = np.flatnonzero(wrap)
                y[idx, 0] -= TWO_PI
                rd = Dual.variable(y[idx, 1])
                tau = smooth_step_on(rd, *spec.tau_support) * (TWO_PI * spec.k_twists)
                y[idx, 2] = y[idx, 2] + tau.v
                glue = np.tile(np.eye(3), (len(idx), 1, 1))
                glue[:, 2, 1] = tau.d1
                jac[idx] = np.einsum("mij,mjk->mik", glue, jac[idx])
        return y, jac

    def step(states):
        return advance(states, 1.0, False)[0]

    def jacfn(states):
        return advance(states, 1.0, True)[1]

    def sampler(m, rng):
        st = np.empty((m, 3))
        st[:, 0] = rng.random(m) * TWO_PI
        st[:, 1] = spec.r_range[0] + (spec.r_range[1] - spec.r_range[0]) * rng.random(m)
        st[:, 2] = rng.random(m) * TWO_PI
        return st

    return DiscreteSystem("map", 3, step, jacfn, metric=_chart_metric,
                          sampler=sampler, period=TWO_PI,
                          name=f"reeb_mapping_torus(s={s})")


def collapse_sweep(spec: MappingTorusSpec, s_list=None, n_steps: int = 8,
                   n_returns: int = 64, gamma_horizon: int = 24,
                   gamma_states: int = 48, seed: int = 0,
                   grid: int = 256, fit_tol: float = 0.01):
    """Full sweep table: volumes, return-time range, return-map spread
    across s, finite-horizon Gamma and the normalized product
    Gamma * vol^(1/2).

    Returns (rows, fit, meta).  Deterministic given (spec, seed).
    """
    profiles = build_profiles(1.0, 0.1, "dim3")
    s0, s1 = contact_threshold(spec)
    if s_list is None:
        s_list = list(np.linspace(s1 / n_steps, s1, n_steps))
    rows, fit = collapse_volumes(spec, profiles, s_list, grid=grid,
                                 fit_tol=fit_tol)
    rng = np.random.default_rng(seed)
    starts = np.stack([
        spec.r_range[0] + (spec.r_range[1] - spec.r_range[0]) * rng.random(n_returns),
        rng.random(n_returns) * TWO_PI,
    ], axis=1)
    images = []
    for row in rows:
        s = row["s"]
        times = np.empty(n_returns)
        imgs = np.empty((n_returns, 2))
        for i, (r, x) in enumerate(starts):
            t, im = return_map_and_time(spec, (r, x), s)
            times[i] = t
            imgs[i] = im
        images.append(imgs)
        row["T_s_min"] = float(times.min())
        row["T_s_max"] = float(times.max())
        mt_sys = mapping_torus_system(spec, s)
        st_sys = solid_torus_system(profiles, s)
        g_mt = gamma_plus(mt_sys, gamma_horizon, gamma_states, seed).value
        g_st = gamma_plus(st_sys, gamma_horizon, gamma_states, seed).value
        row["gamma_est"] = max(g_mt, g_st)
        _, scaled = normalize_form(row["vol_total"], 1, row["gamma_est"])
        row["gamma_times_vol_pow"] = scaled
    spread = 0.0
    base = images[0]
    for imgs in images[1:]:
        d = np.abs(imgs - base)
        d[:, 1] = np.minimum(d[:, 1] % TWO_PI, TWO_PI - (d[:, 1] % TWO_PI))
        spread = max(spread, float(d.max()))
    meta = {"s0": s0, "s1": s1, "return_map_spread": spread}
    return rows, fit, meta
