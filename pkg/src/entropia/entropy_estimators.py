"""Finite-horizon estimators for topological entropy (separated orbit
sets), volume entropy (ball growth) and norm growth, plus the inequality
checks that tie them together (Manning, dim * Gamma, Ohno time change).

Estimator discipline: every estimate is the slope of a least-squares line
through the tail half of the horizon, with the fit residual reported.  No
extrapolation beyond that; the numbers stay auditable.
"""

import math
from dataclasses import dataclass, field

import numpy as np


class EstimatorError(Exception):
    pass


class BudgetExceeded(EstimatorError):
    pass


class JacobianOverflow(EstimatorError):
    pass


HTOP_CLOUD = 20_000       # default candidate cloud (N_c)
HTOP_BUDGET = 40_000_000  # cap on cloud * deltas * steps
FD_STEP = 1e-6


@dataclass
class GrowthEstimate:
    value: float
    horizon: float
    samples: int
    fit_residual: float
    delta: float | None = None

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise EstimatorError("non-finite growth estimate")


def _tail_slope(xs, ys):
    """Least-squares slope over the tail half of the horizon."""
    xs = np.asarray(xs, float)
    ys = np.asarray(ys, float)
    tail = xs >= xs[-1] / 2.0
    if tail.sum() < 2:
        tail = np.ones_like(xs, bool)
    A = np.stack([xs[tail], np.ones(int(tail.sum()))], axis=1)
    coef, *_ = np.linalg.lstsq(A, ys[tail], rcond=None)
    resid = float(np.sqrt(np.mean((A @ coef - ys[tail]) ** 2)))
    return float(coef[0]), resid


def torus_metric(a, b):
    """Euclidean distance on the unit torus, broadcasting over rows."""
    d = np.abs(np.asarray(a, float) - np.asarray(b, float))
    d = np.minimum(d, 1.0 - d)
    return np.sqrt((d * d).sum(axis=-1))


@dataclass
class DiscreteSystem:
    """A map or flow with enough structure to estimate growth rates.

    step      states (m, d) -> states (maps), or the vector field (flows)
    jacobian  states (m, d) -> (m, d, d); None means central differences
              with step 1e-6 on the time-one map
    metric    (a, b) -> distances; defaults to the unit-torus metric
    sampler   (m, rng) -> seed states; defaults to uniform on [0,1)^d
    inverse   optional DiscreteSystem factory for the inverse dynamics
    period    coordinate period of the chart (spatial hashing scale for
              the separated-set search)
    """

    kind: str
    state_dim: int
    step: callable
    jacobian: callable = None
    metric: callable = None
    sampler: callable = None
    inverse: callable = None
    flow_dt: float = 0.05
    period: float = 1.0
    name: str = ""
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.kind not in ("map", "flow"):
            raise EstimatorError("kind must be 'map' or 'flow'")
        if self.metric is None:
            self.metric = torus_metric
        if self.sampler is None:
            self.sampler = lambda m, rng: rng.random((m, self.state_dim))

    # -- dynamics -------------------------------------------------------------

    def time_one(self, states):
        if self.kind == "map":
            return self.step(states)
        return self._integrate(states, 1.0)

    def _integrate(self, states, t):
        y = np.asarray(states, float)
        n = max(1, int(round(abs(t) / self.flow_dt)))
        h = t / n
        for _ in range(n):
            k1 = self.step(y)
            k2 = self.step(y + 0.5 * h * k1)
            k3 = self.step(y + 0.5 * h * k2)
            k4 = self.step(y + h * k3)
            y = y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        return y

    def time_one_jacobian(self, states):
        if self.jacobian is not None:
            return self.jacobian(states)
        return self._fd_jacobian(states)

    def _fd_jacobian(self, states):
        states = np.asarray(states, float)
        m, d = states.shape
        half = 0.5 * self.period
        jac = np.empty((m, d, d))
        for j in range(d):
            e = np.zeros(d)
            e[j] = FD_STEP
            plus = self.time_one(states + e)
            minus = self.time_one(states - e)
            # unwrap across the chart seam
            diff = (plus - minus + half) % self.period - half
            jac[:, :, j] = diff / (2 * FD_STEP)
        return jac

    def validate_jacobian(self, n_states: int = 100, seed: int = 0,
                          tol: float = 1e-4) -> float:
        """Cross-check the analytic Jacobian against central differences."""
        if self.jacobian is None:
            return 0.0
        rng = np.random.default_rng(seed)
        states = self.sampler(n_states, rng)
        ja = self.jacobian(states)
        jf = self._fd_jacobian(states)
        scale = np.maximum(np.abs(ja).max(), 1.0)
        err = float(np.abs(ja - jf).max() / scale)
        if err > tol:
            raise EstimatorError(f"jacobian cross-check failed: {err}")
        return err


# ------------------------------------------------------------------ systems

def rotation_system(alpha: float = 0.3) -> DiscreteSystem:
    def step(x):
        return (x + alpha) % 1.0

    def jac(x):
        return np.ones((len(x), 1, 1))

    return DiscreteSystem(
        "map", 1, step, jac, name=f"rotation({alpha})",
        inverse=lambda: rotation_system(-alpha))


def doubling_system() -> DiscreteSystem:
    def step(x):
        return (2.0 * x) % 1.0

    def jac(x):
        return np.full((len(x), 1, 1), 2.0)

    return DiscreteSystem("map", 1, step, jac, name="doubling")


CAT = np.array([[2.0, 1.0], [1.0, 1.0]])


def _linear_torus_system(mat, name) -> DiscreteSystem:
    mat = np.asarray(mat, float)
    inv = np.linalg.inv(mat)

    def step(x):
        return (x @ mat.T) % 1.0

    def jac(x):
        return np.tile(mat, (len(x), 1, 1))

    return DiscreteSystem(
        "map", mat.shape[0], step, jac, name=name,
        inverse=lambda: _linear_torus_system(inv, name + "^-1"))


def cat_system() -> DiscreteSystem:
    return _linear_torus_system(CAT, "cat")


def conjugated_cat_system(shear: float = 1.0) -> DiscreteSystem:
    """psi^-1 cat psi for the integer shear psi(x) = (x1 + k x2, x2)."""
    k = int(shear)
    psi = np.array([[1.0, k], [0.0, 1.0]])
    mat = np.linalg.inv(psi) @ CAT @ psi
    return _linear_torus_system(mat, f"cat_conj({k})")


def power_system(sys: DiscreteSystem, m: int) -> DiscreteSystem:
    if sys.kind != "map":
        raise EstimatorError("power_system expects a map")

    def step(x):
        for _ in range(m):
            x = sys.step(x)
        return x

    def jac(x):
        j = sys.time_one_jacobian(x)
        y = x
        for _ in range(m - 1):
            y = sys.step(y)
            j = np.einsum("mij,mjk->mik", sys.time_one_jacobian(y), j)
        return j

    inv = None
    if sys.inverse is not None:
        inv = lambda: power_system(sys.inverse(), m)
    return DiscreteSystem("map", sys.state_dim, step, jac,
                          name=f"{sys.name}^{m}", inverse=inv)


def product_system(a: DiscreteSystem, b: DiscreteSystem) -> DiscreteSystem:
    da, db = a.state_dim, b.state_dim

    def step(x):
        return np.concatenate([a.step(x[:, :da]), b.step(x[:, da:])], axis=1)

    def jac(x):
        ja = a.time_one_jacobian(x[:, :da])
        jb = b.time_one_jacobian(x[:, da:])
        m = len(x)
        out = np.zeros((m, da + db, da + db))
        out[:, :da, :da] = ja
        out[:, da:, da:] = jb
        return out

    inv = None
    if a.inverse is not None and b.inverse is not None:
        inv = lambda: product_system(a.inverse(), b.inverse())
    return DiscreteSystem("map", da + db, step, jac,
                          name=f"{a.name}x{b.name}", inverse=inv)


def union_system(pieces) -> DiscreteSystem:
    """Disjoint union of same-dimension map systems; the first state
    coordinate is the (frozen) piece label."""
    d = pieces[0].state_dim

    def split(x):
        lab = np.rint(x[:, 0]).astype(int)
        return lab, x[:, 1:]

    def step(x):
        lab, y = split(x)
        out = np.empty_like(y)
        for i, p in enumerate(pieces):
            m = lab == i
            if m.any():
                out[m] = p.step(y[m])
        return np.concatenate([x[:, :1], out], axis=1)

    def jac(x):
        lab, y = split(x)
        out = np.zeros((len(x), d + 1, d + 1))
        out[:, 0, 0] = 1.0
        for i, p in enumerate(pieces):
            m = lab == i
            if m.any():
                out[np.ix_(np.flatnonzero(m), range(1, d + 1), range(1, d + 1))] = \
                    p.time_one_jacobian(y[m])
        return out

    def sampler(m, rng):
        lab = rng.integers(0, len(pieces), size=m)
        return np.concatenate([lab[:, None].astype(float),
                               rng.random((m, d))], axis=1)

    return DiscreteSystem("map", d + 1, step, jac, sampler=sampler,
                          name="union(" + ",".join(p.name for p in pieces) + ")")


def suspension_cat_system(amplitude: float = 0.0, t_sample: float = 1.0
                          ) -> DiscreteSystem:
    """Suspension flow of the cat map with ceiling speed
    f(x) = 1 + amplitude sin(2 pi x_1); amplitude 0 is the unit-speed
    suspension.  State (x1, x2, tau); the time-t map and its Jacobian are
    evaluated in closed form through the page crossings.
    """

    def speed(x):
        return 1.0 + amplitude * np.sin(2 * np.pi * x[:, 0])

    def grad_speed(x):
        g = np.zeros_like(x[:, :2])
        g[:, 0] = 2 * np.pi * amplitude * np.cos(2 * np.pi * x[:, 0])
        return g

    def flow(states, t):
        """Returns final states and the Jacobian of the time-t map."""
        states = np.asarray(states, float)
        m = states.shape[0]
        x = states[:, :2].copy()
        tau = states[:, 2].copy()
        jac = np.tile(np.eye(3), (m, 1, 1))
        # accumulated t_K gradient wrt (x, tau)
        dtk_dx = np.zeros((m, 2))
        dtk_dtau = np.zeros(m)
        t_k = np.zeros(m)
        a_pow = np.tile(np.eye(2), (m, 1, 1))
        f0 = speed(x)
        # first crossing
        t_next = t_k + (1.0 - tau) / f0
        live = t_next <= t
        first = np.ones(m, bool)
        while live.any():
            i = np.flatnonzero(live)
            fi = speed(x[i])
            gi = grad_speed(x[i])
            rem = np.where(first[i], (1.0 - tau[i]), 1.0)
            dtk_dx[i] -= (rem / fi ** 2)[:, None] * np.einsum(
                "mj,mjk->mk", gi, a_pow[i])
            dtk_dtau[i] = np.where(first[i], -1.0 / fi, dtk_dtau[i])
            t_k[i] = t_next[i]
            x[i] = (x[i] @ CAT.T) % 1.0
            a_pow[i] = np.einsum("jk,mkl->mjl", CAT, a_pow[i])
            first[i] = False
            t_next[i] = t_k[i] + 1.0 / speed(x[i])
            live[i] = t_next[i] <= t
        f_end = speed(x)
        g_end = grad_speed(x)
        tau_out = np.where(first, tau + t * f0, (t - t_k) * f_end)
        x_out = x
        # chain rule for tau'
        dtau_dx = np.where(
            first[:, None],
            t * grad_speed(states[:, :2]),
            -f_end[:, None] * dtk_dx
            + ((t - t_k) * 1.0)[:, None] * np.einsum("mj,mjk->mk", g_end, a_pow),
        )
        dtau_dtau = np.where(first, 1.0, -f_end * dtk_dtau)
        jac[:, :2, :2] = a_pow
        jac[:, 2, :2] = dtau_dx
        jac[:, 2, 2] = dtau_dtau
        return np.concatenate([x_out, tau_out[:, None]], axis=1), jac

    def step(states):
        return flow(states, t_sample)[0]

    def jac(states):
        return flow(states, t_sample)[1]

    def sampler(m, rng):
        s = rng.random((m, 3))
        s[:, 2] = 0.2 + 0.6 * s[:, 2]  # keep seeds away from the page seam
        return s

    sys = DiscreteSystem("map", 3, step, jac, sampler=sampler,
                         name=f"suspension_cat(a={amplitude},t={t_sample})")
    sys.meta["speed_sup"] = 1.0 + abs(amplitude)
    return sys


# --------------------------------------------------------------- norm growth

def gamma_plus(sys: DiscreteSystem, horizon: int, n_states: int = 128,
               seed: int = 0, weight: np.ndarray | None = None,
               return_curve: bool = False):
    """Finite-horizon estimate of the norm growth
    lim (1/n) log ||d phi^n||_infty.

    The Jacobian cocycle accumulates with per-step scalar rescaling (the
    log of the scale is tracked), so arbitrarily long products never
    overflow; ||d phi^n||_infty is the max over a seeded state grid of the
    operator norm.  An optional SPD weight changes the Riemannian norm.
    """
    if horizon < 8:
        raise EstimatorError("horizon must be at least 8")
    rng = np.random.default_rng(seed)
    states = sys.sampler(n_states, rng)
    d = states.shape[1]
    w_half = w_inv = None
    if weight is not None:
        vals, vecs = np.linalg.eigh(weight)
        w_half = vecs @ np.diag(np.sqrt(vals)) @ vecs.T
        w_inv = vecs @ np.diag(1.0 / np.sqrt(vals)) @ vecs.T
    cocycle = np.tile(np.eye(d), (n_states, 1, 1))
    log_scale = np.zeros(n_states)
    log_norms = np.empty(horizon)
    x = states
    for n in range(1, horizon + 1):
        jac = sys.time_one_jacobian(x)
        if not np.all(np.isfinite(jac)):
            raise JacobianOverflow("non-finite Jacobian encountered")
        cocycle = np.einsum("mij,mjk->mik", jac, cocycle)
        scale = np.abs(cocycle).reshape(n_states, -1).max(axis=1)
        scale = np.maximum(scale, 1e-300)
        cocycle /= scale[:, None, None]
        log_scale += np.log(scale)
        mat = cocycle
        if weight is not None:
            mat = np.einsum("ij,mjk,kl->mil", w_half, cocycle, w_inv)
        ops = np.linalg.norm(mat, ord=2, axis=(1, 2))
        log_norms[n - 1] = float((log_scale + np.log(ops)).max())
        x = sys.time_one(x)
    slope, resid = _tail_slope(np.arange(1, horizon + 1), log_norms)
    est = GrowthEstimate(slope, float(horizon), n_states, resid)
    if return_curve:
        return est, log_norms
    return est


def gamma(sys: DiscreteSystem, horizon: int, n_states: int = 128,
          seed: int = 0) -> GrowthEstimate:
    """Gamma = max(Gamma_+(phi), Gamma_+(phi^-1))."""
    fwd = gamma_plus(sys, horizon, n_states, seed)
    if sys.inverse is None:
        raise EstimatorError(f"system {sys.name} has no inverse")
    bwd = gamma_plus(sys.inverse(), horizon, n_states, seed)
    best = max(fwd, bwd, key=lambda e: e.value)
    return GrowthEstimate(max(fwd.value, bwd.value), float(horizon),
                          n_states, best.fit_residual)


# ------------------------------------------------------------ separated sets

def _bucket_key(point, cell, n_cells):
    idx = np.floor(point / cell).astype(int) % n_cells
    return tuple(idx[:2])  # bucket on at most two coordinates


def htop_separated(sys: DiscreteSystem, delta_list, horizon: int,
                   n_candidates: int = HTOP_CLOUD, seed: int = 0,
                   return_counts: bool = False):
    """Topological entropy from maximal (T, delta)-separated sets.

    Greedy maximal construction over a seeded candidate cloud, nested in T
    (the accepted set at T seeds the search at T+1, so counts are exactly
    non-decreasing in T) and in delta (large delta seeds smaller).  The
    reported value is the max over delta of the tail-half slope of
    log nu(T, delta); greedy counts are lower bounds, so the estimate is
    biased down.
    """
    if sys.kind != "map":
        raise EstimatorError("htop_separated expects map systems "
                             "(time-sample flows first)")
    deltas = sorted(delta_list, reverse=True)
    if n_candidates * len(deltas) * (horizon + 1) > HTOP_BUDGET:
        raise BudgetExceeded("separated-set search exceeds budget")
    rng = np.random.default_rng(seed)
    states = sys.sampler(n_candidates, rng)
    d = states.shape[1]
    traj = np.empty((horizon + 1, n_candidates, d))
    traj[0] = states
    for k in range(1, horizon + 1):
        traj[k] = sys.step(traj[k - 1])

    period = sys.period

    def run_delta(delta):
        n_cells = max(1, int(math.floor(period / delta)))
        cell = period / n_cells
        acc = np.empty((n_candidates, horizon + 1, d))
        cnt = 0
        accepted = np.zeros(n_candidates, bool)
        counts = []
        for t in range(1, horizon + 1):
            sub = traj[: t + 1]
            buckets = {}
            for j in range(cnt):
                key = _bucket_key(acc[j, t], cell, n_cells)
                buckets.setdefault(key, []).append(j)
            for i in range(n_candidates):
                if accepted[i]:
                    continue
                c = sub[:, i, :]
                base = np.floor(c[t] / cell).astype(int)
                cands = []
                for off in _NEIGHBOR_OFFSETS[min(d, 2)]:
                    key = tuple((base[:2] + off) % n_cells)
                    cands.extend(buckets.get(key, ()))
                ok = True
                if cands:
                    block = acc[cands, : t + 1, :]
                    d_t = sys.metric(c[None, :, :], block).max(axis=1)
                    ok = bool((d_t >= delta).all())
                if ok:
                    acc[cnt, : t + 1] = c
                    if t < horizon:
                        acc[cnt, t + 1:] = traj[t + 1:, i, :]
                    key = _bucket_key(c[t], cell, n_cells)
                    buckets.setdefault(key, []).append(cnt)
                    cnt += 1
                    accepted[i] = True
            counts.append(cnt)
        return counts

    all_counts = {}
    for delta in deltas:
        all_counts[delta] = run_delta(delta)
    # monotonicity in delta: by nesting of the separation condition the
    # larger-delta set is valid for the smaller delta, so counts at smaller
    # delta must dominate; assert it
    for hi, lo in zip(deltas, deltas[1:]):
        if any(a > b for a, b in zip(all_counts[hi], all_counts[lo])):
            raise EstimatorError("separated-set counts not monotone in delta")
    t_grid = np.arange(1, horizon + 1)
    best = None
    for delta in deltas:
        counts = np.asarray(all_counts[delta], float)
        slope, resid = _tail_slope(t_grid, np.log(np.maximum(counts, 1.0)))
        est = GrowthEstimate(slope, float(horizon), n_candidates, resid,
                             delta=delta)
        if best is None or est.value > best.value:
            best = est
    if return_counts:
        return best, all_counts
    return best


_NEIGHBOR_OFFSETS = {
    1: [np.array([k]) for k in (-1, 0, 1)],
    2: [np.array([i, j]) for i in (-1, 0, 1) for j in (-1, 0, 1)],
}


# ------------------------------------------------------------- ball growth

def _ball_volume(geometry, r):
    kind = geometry[0]
    if kind == "hyperbolic":
        return 2.0 * math.pi * (np.cosh(r) - 1.0)
    if kind == "euclidean":
        return math.pi * r ** 2
    if kind == "scaled":
        _, c, inner = geometry
        return _ball_volume(inner, r / c)
    raise EstimatorError(f"unknown geometry {geometry!r}")


def hvol_ball_growth(geometry, r_max: float, n_grid: int = 200
                     ) -> GrowthEstimate:
    """Volume entropy from closed-form ball volumes: slope of log Vol(B_R)
    over [R_max/2, R_max].

    geometry: ("hyperbolic",) curvature -1 plane, ("euclidean",), or
    ("scaled", c, inner) using B(cF, R) = B(F, R/c).
    """
    r = np.linspace(r_max / 4.0, r_max, n_grid)
    vols = _ball_volume(geometry, r)
    slope, resid = _tail_slope(r, np.log(vols))
    return GrowthEstimate(slope, float(r_max), n_grid, resid)


# ---------------------------------------------------------------- reports

def manning_check(h_top_est: GrowthEstimate, h_vol_est: GrowthEstimate,
                  gamma_est: GrowthEstimate | None = None,
                  dim: int | None = None, slack: float = 2e-2) -> dict:
    """h_top >= h_vol within the residual budget; optionally the upper
    chain h_top <= dim * Gamma_+."""
    budget = h_top_est.fit_residual + h_vol_est.fit_residual + slack
    report = {
        "h_top": h_top_est.value,
        "h_vol": h_vol_est.value,
        "budget": budget,
        "manning_ok": h_top_est.value >= h_vol_est.value - budget,
    }
    if gamma_est is not None and dim is not None:
        report["gamma_bound"] = dim * gamma_est.value
        report["gamma_chain_ok"] = (
            h_top_est.value <= dim * gamma_est.value + budget
            + dim * gamma_est.fit_residual)
    return report


def time_change_bound(base: DiscreteSystem, changed: DiscreteSystem,
                      f_sup: float, horizon: int, n_states: int = 96,
                      seed: int = 0, slack: float = 2e-2,
                      htop_params: dict | None = None) -> dict:
    """Gamma_+(phi_fX) <= sup f * Gamma_+(phi_X) at matched horizons.

    With htop_params (keys delta_list, horizon, n_candidates) also runs the
    companion entropy check h_top(phi_fX) <= sup f * h_top(phi_X) through
    the separated-set estimator; both sides share the estimator bias, so
    the report uses a proportional slack.
    """
    lhs = gamma_plus(changed, horizon, n_states, seed)
    rhs = gamma_plus(base, horizon, n_states, seed)
    report = {
        "lhs": lhs.value,
        "rhs": rhs.value,
        "f_sup": f_sup,
        "bound_ok": lhs.value <= f_sup * rhs.value + slack,
        "lhs_residual": lhs.fit_residual,
        "rhs_residual": rhs.fit_residual,
    }
    if htop_params is not None:
        p = dict(htop_params)
        h_lhs = htop_separated(changed, p["delta_list"], p["horizon"],
                               p.get("n_candidates", HTOP_CLOUD), seed)
        h_rhs = htop_separated(base, p["delta_list"], p["horizon"],
                               p.get("n_candidates", HTOP_CLOUD), seed)
        report["htop_lhs"] = h_lhs.value
        report["htop_rhs"] = h_rhs.value
        report["htop_bound_ok"] = (
            h_lhs.value <= f_sup * h_rhs.value + 0.1 * max(h_rhs.value, 1.0))
    return report


def gamma_properties_suite(horizon: int = 48, n_states: int = 96,
                           seed: int = 0, tol: float = 2e-2) -> list:
    """Numerical checks of the elementary norm-growth laws on the built-in
    systems: conjugacy invariance, monotonicity under restriction,
    decomposition, powers, and products."""
    cat = cat_system()
    rot = rotation_system(0.37)
    rows = []

    def row(name, lhs, rhs):
        rows.append({"name": name, "lhs": lhs, "rhs": rhs,
                     "tol": tol, "ok": abs(lhs - rhs) <= tol})

    g_cat = gamma(cat, horizon, n_states, seed).value
    g_conj = gamma(conjugated_cat_system(1), horizon, n_states, seed).value
    row("conjugacy", g_conj, g_cat)

    union = union_system([cat, _linear_torus_system(np.eye(2), "id")])
    g_union = gamma_plus(union, horizon, 2 * n_states, seed).value
    rows.append({"name": "monotonicity", "lhs": g_cat, "rhs": g_union,
                 "tol": tol, "ok": g_cat <= g_union + tol})
    row("decomposition", g_union, g_cat)

    g_sq = gamma(power_system(cat, 2), horizon // 2, n_states, seed).value
    row("power", g_sq, 2.0 * g_cat)

    g_prod = gamma(product_system(cat, rot), horizon, n_states, seed).value
    row("product", g_prod, g_cat)
    return rows
