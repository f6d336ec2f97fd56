"""Busy-period distribution: first passage of the level process to empty.

Strip the empty-system boundary and the phase process at net level change n
over a window [u, t] factors into two Poisson stage streams; its transition
weight is the matrix

    F_n(u, t) = sum over completed cycles A - D = n of  P_A kron P_D,
    P_A[a1, a2] = pmf(Poisson(Lam), A k + a2 - a1),
    P_D[s1, s2] = pmf(Poisson(M),  D m + s2 - s1),

with Lam, M the cumulative rates.  Killing the process at its first visit to
the empty level and matching the z**0 coefficient of the resulting
generating-function identity leaves a Volterra equation of the second kind
for the absorption-rate row X(t) (which lives on fresh-service columns,
s = 0):

    X(t) = g'(t) - integral over nu in [u, t] of  X(nu) K(nu, t) d nu,
    K(nu, t)  = F_1(nu, t) down(t) + F_0(nu, t) local(t) + F_-1(nu, t) up(t),
    g'(t) = start_row [ F_{1-j}(u, t) down(t) + F_{-j}(u, t) local(t)
                        + F_{-1-j}(u, t) up(t) ],

where up/local/down are the generator blocks and j the starting level.  The
kernel satisfies K(t, t) = local(t), so a product-trapezoid discretization
with the diagonal term kept implicit is stable and second-order accurate.
The kernel is never materialized: each step assembles the three shifted
weights from Poisson pmf tables and contracts them against the stored X
rows in one einsum per shift.

`busy_oracle` integrates the killed process directly (levels truncated high,
absorption counted per arrival stage) and shares no code path with the
Volterra route; the two must agree and tests enforce it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.special import gammaln

from .model import ModelSpec, generator_blocks

# Poisson pmf tables are cut this many standard deviations past the mean
# (plus a floor for tiny means); entries beyond are below 1e-16 of the mass.
_TAIL_SIGMAS = 12.0
_TAIL_FLOOR = 35.0


def _table_width(mean: float, stages: int) -> int:
    return int(math.ceil(mean + _TAIL_SIGMAS * math.sqrt(mean) + _TAIL_FLOOR))


def _poisson_table(means: np.ndarray, width: int) -> np.ndarray:
    """pmf(Poisson(means[i]), x) for x = 0..width-1, shape (len(means), width).

    Log-space keeps large means stable; means equal to zero reduce to the
    unit mass at x = 0.
    """
    counts = np.arange(width, dtype=float)
    log_fact = gammaln(counts + 1.0)
    means = np.asarray(means, dtype=float)[:, None]
    safe = np.maximum(means, 1e-300)
    with np.errstate(under="ignore"):
        return np.exp(counts[None, :] * np.log(safe) - means - log_fact[None, :])


def _unit_blocks(spec: ModelSpec):
    """Constant factors of the busy-level generator blocks.

    up(t) = lam(t)*U, local(t) = lam(t)*LA + mu(t)*LS, down(t) = mu(t)*D.
    """
    k, m = spec.k, spec.m
    eye_k, eye_m = np.eye(k), np.eye(m)
    arr_local = -np.eye(k)
    for i in range(k - 1):
        arr_local[i, i + 1] = 1.0
    arr_done = np.zeros((k, k))
    arr_done[k - 1, 0] = 1.0
    srv_local = -np.eye(m)
    for i in range(m - 1):
        srv_local[i, i + 1] = 1.0
    srv_done = np.zeros((m, m))
    srv_done[m - 1, 0] = 1.0
    return (
        np.kron(arr_done, eye_m),                   # U
        np.kron(arr_local, eye_m),                  # LA
        np.kron(eye_k, srv_local),                  # LS
        np.kron(eye_k, srv_done),                   # D
    )


def _pair_indices(shifts, a_max, d_max, k, m):
    """Completed-cycle pairs (A, D) with A - D = shift, plus gather indices.

    Returns (slices per shift, IA, ID, mask_a, mask_d) where IA[p, a1, a2] =
    A_p * k + a2 - a1 clipped at zero with mask_a recording validity, and ID
    likewise on the service side.
    """
    pairs = []
    slices = []
    for shift in shifts:
        start = len(pairs)
        for a_cnt in range(max(0, shift), a_max + 1):
            d_cnt = a_cnt - shift
            if 0 <= d_cnt <= d_max:
                pairs.append((a_cnt, d_cnt))
        slices.append(slice(start, len(pairs)))
    a_arr = np.array([p[0] for p in pairs], dtype=np.int64)
    d_arr = np.array([p[1] for p in pairs], dtype=np.int64)
    da = np.arange(k)[None, :] - np.arange(k)[:, None]    # a2 - a1
    ds = np.arange(m)[None, :] - np.arange(m)[:, None]
    ia = a_arr[:, None, None] * k + da[None, :, :]
    idx = d_arr[:, None, None] * m + ds[None, :, :]
    mask_a = ia >= 0
    mask_d = idx >= 0
    return slices, np.maximum(ia, 0), np.maximum(idx, 0), mask_a, mask_d


def net_change_matrix(spec: ModelSpec, u: float, t: float, n: int) -> np.ndarray:
    """Free-process transition weights at net level change n, (km, km)."""
    lam_cum = float(spec.arrival.cumulative(u, t))
    mu_cum = float(spec.service.cumulative(u, t))
    k, m = spec.k, spec.m
    width_a = _table_width(lam_cum, k)
    width_d = _table_width(mu_cum, m)
    a_max = width_a // k + 1
    d_max = width_d // m + 1
    slices, ia, idx, mask_a, mask_d = _pair_indices(
        [n], a_max, d_max, k, m
    )
    pa = _poisson_table(np.array([lam_cum]), a_max * k + k)[0]
    pd = _poisson_table(np.array([mu_cum]), d_max * m + m)[0]
    ga = pa[ia] * mask_a                                  # (P, k, k)
    gd = pd[idx] * mask_d                                 # (P, m, m)
    out = np.einsum("pac,psw->ascw", ga[slices[0]], gd[slices[0]])
    return out.reshape(k * m, k * m)


def _normalize_phase(spec: ModelSpec, phase) -> int:
    if isinstance(phase, tuple):
        a, s = phase
        if not (0 <= a < spec.k and 0 <= s < spec.m):
            raise ValueError("start phase out of range")
        return a * spec.m + s
    phase = int(phase)
    if not 0 <= phase < spec.phase_count:
        raise ValueError("start phase out of range")
    return phase


@dataclass(frozen=True)
class VolterraSolution:
    """Busy-period CDF started at (level, phase) at time u.

    values[i, a] is the probability that the system has emptied by times[i]
    with arrival stage a at that moment; sum over a for the plain CDF.
    off_support tracks how much of the computed absorption row leaked off
    the fresh-service columns (a pure discretization diagnostic), cap_mass
    the probability parked at the truncation cap (oracle route only).
    """

    level: int
    phase: int
    u: float
    step: float
    times: np.ndarray
    values: np.ndarray
    source: str
    off_support: float = 0.0
    cap_mass: float = 0.0

    def total(self) -> np.ndarray:
        return self.values.sum(axis=1)


def busy_period_cdf(spec: ModelSpec, level: int, phase, u: float = 0.0,
                    horizon: float = 5.0, step: float = 1.0 / 512,
                    refine: bool = True) -> VolterraSolution:
    """Volterra route to the busy-period CDF.

    Product-trapezoid march with the diagonal kernel block implicit; the
    absorption density is accumulated into a CDF on the same grid.  With
    refine=True (the default) a second march at half the step sharpens the
    values by Richardson extrapolation of the second-order scheme; the
    reported grid stays at `step`.  refine=False exposes the raw march,
    which is what step-halving order studies should use.  Raises
    RuntimeError when the march leaves [0, 1] by more than rounding allows,
    the symptom of too coarse a step.
    """
    if refine:
        coarse = _volterra_march(spec, level, phase, u, horizon, step)
        fine = _volterra_march(spec, level, phase, u, horizon, step / 2)
        values = (4.0 * fine.values[::2] - coarse.values) / 3.0
        return VolterraSolution(
            level=coarse.level, phase=coarse.phase, u=coarse.u,
            step=coarse.step, times=coarse.times, values=values,
            source="volterra", off_support=fine.off_support,
        )
    return _volterra_march(spec, level, phase, u, horizon, step)


def _volterra_march(spec: ModelSpec, level: int, phase, u: float,
                    horizon: float, step: float) -> VolterraSolution:
    if level < 1:
        raise ValueError("busy period starts at level >= 1")
    if horizon <= 0 or step <= 0:
        raise ValueError("horizon and step must be positive")
    q0 = _normalize_phase(spec, phase)
    a1, s1 = divmod(q0, spec.m)
    k, m = spec.k, spec.m
    km = k * m
    n_steps = int(round(horizon / step))
    if n_steps < 2:
        raise ValueError("horizon must cover at least two steps")
    h = horizon / n_steps
    times = u + h * np.arange(n_steps + 1)

    lam = spec.arrival.value(times)
    mu = spec.service.value(times)
    acc_a = spec.arrival.accumulated(times)
    acc_d = spec.service.accumulated(times)
    blk_u, blk_la, blk_ls, blk_d = _unit_blocks(spec)

    lam_total = acc_a[-1] - acc_a[0]
    mu_total = acc_d[-1] - acc_d[0]
    width_a = _table_width(lam_total, k)
    width_d = _table_width(mu_total, m)
    a_max = width_a // k + 1
    d_max = width_d // m + 1 + level + 2

    # forcing rows: start_row F_n(u, t_i) for the three shifts around -level
    f_slices, f_ia, f_id, f_ma, f_md = _pair_indices(
        [1 - level, -level, -1 - level], a_max, d_max, k, m
    )
    pa_u = _poisson_table(acc_a - acc_a[0], a_max * k + k)
    pd_u = _poisson_table(acc_d - acc_d[0], d_max * m + m)
    ga = pa_u[:, f_ia[:, a1, :]] * f_ma[None, :, a1, :]   # (i, P, k)
    gd = pd_u[:, f_id[:, s1, :]] * f_md[None, :, s1, :]   # (i, P, m)
    rows = {}
    for shift, sl in zip((1 - level, -level, -1 - level), f_slices):
        rows[shift] = np.einsum("ipa,ips->ias", ga[:, sl], gd[:, sl]).reshape(-1, km)
    forcing = (
        mu[:, None] * (rows[1 - level] @ blk_d)
        + (rows[-level] @ blk_la) * lam[:, None]
        + (rows[-level] @ blk_ls) * mu[:, None]
        + lam[:, None] * (rows[-1 - level] @ blk_u)
    )

    # kernel gather indices for shifts +1, 0, -1
    k_slices, k_ia, k_id, k_ma, k_md = _pair_indices(
        [1, 0, -1], a_max, d_max, k, m
    )
    mask_a = k_ma.astype(float)
    # service-side gather restricted to source stage 0: the absorption
    # density lives on fresh-service columns, so only that slice of the
    # history enters the convolution (its indices are never negative)
    k_id0 = k_id[:, 0, :]

    dens = np.zeros((n_steps + 1, km))
    dens[0] = forcing[0]
    weighted0 = np.zeros((n_steps + 1, k))
    weighted0[0] = 0.5 * dens[0].reshape(k, m)[:, 0]

    eye = np.eye(km)
    for i in range(1, n_steps + 1):
        lam_gaps = acc_a[i] - acc_a[:i]
        mu_gaps = acc_d[i] - acc_d[:i]
        # the oldest row has the widest pmf; size tables and pair prefixes
        # to it (pairs are A-ascending within each shift, so a prefix works)
        a_hi = min(a_max, _table_width(lam_gaps[0], k) // k + 1)
        d_hi = min(d_max, _table_width(mu_gaps[0], m) // m + 1)
        pa = _poisson_table(lam_gaps, a_hi * k + k)
        pd = _poisson_table(mu_gaps, d_hi * m + m)
        xs = weighted0[:i]
        conv = {}
        for shift, sl in zip((1, 0, -1), k_slices):
            count = min(a_hi, d_hi + shift) - max(0, shift) + 1
            count = min(count, sl.stop - sl.start)
            if count <= 0:
                conv[shift] = np.zeros(km)
                continue
            ssl = slice(sl.start, sl.start + count)
            ga_i = pa[:, k_ia[ssl]] * mask_a[ssl][None]   # (i, P', k, k)
            gd_i = pd[:, k_id0[ssl]]                      # (i, P', m)
            half = np.einsum("rpab,ra->rpb", ga_i, xs)
            conv[shift] = np.einsum("rpb,rpt->bt", half, gd_i).reshape(km)
        integral = (
            mu[i] * (conv[1] @ blk_d)
            + lam[i] * (conv[0] @ blk_la) + mu[i] * (conv[0] @ blk_ls)
            + lam[i] * (conv[-1] @ blk_u)
        )
        local_i = lam[i] * blk_la + mu[i] * blk_ls
        rhs = forcing[i] - h * integral
        dens[i] = np.linalg.solve(eye + (0.5 * h) * local_i.T, rhs)
        weighted0[i] = dens[i].reshape(k, m)[:, 0]

    on_support = dens.reshape(-1, k, m)[:, :, 0]
    off_support = float(np.abs(dens.reshape(-1, k, m)[:, :, 1:]).max()) if m > 1 else 0.0
    increments = 0.5 * h * (on_support[1:] + on_support[:-1])
    values = np.vstack([np.zeros((1, k)), np.cumsum(increments, axis=0)])

    total = values.sum(axis=1)
    if total.min() < -1e-2 or total.max() > 1.01:
        raise RuntimeError(
            "Volterra march left [0, 1]; the step is too coarse for these rates"
        )
    return VolterraSolution(
        level=level, phase=q0, u=float(u), step=h, times=times,
        values=values, source="volterra", off_support=off_support,
    )


def _absorbing_structure(k: int, m: int, level_cap: int):
    """Unit-rate structure of the killed process with absorption sinks.

    States: levels 1..level_cap (km phases each), then k sink states counting
    absorption by arrival stage.  Transposed CSR for row-vector stepping.
    """
    km = k * m
    dim = level_cap * km + k

    def busy(j: int, a: int, s: int) -> int:
        return (j - 1) * km + a * m + s

    def sink(a: int) -> int:
        return level_cap * km + a

    arr_r, arr_c, arr_v = [], [], []
    srv_r, srv_c, srv_v = [], [], []
    for j in range(1, level_cap + 1):
        for a in range(k):
            for s in range(m):
                x = busy(j, a, s)
                if a < k - 1:
                    arr_r.append(x); arr_c.append(x); arr_v.append(-1.0)
                    arr_r.append(x); arr_c.append(busy(j, a + 1, s)); arr_v.append(1.0)
                elif j < level_cap:
                    arr_r.append(x); arr_c.append(x); arr_v.append(-1.0)
                    arr_r.append(x); arr_c.append(busy(j + 1, 0, s)); arr_v.append(1.0)
                srv_r.append(x); srv_c.append(x); srv_v.append(-1.0)
                if s < m - 1:
                    srv_r.append(x); srv_c.append(busy(j, a, s + 1)); srv_v.append(1.0)
                elif j > 1:
                    srv_r.append(x); srv_c.append(busy(j - 1, a, 0)); srv_v.append(1.0)
                else:
                    srv_r.append(x); srv_c.append(sink(a)); srv_v.append(1.0)

    s_arr = sp.csr_matrix((arr_v, (arr_r, arr_c)), shape=(dim, dim))
    s_srv = sp.csr_matrix((srv_v, (srv_r, srv_c)), shape=(dim, dim))
    return s_arr.T.tocsr(), s_srv.T.tocsr()


def busy_oracle(spec: ModelSpec, level: int, phase, u: float = 0.0,
                horizon: float = 5.0, step: float = 1.0 / 512,
                level_cap: int = 40, substeps: int = 4) -> VolterraSolution:
    """Absorbing-ODE route: integrate the killed process and read the sinks.

    The level cap must be generous enough that essentially no probability
    visits it; the run aborts when more than 1e-10 ever sits at the cap.
    """
    if level < 1:
        raise ValueError("busy period starts at level >= 1")
    if level > level_cap // 2:
        raise ValueError("level_cap should comfortably exceed the start level")
    q0 = _normalize_phase(spec, phase)
    k, m = spec.k, spec.m
    km = k * m
    n_rec = int(round(horizon / step))
    h = (horizon / n_rec) / substeps
    at, mt = _absorbing_structure(k, m, level_cap)
    dim = at.shape[0]

    total_steps = n_rec * substeps
    nodes = u + (horizon / total_steps) * 0.5 * np.arange(2 * total_steps + 1)
    lam = spec.arrival.value(nodes)
    mu = spec.service.value(nodes)

    p = np.zeros(dim)
    p[(level - 1) * km + q0] = 1.0
    values = np.zeros((n_rec + 1, k))
    cap_slice = slice((level_cap - 1) * km, level_cap * km)
    cap_mass = 0.0

    idx = 0
    for rec in range(1, n_rec + 1):
        for _ in range(substeps):
            l0, lh, l1 = lam[2 * idx], lam[2 * idx + 1], lam[2 * idx + 2]
            m0, mh, m1 = mu[2 * idx], mu[2 * idx + 1], mu[2 * idx + 2]
            k1 = l0 * (at @ p) + m0 * (mt @ p)
            q = p + (0.5 * h) * k1
            k2 = lh * (at @ q) + mh * (mt @ q)
            q = p + (0.5 * h) * k2
            k3 = lh * (at @ q) + mh * (mt @ q)
            q = p + h * k3
            k4 = l1 * (at @ q) + m1 * (mt @ q)
            p = p + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            idx += 1
        values[rec] = p[level_cap * km:]
        cap_mass = max(cap_mass, float(p[cap_slice].sum()))
        if cap_mass > 1e-10:
            raise RuntimeError(
                f"probability {cap_mass:.3e} reached the level cap {level_cap}; "
                "raise level_cap"
            )

    return VolterraSolution(
        level=level, phase=q0, u=float(u), step=horizon / n_rec,
        times=u + (horizon / n_rec) * np.arange(n_rec + 1),
        values=values, source="ode", cap_mass=cap_mass,
    )
