"""Reference route: direct integration of the truncated level process.

The queue is truncated at a finite level cap; arrivals that would push the
chain above the cap are blocked (the blocked stage simply freezes, keeping
the generator conservative).  The resulting linear ODE

    p'(t) = lam(t) * p(t) S_arr + mu(t) * p(t) S_srv

is driven with classical fourth-order Runge-Kutta steps aligned to a fixed
output grid until the state, sampled on that grid, stops changing from one
period to the next.  The two constant structure matrices S_arr and S_srv
carry unit rates; the time dependence sits entirely in the two scalars, so
no matrix is rebuilt inside the stepping loop.

This module is deliberately independent of the root-series machinery: it
never sees characteristic roots and the series code never sees this solver.
Their agreement is checked in tests, not assumed anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .model import ModelSpec


class TrigInterpolant:
    """Trigonometric interpolation of 1-periodic samples on a uniform grid.

    Exact at the sample points.  For an even number of samples the top
    (Nyquist) harmonic is folded to a pure cosine, the usual convention for
    real data.
    """

    def __init__(self, samples: np.ndarray):
        samples = np.asarray(samples, dtype=float)
        if samples.ndim == 1:
            samples = samples[:, None]
        self.n = samples.shape[0]
        coef = np.fft.rfft(samples, axis=0) / self.n
        weights = np.full(coef.shape[0], 2.0)
        weights[0] = 1.0
        if self.n % 2 == 0:
            weights[-1] = 1.0
        self._coef = weights[:, None] * coef
        self._harmonics = np.arange(coef.shape[0])

    def __call__(self, u):
        u = np.atleast_1d(np.asarray(u, dtype=float))
        phases = np.exp(2j * np.pi * np.outer(u, self._harmonics))
        vals = np.real(phases @ self._coef)
        return vals


def _structure_matrices(k: int, m: int, level_cap: int):
    """Unit-rate generator structure, split into arrival and service parts.

    State order: k idle states (arrival stage a), then levels 1..level_cap
    with km phases each, phase (a, s) flattened as a*m + s.  Returned as the
    transposed CSR matrices so that rhs = lam * (AT @ p) + mu * (MT @ p).
    """
    km = k * m
    dim = k + level_cap * km

    def busy(j: int, a: int, s: int) -> int:
        return k + (j - 1) * km + a * m + s

    arr_r, arr_c, arr_v = [], [], []
    srv_r, srv_c, srv_v = [], [], []

    def put(rows, cols, vals, i, j, v):
        rows.append(i)
        cols.append(j)
        vals.append(v)

    for a in range(k):
        put(arr_r, arr_c, arr_v, a, a, -1.0)
        if a < k - 1:
            put(arr_r, arr_c, arr_v, a, a + 1, 1.0)
        else:
            put(arr_r, arr_c, arr_v, a, busy(1, 0, 0), 1.0)

    for j in range(1, level_cap + 1):
        for a in range(k):
            for s in range(m):
                x = busy(j, a, s)
                # arrival stages; the final stage at the cap is blocked
                if a < k - 1:
                    put(arr_r, arr_c, arr_v, x, x, -1.0)
                    put(arr_r, arr_c, arr_v, x, busy(j, a + 1, s), 1.0)
                elif j < level_cap:
                    put(arr_r, arr_c, arr_v, x, x, -1.0)
                    put(arr_r, arr_c, arr_v, x, busy(j + 1, 0, s), 1.0)
                # service stages
                put(srv_r, srv_c, srv_v, x, x, -1.0)
                if s < m - 1:
                    put(srv_r, srv_c, srv_v, x, busy(j, a, s + 1), 1.0)
                elif j > 1:
                    put(srv_r, srv_c, srv_v, x, busy(j - 1, a, 0), 1.0)
                else:
                    put(srv_r, srv_c, srv_v, x, a, 1.0)

    s_arr = sp.csr_matrix((arr_v, (arr_r, arr_c)), shape=(dim, dim))
    s_srv = sp.csr_matrix((srv_v, (srv_r, srv_c)), shape=(dim, dim))
    return s_arr.T.tocsr(), s_srv.T.tocsr()


@dataclass
class PeriodicDistribution:
    """Periodic law of the truncated queue, sampled on a uniform grid.

    idle[i, a] is the probability of an empty system with arrival stage a at
    time grid[i]; levels[i, j-1, a*m+s] the probability of level j in phase
    (a, s).  `residual` is the sup-norm change between the last two periods
    and `periods` how many were integrated.
    """

    spec: ModelSpec
    level_cap: int
    grid_size: int
    grid: np.ndarray
    idle: np.ndarray
    levels: np.ndarray
    periods: int
    residual: float
    _interp: TrigInterpolant | None = field(default=None, repr=False)

    def _interpolant(self) -> TrigInterpolant:
        if self._interp is None:
            km = self.spec.phase_count
            flat = np.concatenate(
                [self.idle, self.levels.reshape(self.grid_size, -1)], axis=1
            )
            self._interp = TrigInterpolant(flat)
        return self._interp

    def idle_at(self, u) -> np.ndarray:
        """Idle-state probabilities at arbitrary times, (len(u), k)."""
        return self._interpolant()(u)[:, : self.spec.k]

    def levels_at(self, u) -> np.ndarray:
        """Busy-level probabilities at arbitrary times, (len(u), cap, km)."""
        vals = self._interpolant()(u)[:, self.spec.k:]
        return vals.reshape(-1, self.level_cap, self.spec.phase_count)

    def level_mass(self, j: int) -> np.ndarray:
        """Total probability of level j on the grid."""
        if j == 0:
            return self.idle.sum(axis=1)
        if not 1 <= j <= self.level_cap:
            raise ValueError(f"level {j} outside truncation 0..{self.level_cap}")
        return self.levels[:, j - 1].sum(axis=1)

    def total_mass(self) -> np.ndarray:
        return self.idle.sum(axis=1) + self.levels.sum(axis=(1, 2))

    def cap_mass(self) -> float:
        """Largest probability seen at the truncation cap; a cap check."""
        return float(self.levels[:, -1].sum(axis=1).max())


def integrate_periodic(spec: ModelSpec, level_cap: int = 50, grid_size: int = 512,
                       tol: float = 1e-10, max_periods: int = 500) -> PeriodicDistribution:
    """Integrate the truncated queue until its periodic regime is reached.

    Starts from the uniform distribution over all truncated states and runs
    whole periods with grid_size RK4 steps each; convergence is declared
    when the state sampled at the grid points changes by at most tol in
    sup norm between consecutive periods.  Raises RuntimeError when
    max_periods is exhausted first.
    """
    if level_cap < 1:
        raise ValueError("level_cap must be >= 1")
    if grid_size < 4:
        raise ValueError("grid_size must be >= 4")
    k, km = spec.k, spec.phase_count
    dim = k + level_cap * km
    at, mt = _structure_matrices(spec.k, spec.m, level_cap)

    half_nodes = np.arange(2 * grid_size + 1) / (2.0 * grid_size)
    lam = spec.arrival.value(half_nodes)
    mu = spec.service.value(half_nodes)

    h = 1.0 / grid_size
    p = np.full(dim, 1.0 / dim)
    samples = np.empty((grid_size, dim))
    prev = None
    residual = np.inf

    for period in range(1, max_periods + 1):
        for i in range(grid_size):
            samples[i] = p
            l0, lh, l1 = lam[2 * i], lam[2 * i + 1], lam[2 * i + 2]
            m0, mh, m1 = mu[2 * i], mu[2 * i + 1], mu[2 * i + 2]
            k1 = l0 * (at @ p) + m0 * (mt @ p)
            q = p + (0.5 * h) * k1
            k2 = lh * (at @ q) + mh * (mt @ q)
            q = p + (0.5 * h) * k2
            k3 = lh * (at @ q) + mh * (mt @ q)
            q = p + h * k3
            k4 = l1 * (at @ q) + m1 * (mt @ q)
            p = p + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if prev is not None:
            residual = float(np.abs(samples - prev).max())
            if residual <= tol:
                return PeriodicDistribution(
                    spec=spec,
                    level_cap=level_cap,
                    grid_size=grid_size,
                    grid=np.arange(grid_size) / grid_size,
                    idle=samples[:, :k].copy(),
                    levels=samples[:, k:].reshape(grid_size, level_cap, km).copy(),
                    periods=period,
                    residual=residual,
                )
        prev = samples.copy()

    raise RuntimeError(
        f"periodic regime not reached in {max_periods} periods "
        f"(last residual {residual:.3e}); raise max_periods or loosen tol"
    )


@dataclass
class BoundaryFunctions:
    """The two boundary slices the series method needs, as smooth functions.

    idle[i] holds the k idle-state probabilities and first[i] the km level-1
    probabilities on the grid; evaluation between grid points uses
    trigonometric interpolation, which reproduces the grid values exactly.
    """

    grid_size: int
    grid: np.ndarray
    idle: np.ndarray
    first: np.ndarray
    _idle_interp: TrigInterpolant | None = field(repr=False, default=None)
    _first_interp: TrigInterpolant | None = field(repr=False, default=None)

    def __post_init__(self):
        for name, arr in (("idle", self.idle), ("first", self.first)):
            low = float(arr.min())
            if low < -1e-9:
                raise ValueError(f"boundary slice {name} is negative ({low:.3e})")
        self.idle = np.maximum(self.idle, 0.0)
        self.first = np.maximum(self.first, 0.0)
        self._idle_interp = TrigInterpolant(self.idle)
        self._first_interp = TrigInterpolant(self.first)

    def idle_at(self, u) -> np.ndarray:
        """Idle-state probabilities at times u, shape (len(u), k)."""
        return self._idle_interp(u)

    def first_at(self, u) -> np.ndarray:
        """Level-1 phase probabilities at times u, shape (len(u), km)."""
        return self._first_interp(u)


def extract_boundary(dist: PeriodicDistribution) -> BoundaryFunctions:
    """Pull the idle and level-1 slices out of an integrated distribution."""
    return BoundaryFunctions(
        grid_size=dist.grid_size,
        grid=dist.grid.copy(),
        idle=dist.idle.copy(),
        first=dist.levels[:, 0].copy(),
    )
