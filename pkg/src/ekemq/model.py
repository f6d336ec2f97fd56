"""Model primitives for a single-server queue with Erlang-staged arrivals and
service under rates that repeat with period one.

An arrival is complete after k exponential stages, each finishing at rate
lam(t); a service is complete after m stages at rate mu(t).  Both rates are
trigonometric polynomials in t with period one, so their averages and
integrals are available in closed form.  The state of the system is the pair
(queue level, phase), where the phase combines the current arrival stage
a in {0..k-1} and, while the server is busy, the current service stage
s in {0..m-1}.  Phases are flattened lexicographically as a*m + s.

The level process is a quasi-birth-death chain: the generator restricted to
one busy level splits into a block that moves one level up (an arrival stage
completing from stage k-1), a block that moves one level down (a service
stage completing from stage m-1), and a local block.  All three are built
here, together with the boundary blocks that couple the empty system to
level one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

_TWO_PI = 2.0 * math.pi

# Grid used to certify nonnegativity of a rate function at construction.
_POSITIVITY_GRID = 4096


def _as_terms(terms) -> tuple[tuple[int, float], ...]:
    """Normalize harmonic terms to a sorted tuple of (harmonic, amplitude)."""
    out = []
    for j, amp in terms:
        j = int(j)
        if j < 1:
            raise ValueError(f"harmonic index must be >= 1, got {j}")
        out.append((j, float(amp)))
    out.sort()
    seen = [j for j, _ in out]
    if len(set(seen)) != len(seen):
        raise ValueError("duplicate harmonic index in rate function")
    return tuple(out)


@dataclass(frozen=True)
class RateFunction:
    """Nonnegative 1-periodic rate written as a finite trigonometric sum.

    value(t) = base + sum_j amp_cos[j] * cos(2 pi j t)
                    + sum_j amp_sin[j] * sin(2 pi j t)

    The representation keeps the period-average (`mean`) and the running
    integral (`accumulated`) exact, which the series method relies on; no
    numerical quadrature of the rate itself is ever needed.
    """

    base: float
    cos: tuple[tuple[int, float], ...] = field(default=())
    sin: tuple[tuple[int, float], ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "base", float(self.base))
        object.__setattr__(self, "cos", _as_terms(self.cos))
        object.__setattr__(self, "sin", _as_terms(self.sin))
        if not self.base > 0.0:
            raise ValueError("rate function must have a strictly positive mean")
        grid = np.arange(_POSITIVITY_GRID) / _POSITIVITY_GRID
        low = float(np.min(self.value(grid)))
        if low < -1e-12:
            raise ValueError(f"rate function dips negative (min {low:.3e})")

    def value(self, t):
        """Rate at time t (scalar or array)."""
        t = np.asarray(t, dtype=float)
        out = np.full(t.shape, self.base)
        for j, amp in self.cos:
            out += amp * np.cos(_TWO_PI * j * t)
        for j, amp in self.sin:
            out += amp * np.sin(_TWO_PI * j * t)
        return out if out.ndim else float(out)

    def mean(self) -> float:
        """Average over one period; the harmonics integrate to zero."""
        return self.base

    def accumulated(self, t):
        """Integral of the rate from 0 to t, in closed form."""
        t = np.asarray(t, dtype=float)
        out = self.base * t.astype(float)
        for j, amp in self.cos:
            out = out + amp * np.sin(_TWO_PI * j * t) / (_TWO_PI * j)
        for j, amp in self.sin:
            out = out + amp * (1.0 - np.cos(_TWO_PI * j * t)) / (_TWO_PI * j)
        return out if out.ndim else float(out)

    def cumulative(self, u, t):
        """Integral of the rate over [u, t].  Requires t >= u."""
        u = np.asarray(u, dtype=float)
        t = np.asarray(t, dtype=float)
        if np.any(t - u < -1e-15):
            raise ValueError("cumulative rate needs t >= u")
        out = self.accumulated(t) - self.accumulated(u)
        return out if np.ndim(out) else float(out)


def ergodic_margin(k: int, m: int, arrival_mean: float, service_mean: float) -> float:
    """Stability margin arrival_mean * m - service_mean * k.

    Customers arrive at average rate arrival_mean / k and are served at
    average rate service_mean / m, so the system is stable exactly when the
    returned margin is negative.
    """
    return arrival_mean * m - service_mean * k


@dataclass(frozen=True)
class ModelSpec:
    """Queue description: stage counts and the two periodic stage rates.

    k and m must be coprime; this keeps the k + m characteristic exponents
    of the phase process distinct, which the series representation needs.
    Construction fails for unstable parameter sets.
    """

    k: int
    m: int
    arrival: RateFunction
    service: RateFunction

    def __post_init__(self):
        if int(self.k) != self.k or int(self.m) != self.m:
            raise ValueError("stage counts must be integers")
        object.__setattr__(self, "k", int(self.k))
        object.__setattr__(self, "m", int(self.m))
        if self.k < 1 or self.m < 1:
            raise ValueError("stage counts must be >= 1")
        if math.gcd(self.k, self.m) != 1:
            raise ValueError(
                f"stage counts must be coprime, got k={self.k}, m={self.m}"
            )
        margin = ergodic_margin(self.k, self.m, self.arrival.mean(), self.service.mean())
        if not margin < 0.0:
            raise ValueError(
                "unstable model: arrival_mean*m - service_mean*k = "
                f"{margin:g} must be negative"
            )

    @property
    def phase_count(self) -> int:
        """Number of phases at a busy level, k*m."""
        return self.k * self.m

    @property
    def arrival_mean(self) -> float:
        return self.arrival.mean()

    @property
    def service_mean(self) -> float:
        return self.service.mean()

    @property
    def load(self) -> float:
        """Customer arrival rate over service rate, (lam/k)/(mu/m)."""
        return (self.arrival_mean / self.k) / (self.service_mean / self.m)


def flat_index(a: int, s: int, m: int) -> int:
    """Flatten (arrival stage a, service stage s) to a*m + s."""
    return a * m + s


def split_index(idx: int, m: int) -> tuple[int, int]:
    """Inverse of flat_index."""
    return divmod(idx, m)


def _stage_blocks(count: int, rate: float) -> tuple[np.ndarray, np.ndarray]:
    """Local and completion blocks of a cyclic Erlang stage chain.

    local moves the stage pointer forward inside one cycle (with -rate on
    the diagonal), completion carries the stage-(count-1) -> stage-0 jump
    that finishes the cycle.
    """
    local = -rate * np.eye(count)
    for i in range(count - 1):
        local[i, i + 1] = rate
    completion = np.zeros((count, count))
    completion[count - 1, 0] = rate
    return local, completion


@dataclass(frozen=True)
class GeneratorBlocks:
    """Instantaneous generator of the queue, split by level movement.

    up, local, down act on busy levels (km x km); idle is the k x k block of
    the empty system; idle_up injects level 0 -> 1 on an arrival completion;
    down_to_idle drains level 1 -> 0 on a service completion.  Rows of the
    assembled generator sum to zero.
    """

    t: float
    up: np.ndarray
    local: np.ndarray
    down: np.ndarray
    idle: np.ndarray
    idle_up: np.ndarray
    down_to_idle: np.ndarray


def generator_blocks(spec: ModelSpec, t: float) -> GeneratorBlocks:
    """Evaluate all generator blocks at time t."""
    k, m = spec.k, spec.m
    lam = float(spec.arrival.value(t))
    mu = float(spec.service.value(t))
    arr_local, arr_done = _stage_blocks(k, lam)
    srv_local, srv_done = _stage_blocks(m, mu)

    up = np.kron(arr_done, np.eye(m))
    local = np.kron(arr_local, np.eye(m)) + np.kron(np.eye(k), srv_local)
    down = np.kron(np.eye(k), srv_done)

    idle = arr_local.copy()
    idle_up = np.zeros((k, k * m))
    idle_up[k - 1, 0] = lam
    down_to_idle = np.zeros((k * m, k))
    for a in range(k):
        down_to_idle[flat_index(a, m - 1, m), a] = mu

    return GeneratorBlocks(
        t=float(t),
        up=up,
        local=local,
        down=down,
        idle=idle,
        idle_up=idle_up,
        down_to_idle=down_to_idle,
    )


def phase_eigensystem(spec: ModelSpec, z: complex, t: float,
                      root_k: complex | None = None,
                      root_m: complex | None = None):
    """Eigenvalues and eigenvectors of the level-transform matrix.

    For a fixed transform variable z the matrix local + z*up + (1/z)*down is
    a Kronecker sum of a k x k arrival part and an m x m service part, so
    its km eigenpairs factor.  With w_k = exp(2 pi i / k), w_m likewise, and
    caller-chosen branches root_k (root_k**k == z) and root_m
    (root_m**m == z):

      value(l, j)  = lam(t) * (w_k**l * root_k - 1) + mu(t) * (w_m**j / root_m - 1)
      vector(l, j) = kron(v_l, u_j)
      v_l[i] = root_k**(i + 1 - k) * w_k**(i l) / sqrt(k)
      u_j[i] = root_m**(m - 1 - i) * w_m**(i j) / sqrt(m)

    Returns (values, vectors) with values[l*m + j] matching the column
    vectors[:, l*m + j].  The branch choice only permutes/rescales the
    system; defaults are the principal roots.
    """
    k, m = spec.k, spec.m
    z = complex(z)
    if z == 0:
        raise ValueError("transform variable must be nonzero")
    if root_k is None:
        root_k = z ** (1.0 / k)
    if root_m is None:
        root_m = z ** (1.0 / m)
    if abs(root_k ** k - z) > 1e-9 * max(1.0, abs(z)):
        raise ValueError("root_k is not a k-th root of z")
    if abs(root_m ** m - z) > 1e-9 * max(1.0, abs(z)):
        raise ValueError("root_m is not an m-th root of z")
    lam = float(spec.arrival.value(t))
    mu = float(spec.service.value(t))

    wk = np.exp(2j * np.pi * np.arange(k) / k)
    wm = np.exp(2j * np.pi * np.arange(m) / m)

    arr_vals = lam * (wk * root_k - 1.0)            # index l
    srv_vals = mu * (wm / root_m - 1.0)             # index j

    i_k = np.arange(k)
    i_m = np.arange(m)
    arr_vecs = (root_k ** (i_k[:, None] + 1 - k)) * wk[None, :] ** i_k[:, None]
    arr_vecs /= math.sqrt(k)                        # column l
    srv_vecs = (root_m ** (m - 1 - i_m[:, None])) * wm[None, :] ** i_m[:, None]
    srv_vecs /= math.sqrt(m)                        # column j

    values = (arr_vals[:, None] + srv_vals[None, :]).reshape(-1)
    vectors = np.einsum("al,sj->aslj", arr_vecs, srv_vecs).reshape(k * m, k * m)
    return values, vectors


def level_transform_matrix(spec: ModelSpec, z: complex, t: float) -> np.ndarray:
    """local + z*up + (1/z)*down, the matrix diagonalized by phase_eigensystem."""
    blocks = generator_blocks(spec, t)
    z = complex(z)
    return blocks.local.astype(complex) + z * blocks.up + blocks.down / z
