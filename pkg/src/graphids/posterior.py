"""Independent Beta-Bernoulli posteriors and the per-round IDS statistics.

Each arm's posterior density is tabulated at the cell midpoints
``x_k = (k - 1/2) / n`` of a uniform grid on [0, 1] and turned into a
discrete measure (cell masses summing to one). The CDF and the partial
expectation ``int_0^x y f(y) dy`` are evaluated *at the midpoints*: the
mass of all cells strictly below plus half of the cell itself. With that
convention two arms falling in the same cell beat each other with
probability 1/2, so for K=2 the optimal-action probabilities sum to one
exactly and ``M[a*, a] <= M[a*, a*]`` holds cell by cell, which keeps every
instantaneous regret non-negative.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DuplicateObservationError,
    InvalidOutcomeError,
    InvalidPriorError,
    NumericalFailureError,
)

DEFAULT_GRID = 1000
MIN_GRID = 50
ALPHA_FLOOR = 1e-12
KL_CLAMP = 1e-12
# below this the midpoint CDF carries no usable mass
CDF_FLOOR = 1e-200


def _midpoints(n: int) -> np.ndarray:
    return (np.arange(n) + 0.5) / n


@functools.lru_cache(maxsize=16)
def _log_grid(n: int, side: int) -> np.ndarray:
    x = _midpoints(n)
    out = np.log(x) if side == 0 else np.log1p(-x)
    out.setflags(write=False)
    return out


@dataclass
class PosteriorState:
    """Per-arm Beta parameters plus grid caches.

    ``pdf[a]`` holds density values at the grid midpoints (normalized so the
    midpoint rule integrates to one), ``mass = pdf / n`` the cell masses,
    ``cdf`` and ``partial`` the midpoint CDF and partial expectation, and
    ``cond = partial / cdf`` (0 where the CDF underflows).
    """

    a: np.ndarray
    b: np.ndarray
    n: int
    x: np.ndarray = field(repr=False)
    pdf: np.ndarray = field(repr=False)
    mass: np.ndarray = field(repr=False)
    cdf: np.ndarray = field(repr=False)
    partial: np.ndarray = field(repr=False)
    cond: np.ndarray = field(repr=False)

    @property
    def n_arms(self) -> int:
        return len(self.a)

    @property
    def means(self) -> np.ndarray:
        """Exact Beta posterior means."""
        return self.a / (self.a + self.b)

    @property
    def coarse_grid(self) -> bool:
        return self.n < MIN_GRID

    def copy(self) -> PosteriorState:
        return PosteriorState(
            self.a.copy(), self.b.copy(), self.n, self.x,
            self.pdf.copy(), self.mass.copy(), self.cdf.copy(), self.partial.copy(),
            self.cond.copy(),
        )

    def refresh(self, arms=None) -> None:
        """Recompute the grid caches of ``arms`` (all arms by default) from the Beta parameters."""
        idx = np.arange(self.n_arms) if arms is None else np.asarray(arms, dtype=int)
        if idx.size == 0:
            return
        logp = (self.a[idx, None] - 1.0) * _log_grid(self.n, 0) + (self.b[idx, None] - 1.0) * _log_grid(self.n, 1)
        logp -= logp.max(axis=1, keepdims=True)
        self._set_masses(idx, np.exp(logp))

    def _set_masses(self, idx, p) -> None:
        x = self.x
        m = p / p.sum(axis=1, keepdims=True)
        mx = m * x
        cdf = np.cumsum(m, axis=1)
        cdf -= 0.5 * m
        partial = np.cumsum(mx, axis=1)
        partial -= 0.5 * mx
        self.mass[idx] = m
        self.pdf[idx] = m * self.n
        self.cdf[idx] = cdf
        self.partial[idx] = partial
        with np.errstate(divide="ignore", invalid="ignore"):
            self.cond[idx] = np.where(cdf > CDF_FLOOR, partial / cdf, 0.0)

    def observe(self, arms, outcomes) -> None:
        """Conjugate update of ``arms`` with 0/1 ``outcomes`` (no validation).

        The grid masses are multiplied by ``x`` or ``1 - x`` and renormalized,
        which is the same discrete measure :meth:`refresh` would rebuild.
        """
        idx = np.asarray(arms, dtype=int)
        if idx.size == 0:
            return
        y = np.asarray(outcomes, dtype=float)
        self.a[idx] += y
        self.b[idx] += 1.0 - y
        x = self.x
        like = np.where(y[:, None] > 0, x, 1.0 - x)
        self._set_masses(idx, self.mass[idx] * like)


def init_posterior(n_arms: int, prior=(1.0, 1.0), n: int = DEFAULT_GRID) -> PosteriorState:
    """Build the posterior state for ``n_arms`` arms.

    ``prior`` is either one ``(a, b)`` pair shared by all arms or a sequence
    of per-arm pairs. Grids coarser than 50 points are accepted but flagged
    through ``coarse_grid`` on the state and on every statistics snapshot.
    """
    if n_arms < 2:
        raise ValueError("need at least two arms")
    if n < 2:
        raise ValueError("grid needs at least two points")
    pr = np.asarray(prior, dtype=float)
    if pr.shape == (2,):
        pr = np.tile(pr, (n_arms, 1))
    if pr.shape != (n_arms, 2):
        raise InvalidPriorError(f"prior must be one (a, b) pair or {n_arms} pairs, got shape {pr.shape}")
    if not np.all(np.isfinite(pr)) or np.any(pr <= 0):
        raise InvalidPriorError("Beta parameters must be positive and finite")
    x = _midpoints(n)
    shape = (n_arms, n)
    state = PosteriorState(
        pr[:, 0].copy(), pr[:, 1].copy(), n, x,
        np.empty(shape), np.empty(shape), np.empty(shape), np.empty(shape), np.empty(shape),
    )
    state.refresh()
    return state


def update(state: PosteriorState, observations) -> PosteriorState:
    """Apply one round of Bernoulli outcomes in place and return the state.

    ``observations`` is a mapping ``arm -> outcome`` or an iterable of
    ``(arm, outcome)`` pairs; each arm may appear at most once.
    """
    items = observations.items() if hasattr(observations, "items") else observations
    seen = set()
    changed = []
    for arm, y in items:
        arm = int(arm)
        if arm in seen:
            raise DuplicateObservationError(f"arm {arm} observed twice in one round")
        if not 0 <= arm < state.n_arms:
            raise IndexError(f"arm {arm} out of range")
        if y not in (0, 1) and y is not True and y is not False:
            raise InvalidOutcomeError(f"outcome {y!r} for arm {arm} is not 0 or 1")
        seen.add(arm)
        changed.append((arm, int(y)))
    state.observe([arm for arm, _ in changed], [y for _, y in changed])
    return state


@dataclass(frozen=True)
class BanditStatistics:
    """One round of posterior statistics (information in nats).

    ``M[i, j]`` is the posterior mean of arm ``j`` given that arm ``i`` is
    optimal; ``mu`` is its mixture ``alpha @ M``.
    """

    alpha: np.ndarray
    mu: np.ndarray
    M: np.ndarray
    rho_star: float
    delta: np.ndarray
    h: np.ndarray
    entropy: float
    coarse_grid: bool = False


def bernoulli_kl(p, q):
    """Elementwise KL divergence between Bernoulli(p) and Bernoulli(q), in nats."""
    p = np.minimum(np.maximum(p, KL_CLAMP), 1.0 - KL_CLAMP)
    q = np.minimum(np.maximum(q, KL_CLAMP), 1.0 - KL_CLAMP)
    # non-negative in exact arithmetic; clip rounding noise
    return np.maximum(p * np.log(p / q) + (1.0 - p) * np.log((1.0 - p) / (1.0 - q)), 0.0)


def entropy_nats(p) -> float:
    p = np.asarray(p, dtype=float)
    nz = p[p > 0]
    return float(-np.sum(nz * np.log(nz)))


def _leave_one_out(cdf: np.ndarray) -> np.ndarray:
    """``out[i] = prod_{b != i} cdf[b]`` without division."""
    k = cdf.shape[0]
    out = np.empty_like(cdf)
    out[0] = 1.0
    for i in range(1, k):
        np.multiply(out[i - 1], cdf[i - 1], out=out[i])
    suffix = cdf[k - 1].copy()
    for i in range(k - 2, -1, -1):
        out[i] *= suffix
        suffix *= cdf[i]
    return out


def compute_statistics(state: PosteriorState) -> BanditStatistics:
    """Optimal-action distribution, regrets and information gains on the grid.

    Off-diagonal conditional means need ``prod_{b != i, j} F_b * G_j``, which
    equals ``prod_{b != i} F_b * (G_j / F_j)``; the ratio is a conditional mean
    bounded by ``x`` and is taken as 0 where ``F_j`` underflows (there
    ``G_j <= x F_j`` vanishes too).
    """
    w, x = state.mass, state.x
    k = state.n_arms
    weighted = w * _leave_one_out(state.cdf)           # density of {A* = i, theta_i = x}
    alpha_raw = weighted.sum(axis=1)
    numer = weighted @ state.cond.T
    diag = np.arange(k)
    numer[diag, diag] = weighted @ x

    total = alpha_raw.sum()
    if not np.isfinite(total) or total <= 0:
        raise NumericalFailureError("optimal-action probabilities did not integrate")
    alpha = alpha_raw / total

    live = alpha >= ALPHA_FLOOR
    M = np.empty((k, k))
    M[live] = numer[live] / alpha_raw[live, None]
    if not live.all():
        M[~live] = w @ x
    np.clip(M, 0.0, 1.0, out=M)

    mu = alpha @ M
    rho_star = float(alpha @ M[diag, diag])
    delta = rho_star - mu
    kl = bernoulli_kl(M, mu[None, :])
    kl[~live] = 0.0
    h = alpha @ kl
    ent = entropy_nats(alpha)
    if not (np.all(np.isfinite(M)) and np.all(np.isfinite(h)) and np.isfinite(rho_star)):
        raise NumericalFailureError("NaN or inf in posterior statistics")
    return BanditStatistics(alpha, mu, M, rho_star, delta, h, ent, state.coarse_grid)
