"""Brute-force reference computations used to cross-check the fast paths.

These deliberately take a different numerical route from the posterior
engine and the solvers: the joint information gain works on a product grid
over all arms at once and assigns every cell to its argmax arm, and the
solver oracles enumerate dense grids or every vertex.
"""

from __future__ import annotations

import itertools

import numpy as np

from .errors import InfeasibleError, SizeLimitError
from .posterior import PosteriorState

JOINT_MAX_ARMS = 4
JOINT_MAX_GRID = 80
JOINT_MAX_OBSERVED = 3


def _product_grid_posterior(state: PosteriorState, m: int):
    """Cell midpoints and normalized product-grid weights, shape (m,)*K."""
    x = (np.arange(m) + 0.5) / m
    logx, log1mx = np.log(x), np.log1p(-x)
    marg = []
    for a, b in zip(state.a, state.b):
        lp = (a - 1.0) * logx + (b - 1.0) * log1mx
        p = np.exp(lp - lp.max())
        marg.append(p / p.sum())
    weight = marg[0]
    for p in marg[1:]:
        weight = np.multiply.outer(weight, p)
    return x, weight


def _mutual_information(joint: np.ndarray) -> float:
    """Mutual information (nats) of a 2-D joint probability table."""
    joint = joint / joint.sum()
    pa = joint.sum(axis=1, keepdims=True)
    py = joint.sum(axis=0, keepdims=True)
    mask = joint > 0
    return float(np.sum(joint[mask] * np.log(joint[mask] / (pa @ py)[mask])))


def joint_information_gain(state: PosteriorState, observed, m: int = 60) -> float:
    """Mutual information between the optimal arm and the outcomes of ``observed``.

    Budget: K <= 4 arms, m <= 80 points per arm, at most 3 observed arms.
    """
    k = state.n_arms
    observed = sorted(set(int(a) for a in observed))
    if k > JOINT_MAX_ARMS or m > JOINT_MAX_GRID or len(observed) > JOINT_MAX_OBSERVED:
        raise SizeLimitError(
            f"joint information oracle limited to K<={JOINT_MAX_ARMS}, m<={JOINT_MAX_GRID}, "
            f"|S|<={JOINT_MAX_OBSERVED}"
        )
    if not observed:
        return 0.0
    x, weight = _product_grid_posterior(state, m)
    theta = np.meshgrid(*([x] * k), indexing="ij")
    # argmax over arms; np.argmax returns the lowest index on ties
    best = np.argmax(np.stack(theta), axis=0)
    table = np.zeros((k, 2 ** len(observed)))
    for col, ys in enumerate(itertools.product((0, 1), repeat=len(observed))):
        like = weight.copy()
        for a, y in zip(observed, ys):
            like *= theta[a] if y else 1.0 - theta[a]
        table[:, col] = np.bincount(best.ravel(), weights=like.ravel(), minlength=k)
    return _mutual_information(table)


def check_superadditivity(state: PosteriorState, chosen: int, adjacency_row, h=None,
                          m: int = 60, tol: float = 1e-4) -> bool:
    """Joint information of the chosen arm's neighborhood >= sum of single-arm gains.

    By default the single-arm gains come from the same product grid as the
    joint gain, so the comparison is free of cross-discretization error; pass
    ``h`` to compare against another source.
    """
    row = np.asarray(adjacency_row)
    nbrs = sorted(set(int(a) for a in np.flatnonzero(row)) | {int(chosen)})
    if h is None:
        singles = [joint_information_gain(state, [a], m) for a in nbrs]
    else:
        singles = [h[a] for a in nbrs]
    joint = joint_information_gain(state, nbrs, m)
    return joint >= sum(singles) - tol


def brute_force_p1(delta, v, step: float = 1e-6, chunk: int = 1 << 20) -> float:
    """Smallest information ratio over pure arms and a dense weight grid on every pair."""
    d = np.asarray(delta, dtype=float)
    v = np.asarray(v, dtype=float)
    k = len(d)
    if k > 6:
        raise SizeLimitError("brute-force P1 is limited to K <= 6")
    n_steps = int(round(1.0 / step))

    def ratio(num, den):
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.where(den > 0, num * num / np.where(den > 0, den, 1.0), np.inf)
        return np.where(num == 0, 0.0, r)

    best = float(ratio(d, v).min())
    for i, j in itertools.combinations(range(k), 2):
        for start in range(0, n_steps + 1, chunk):
            q = np.arange(start, min(start + chunk, n_steps + 1)) * step
            val = ratio(d[j] + q * (d[i] - d[j]), v[j] + q * (v[i] - v[j]))
            best = min(best, float(val.min()))
    return best


def brute_force_lp(delta, v, c) -> float:
    """Smallest ``pi.delta`` over feasible vertices and tight pairwise mixtures."""
    d = np.asarray(delta, dtype=float)
    v = np.asarray(v, dtype=float)
    k = len(d)
    if k > 8:
        raise SizeLimitError("brute-force LP is limited to K <= 8")
    values = [d[i] for i in range(k) if v[i] >= c]
    for i, j in itertools.permutations(range(k), 2):
        if v[i] < c < v[j]:
            lam = (v[j] - c) / (v[j] - v[i])
            values.append(lam * d[i] + (1.0 - lam) * d[j])
    if not values:
        raise InfeasibleError(f"no distribution reaches information level {c!r}")
    return float(min(values))
