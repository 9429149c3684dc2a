"""Decision rules mapping one round's statistics and feedback matrix to a
sampling distribution over arms.

Policy identifiers (used by the CLI and the simulator) are ``ts-n``,
``ids-n``, ``idsn-lp``, ``ids-lp``, ``ucb-n`` and ``ucb-maxn``. The first
four consume posterior statistics; the UCB baselines only use empirical
counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NoInformationError
from .posterior import BanditStatistics
from .solvers import RatioProblem, solve_constrained_lp, solve_p1


@dataclass(frozen=True)
class PolicyContext:
    """Everything a policy may look at in round ``t``.

    ``counts``/``sums`` are per-arm observation counts and outcome sums
    (side observations included). ``stats`` may be None for policies that do
    not need posterior statistics.
    """

    stats: BanditStatistics | None
    feedback_matrix: np.ndarray
    t: int
    counts: np.ndarray
    sums: np.ndarray
    deterministic: bool = True

    @property
    def n_arms(self) -> int:
        return self.feedback_matrix.shape[0]

    def graph_information(self) -> np.ndarray:
        """Per-arm aggregated information gain ``G @ h``."""
        return self.feedback_matrix @ self.stats.h


def point_mass(k: int, arm: int) -> np.ndarray:
    pi = np.zeros(k)
    pi[arm] = 1.0
    return pi


def _fallback(ctx: PolicyContext) -> np.ndarray:
    return point_mass(ctx.n_arms, int(np.argmax(ctx.stats.alpha)))


def ts_n(ctx: PolicyContext) -> np.ndarray:
    """Thompson sampling: play each arm with its posterior probability of being optimal."""
    return ctx.stats.alpha.copy()


def ids_n(ctx: PolicyContext) -> np.ndarray:
    try:
        pi, _ = solve_p1(RatioProblem(ctx.stats.delta, ctx.graph_information()))
    except NoInformationError:
        return _fallback(ctx)
    return pi


def _lp_policy(ctx: PolicyContext, level: float, v: np.ndarray) -> np.ndarray:
    try:
        pi, _ = solve_constrained_lp(np.maximum(ctx.stats.delta, 0.0), v, level)
    except NoInformationError:
        return _fallback(ctx)
    return pi


def idsn_lp(ctx: PolicyContext) -> np.ndarray:
    """Least regret subject to at least Thompson sampling's graph information gain."""
    v = ctx.graph_information()
    return _lp_policy(ctx, float(ctx.stats.alpha @ v), v)


def ids_lp(ctx: PolicyContext) -> np.ndarray:
    """Least regret subject to at least Thompson sampling's bandit-feedback information gain."""
    v = ctx.graph_information()
    return _lp_policy(ctx, float(ctx.stats.alpha @ ctx.stats.h), v)


def ucb_arm(ctx: PolicyContext) -> int:
    """UCB1 arm over all observations; unobserved arms first, ties to the lowest index."""
    counts = ctx.counts
    unseen = np.flatnonzero(counts == 0)
    if unseen.size:
        return int(unseen[0])
    bonus = np.sqrt(2.0 * math.log(max(ctx.t, 1)) / counts)
    return int(np.argmax(ctx.sums / counts + bonus))


def ucb_n(ctx: PolicyContext) -> np.ndarray:
    return point_mass(ctx.n_arms, ucb_arm(ctx))


def ucb_max_n(ctx: PolicyContext) -> np.ndarray:
    """Pick the UCB arm, then its neighbor with the best empirical mean.

    The UCB arm keeps ties; under random feedback its neighborhood is just
    itself.
    """
    lead = ucb_arm(ctx)
    k = ctx.n_arms
    if not ctx.deterministic or ctx.counts[lead] == 0:
        return point_mass(k, lead)
    nbrs = [a for a in np.flatnonzero(ctx.feedback_matrix[lead] >= 1.0) if ctx.counts[a] > 0]
    means = {int(a): ctx.sums[a] / ctx.counts[a] for a in nbrs}
    top = max(means.values())
    if means[lead] >= top:
        return point_mass(k, lead)
    return point_mass(k, min(a for a, m in means.items() if m == top))


POLICIES = {
    "ts-n": ts_n,
    "ids-n": ids_n,
    "idsn-lp": idsn_lp,
    "ids-lp": ids_lp,
    "ucb-n": ucb_n,
    "ucb-maxn": ucb_max_n,
}

BAYESIAN_POLICIES = ("ts-n", "ids-n", "idsn-lp", "ids-lp")
RATIO_DOMINATED = ("ts-n", "ids-n", "idsn-lp")


def get_policy(name: str):
    try:
        return POLICIES[name]
    except KeyError:
        raise KeyError(f"unknown policy {name!r}; choose from {', '.join(POLICIES)}") from None
