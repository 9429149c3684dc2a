"""Bayesian-regret simulation of the graph-feedback bandit.

A trial samples true Bernoulli means from the prior, then runs the
statistics -> policy -> sample -> observe -> update loop for ``T`` rounds.
Every trial owns one seed, split into four independent streams (environment,
action sampling, feedback realization, rewards), so two policies run with the
same trial seed face the same means, the same reward table and the same
random graphs.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import GraphIDSError, NoBoundError, ScheduleExhaustedError, TrialError
from .graph import FeedbackModel, effective_matrix, greedy_clique_cover, realize_observations
from .policies import BAYESIAN_POLICIES, RATIO_DOMINATED, PolicyContext, get_policy
from .posterior import DEFAULT_GRID, compute_statistics, init_posterior, update

log = logging.getLogger(__name__)

MASK64 = (1 << 64) - 1
MONITOR_TOL = 1e-6
# absorbs KL clamping when both sides of a ratio check vanish
MONITOR_ABS_TOL = 1e-15

CHECKS = ("ratio_k_half", "ratio_half_sum", "ratio_dominance", "ids_lp_ratio", "graph_bound")


def mix64(z: int) -> int:
    """SplitMix64 finalizer: a fixed bijection on 64-bit integers."""
    z = (z + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def trial_seed(master_seed: int, trial: int) -> int:
    """Seed of trial ``trial``: ``mix64(master XOR trial)``."""
    return mix64((int(master_seed) ^ int(trial)) & MASK64)


def _streams(seed: int):
    env, act, feedback, reward = np.random.SeedSequence(seed).spawn(4)
    return (np.random.default_rng(env), np.random.default_rng(act),
            np.random.default_rng(feedback), np.random.default_rng(reward))


def _prior_array(prior, k: int) -> np.ndarray:
    pr = np.asarray(prior, dtype=float)
    return np.tile(pr, (k, 1)) if pr.shape == (2,) else pr


@dataclass(frozen=True)
class Environment:
    theta: np.ndarray

    @classmethod
    def sample(cls, prior, k: int, rng: np.random.Generator) -> Environment:
        pr = _prior_array(prior, k)
        return cls(rng.beta(pr[:, 0], pr[:, 1]))

    @property
    def best_arm(self) -> int:
        return int(np.argmax(self.theta))

    @property
    def best_mean(self) -> float:
        return float(np.max(self.theta))


@dataclass
class RegretCurve:
    """Expected instantaneous regrets of one trial; ``counts`` are the final per-arm observation counts."""

    policy: str
    seed: int
    instant: np.ndarray
    counts: np.ndarray | None = None

    @property
    def cumulative(self) -> np.ndarray:
        """Cumulative expected regret for rounds ``0..T`` (starts at 0)."""
        return np.concatenate([[0.0], np.cumsum(self.instant)])


@dataclass
class MonitorLog:
    """Per-round ratio records and violation flags (one column per check in CHECKS)."""

    psi: np.ndarray
    policy_ratio: np.ndarray
    bound: np.ndarray
    violations: np.ndarray = field(repr=False)

    @classmethod
    def empty(cls, horizon: int) -> MonitorLog:
        nan = np.full(horizon, np.nan)
        return cls(nan.copy(), nan.copy(), nan.copy(), np.zeros((horizon, len(CHECKS)), dtype=bool))

    @property
    def n_violations(self) -> int:
        return int(self.violations.sum())

    def violation_counts(self) -> dict:
        return {name: int(self.violations[:, i].sum()) for i, name in enumerate(CHECKS)}


def _ratio(num: float, den: float) -> float:
    if num == 0.0:
        return 0.0
    return num / den if den > 0.0 else math.inf


def _exceeds(num: float, den: float, bound: float) -> bool:
    return num > (bound + MONITOR_TOL) * den + MONITOR_ABS_TOL


class _BoundCache:
    """Per-round ratio bound of the feedback model (cover size / 2 or the ER formula)."""

    def __init__(self, model: FeedbackModel):
        self.model = model
        self._covers = {}

    def __call__(self, t: int) -> float:
        model = self.model
        k = model.n_arms
        if model.is_deterministic:
            adj = model.adjacency_at(t)
            key = adj.tobytes()
            if key not in self._covers:
                self._covers[key] = len(greedy_clique_cover(adj))
            return self._covers[key] / 2.0
        r = model.r_at(t)
        return k / (2.0 * (k * r + 1.0 - r))


def _record(mon: MonitorLog, i: int, policy: str, stats, G: np.ndarray, pi: np.ndarray, bound: float) -> None:
    k = len(pi)
    alpha, delta, h = stats.alpha, stats.delta, stats.h
    gh = G @ h
    reg_alpha = float(delta @ alpha) ** 2
    info_alpha = float(gh @ alpha)
    reg_pi = float(delta @ pi) ** 2
    info_pi = float(gh @ pi)
    h_alpha = float(h @ alpha)
    mon.psi[i] = _ratio(reg_alpha, info_alpha)
    mon.policy_ratio[i] = _ratio(reg_pi, info_pi)
    mon.bound[i] = bound
    flags = mon.violations[i]
    flags[0] = _exceeds(reg_alpha, h_alpha, k / 2.0)
    flags[1] = _exceeds(reg_alpha, float(h.sum()), 0.5)
    if policy in RATIO_DOMINATED:
        # (pi.delta)^2 / (pi.Gh) <= psi, cross-multiplied
        flags[2] = reg_pi * info_alpha > (reg_alpha + MONITOR_TOL * info_alpha) * info_pi + MONITOR_ABS_TOL
    if policy == "ids-lp":
        flags[3] = _exceeds(reg_pi, h_alpha, k / 2.0)
    flags[4] = _exceeds(reg_alpha, info_alpha, bound)


def _sample_arm(pi: np.ndarray, rng: np.random.Generator) -> int:
    u = rng.random()
    cdf = np.cumsum(pi)
    arm = int(np.searchsorted(cdf, u * cdf[-1], side="right"))
    return min(arm, len(pi) - 1)


def run_trial(policy: str, model: FeedbackModel, prior=(1.0, 1.0), horizon: int = 1000,
              n: int = DEFAULT_GRID, seed: int = 0, monitor: bool = True):
    """Simulate one trial; returns ``(RegretCurve, MonitorLog)``.

    Errors raised inside the loop keep their type and gain ``seed`` and
    ``round_index`` attributes.
    """
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    if model.horizon is not None and model.horizon < horizon:
        raise ScheduleExhaustedError(f"feedback schedule covers {model.horizon} rounds, horizon is {horizon}")
    decide = get_policy(policy)
    k = model.n_arms
    env_rng, act_rng, fb_rng, reward_rng = _streams(seed)
    env = Environment.sample(prior, k, env_rng)
    theta, best = env.theta, env.best_mean

    bayesian = policy in BAYESIAN_POLICIES
    state = init_posterior(k, prior, n) if bayesian else None
    counts = np.zeros(k)
    sums = np.zeros(k)
    instant = np.empty(horizon)
    mon = MonitorLog.empty(horizon)
    bound_at = _BoundCache(model)
    G_fixed = effective_matrix(model, 1) if model.time_invariant else None

    t = 0
    try:
        for t in range(1, horizon + 1):
            G = G_fixed if G_fixed is not None else effective_matrix(model, t)
            stats = compute_statistics(state) if bayesian else None
            ctx = PolicyContext(stats, G, t, counts, sums, model.is_deterministic)
            pi = decide(ctx)
            arm = _sample_arm(pi, act_rng)
            outcomes = reward_rng.random(k) < theta
            seen = realize_observations(model, t, arm, fb_rng).observed
            if bayesian:
                update(state, {a: int(outcomes[a]) for a in seen})
                if monitor:
                    _record(mon, t - 1, policy, stats, G, pi, bound_at(t))
            for a in seen:
                counts[a] += 1
                sums[a] += outcomes[a]
            instant[t - 1] = best - theta[arm]
    except GraphIDSError as exc:
        exc.seed, exc.round_index = seed, t
        raise
    return RegretCurve(policy, seed, instant, counts), mon


@dataclass
class ExperimentResult:
    """Per-policy trial curves plus round-level aggregates.

    ``instant[policy]`` has shape ``(trials, T)``; ``mean``/``stderr`` are
    over trials of the cumulative regret at rounds ``1..T``.
    """

    policies: list
    seeds: list
    instant: dict
    monitor: dict

    def cumulative(self, policy: str) -> np.ndarray:
        return np.cumsum(self.instant[policy], axis=1)

    def mean(self, policy: str) -> np.ndarray:
        return self.cumulative(policy).mean(axis=0)

    def stderr(self, policy: str) -> np.ndarray:
        cum = self.cumulative(policy)
        if cum.shape[0] < 2:
            return np.zeros(cum.shape[1])
        return cum.std(axis=0, ddof=1) / math.sqrt(cum.shape[0])

    def final(self, policy: str):
        """Mean and standard error of the cumulative regret at the horizon."""
        return float(self.mean(policy)[-1]), float(self.stderr(policy)[-1])

    def total_violations(self) -> int:
        return int(sum(m["violations"].sum() for m in self.monitor.values()))


def _run_task(args):
    policy, model, prior, horizon, n, seed, monitor = args
    try:
        curve, mon = run_trial(policy, model, prior, horizon, n, seed, monitor)
    except GraphIDSError as exc:
        raise TrialError(f"{policy} trial failed: {exc}", seed=seed,
                         round_index=getattr(exc, "round_index", None)) from exc
    return curve.instant, mon


def _summarize_monitor(logs, horizon: int) -> dict:
    psi = np.stack([m.psi for m in logs])
    ratio = np.stack([m.policy_ratio for m in logs])
    with np.errstate(invalid="ignore"):
        return {
            "psi_mean": np.nanmean(psi, axis=0) if np.isfinite(psi).any() else np.full(horizon, np.nan),
            "psi_max": np.nanmax(psi, axis=0) if np.isfinite(psi).any() else np.full(horizon, np.nan),
            "ratio_mean": np.nanmean(ratio, axis=0) if np.isfinite(ratio).any() else np.full(horizon, np.nan),
            "ratio_max": np.nanmax(ratio, axis=0) if np.isfinite(ratio).any() else np.full(horizon, np.nan),
            "bound": logs[0].bound.copy(),
            "violations": np.stack([m.violations for m in logs]).sum(axis=0),
        }


def run_experiment(policies, model: FeedbackModel, prior=(1.0, 1.0), horizon: int = 1000,
                   trials: int = 1000, n: int = DEFAULT_GRID, master_seed: int = 0,
                   parallelism: int = 1, monitor: bool = True) -> ExperimentResult:
    """Run ``trials`` seeded trials of every policy and aggregate them.

    Trial ``i`` uses ``trial_seed(master_seed, i)`` for every policy.
    Results are assembled in (policy, trial) order, so they do not depend on
    ``parallelism``.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    policies = list(policies)
    for p in policies:
        get_policy(p)
    seeds = [trial_seed(master_seed, i) for i in range(trials)]
    tasks = [(p, model, prior, horizon, n, s, monitor) for p in policies for s in seeds]
    if parallelism > 1:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            outputs = list(pool.map(_run_task, tasks, chunksize=max(1, len(tasks) // (4 * parallelism))))
    else:
        outputs = []
        for i, task in enumerate(tasks):
            outputs.append(_run_task(task))
            if (i + 1) % max(1, trials) == 0:
                log.info("finished %s (%d trials)", task[0], trials)
    instant, mons = {}, {}
    for j, p in enumerate(policies):
        chunk = outputs[j * trials:(j + 1) * trials]
        instant[p] = np.stack([c for c, _ in chunk])
        mons[p] = _summarize_monitor([m for _, m in chunk], horizon)
    return ExperimentResult(policies, seeds, instant, mons)


def expected_regret_bound(policy: str, model: FeedbackModel, horizon: int, n_arms: int, prior_entropy: float) -> float:
    """Theoretical Bayesian regret bound for ``policy`` (entropy in nats).

    Deterministic graphs use the greedy clique cover of each round's graph,
    which can only loosen the clique-cover bound.
    """
    if policy not in BAYESIAN_POLICIES:
        raise NoBoundError(f"no regret bound is known for {policy!r}")
    if policy == "ids-lp":
        return math.sqrt(n_arms / 2.0 * horizon * prior_entropy)
    bound_at = _BoundCache(model)
    if model.time_invariant:
        total = bound_at(1) * horizon
    else:
        total = sum(bound_at(t) for t in range(1, horizon + 1))
    return math.sqrt(total * prior_entropy)


def prior_entropy(prior, n_arms: int, n: int = DEFAULT_GRID) -> float:
    """Entropy (nats) of the prior distribution of the optimal arm."""
    return compute_statistics(init_posterior(n_arms, prior, n)).entropy
