"""Graph feedback models, per-round observation sets and clique covers.

Arms are indexed ``0..K-1`` throughout. A feedback model is either a
deterministic adjacency schedule (revealed to the policy before it acts) or
an Erdos-Renyi schedule of edge probabilities ``r_t`` (realized after the
action). Both are summarized for the policies by the observation-probability
matrix returned by :func:`effective_matrix`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import InvalidAdjacencyError, ScheduleExhaustedError, SizeLimitError

DETERMINISTIC = "deterministic"
ERDOS_RENYI = "erdos_renyi"

EXACT_COVER_MAX_K = 12


def _as_binary(adjacency) -> np.ndarray:
    a = np.asarray(adjacency)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidAdjacencyError(f"adjacency must be square, got shape {a.shape}")
    if not np.all((a == 0) | (a == 1)):
        raise InvalidAdjacencyError("adjacency entries must be 0 or 1")
    return a.astype(np.int8)


@dataclass(frozen=True)
class FeedbackModel:
    """Deterministic or Erdos-Renyi graph feedback over ``n_arms`` arms.

    ``adjacency`` has shape ``(K, K)`` for a time-invariant graph or
    ``(T, K, K)`` for a schedule; ``r`` is a scalar or a length-``T`` array.
    Use :meth:`deterministic` and :meth:`erdos_renyi` rather than the raw
    constructor.
    """

    kind: str
    n_arms: int
    adjacency: np.ndarray | None = None
    r: np.ndarray | None = None

    @classmethod
    def deterministic(cls, adjacency) -> FeedbackModel:
        a = np.asarray(adjacency)
        if a.ndim == 2:
            mats = _as_binary(a)[None]
        elif a.ndim == 3:
            mats = np.stack([_as_binary(m) for m in a])
        else:
            raise InvalidAdjacencyError(f"expected 2-D or 3-D adjacency, got {a.ndim}-D")
        if mats.shape[1] < 1:
            raise InvalidAdjacencyError("graph must have at least one arm")
        diag = np.diagonal(mats, axis1=1, axis2=2)
        if not np.all(diag == 1):
            raise InvalidAdjacencyError("every arm must observe itself (unit diagonal)")
        mats.setflags(write=False)
        stored = mats[0] if a.ndim == 2 else mats
        return cls(DETERMINISTIC, mats.shape[1], adjacency=stored)

    @classmethod
    def erdos_renyi(cls, r, n_arms: int) -> FeedbackModel:
        r = np.asarray(r, dtype=float)
        if r.ndim > 1:
            raise ValueError("r must be a scalar or a 1-D schedule")
        if r.size == 0 or not np.all((r >= 0.0) & (r <= 1.0)):
            raise ValueError("edge probabilities must lie in [0, 1]")
        if n_arms < 1:
            raise ValueError("n_arms must be positive")
        r = r.copy()
        r.setflags(write=False)
        return cls(ERDOS_RENYI, int(n_arms), r=r)

    @property
    def is_deterministic(self) -> bool:
        return self.kind == DETERMINISTIC

    @property
    def time_invariant(self) -> bool:
        if self.is_deterministic:
            return self.adjacency.ndim == 2
        return self.r.ndim == 0

    @property
    def horizon(self) -> int | None:
        """Number of rounds covered by a finite schedule (None if unbounded)."""
        if self.time_invariant:
            return None
        return len(self.adjacency) if self.is_deterministic else len(self.r)

    def _index(self, t: int) -> int:
        if t < 1:
            raise ValueError(f"rounds start at 1, got t={t}")
        h = self.horizon
        if h is not None and t > h:
            raise ScheduleExhaustedError(f"schedule covers {h} rounds, asked for round {t}")
        return t - 1

    def adjacency_at(self, t: int) -> np.ndarray:
        if not self.is_deterministic:
            raise TypeError("random feedback has no fixed adjacency")
        i = self._index(t)
        return self.adjacency if self.adjacency.ndim == 2 else self.adjacency[i]

    def r_at(self, t: int) -> float:
        if self.is_deterministic:
            raise TypeError("deterministic feedback has no edge probability")
        i = self._index(t)
        return float(self.r) if self.r.ndim == 0 else float(self.r[i])


@dataclass(frozen=True)
class ObservationSet:
    chosen: int
    observed: frozenset

    def __post_init__(self):
        if self.chosen not in self.observed:
            raise ValueError("the chosen arm is always observed")


@dataclass(frozen=True)
class CliqueCover:
    cliques: tuple

    def __len__(self):
        return len(self.cliques)

    def is_valid(self, adjacency) -> bool:
        """True if the cliques partition the arms and each is complete in ``adjacency``."""
        sym = _symmetrize(adjacency)
        k = sym.shape[0]
        members = [v for c in self.cliques for v in c]
        if sorted(members) != list(range(k)) or any(len(c) == 0 for c in self.cliques):
            return False
        return all(sym[u, v] for c in self.cliques for u in c for v in c)


def effective_matrix(model: FeedbackModel, t: int) -> np.ndarray:
    """Observation-probability matrix for round ``t`` (1-based).

    Entry ``(i, j)`` is the probability of observing arm ``j`` when playing
    arm ``i``.
    """
    if model.is_deterministic:
        return model.adjacency_at(t).astype(float)
    r = model.r_at(t)
    m = np.full((model.n_arms, model.n_arms), r)
    np.fill_diagonal(m, 1.0)
    return m


def realize_observations(model: FeedbackModel, t: int, chosen: int, rng: np.random.Generator) -> ObservationSet:
    k = model.n_arms
    if not 0 <= chosen < k:
        raise ValueError(f"arm {chosen} out of range for K={k}")
    if model.is_deterministic:
        row = model.adjacency_at(t)[chosen]
        observed = np.flatnonzero(row)
    else:
        r = model.r_at(t)
        hits = rng.random(k) < r
        hits[chosen] = True
        observed = np.flatnonzero(hits)
    return ObservationSet(chosen, frozenset(int(a) for a in observed))


def _symmetrize(adjacency) -> np.ndarray:
    a = _as_binary(adjacency).astype(bool)
    sym = a & a.T
    np.fill_diagonal(sym, True)
    return sym


def greedy_clique_cover(adjacency) -> CliqueCover:
    """First-fit clique cover in index order.

    Directed inputs are reduced to their mutual edges first. The size of the
    result upper-bounds the clique cover number.
    """
    sym = _symmetrize(adjacency)
    cliques: list[list[int]] = []
    for v in range(sym.shape[0]):
        for c in cliques:
            if all(sym[v, u] for u in c):
                c.append(v)
                break
        else:
            cliques.append([v])
    return CliqueCover(tuple(tuple(c) for c in cliques))


def _colorable(conflict: np.ndarray, n_colors: int) -> bool:
    k = conflict.shape[0]
    colors = [-1] * k

    def place(v):
        if v == k:
            return True
        used = {colors[u] for u in range(v) if conflict[v, u]}
        # symmetry breaking: vertex v may open at most one new color
        limit = min(n_colors, max(colors[:v], default=-1) + 2)
        for c in range(limit):
            if c not in used:
                colors[v] = c
                if place(v + 1):
                    return True
        colors[v] = -1
        return False

    return place(0)


def exact_clique_cover_number(adjacency) -> int:
    """Clique cover number by exhaustive coloring of the complement graph."""
    sym = _symmetrize(adjacency)
    k = sym.shape[0]
    if k > EXACT_COVER_MAX_K:
        raise SizeLimitError(
            f"exact clique cover is limited to K <= {EXACT_COVER_MAX_K}; use greedy_clique_cover"
        )
    conflict = ~sym
    upper = len(greedy_clique_cover(sym.astype(int)))
    for n_colors in range(1, upper):
        if _colorable(conflict, n_colors):
            return n_colors
    return upper


def independence_number(adjacency) -> int:
    """Largest set of pairwise non-adjacent arms (exhaustive, K <= 12)."""
    sym = _symmetrize(adjacency)
    k = sym.shape[0]
    if k > EXACT_COVER_MAX_K:
        raise SizeLimitError(f"independence number is limited to K <= {EXACT_COVER_MAX_K}")
    for size in range(k, 0, -1):
        for subset in itertools.combinations(range(k), size):
            if not any(sym[u, v] for u, v in itertools.combinations(subset, 2)):
                return size
    return 0


def load_adjacency(path) -> np.ndarray:
    """Read an adjacency matrix: first line K, then K rows of K 0/1 entries."""
    lines = [ln.split("#", 1)[0].strip() for ln in Path(path).read_text().splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise InvalidAdjacencyError(f"{path}: empty graph file")
    try:
        k = int(lines[0])
        rows = [[int(x) for x in ln.split()] for ln in lines[1:]]
    except ValueError as exc:
        raise InvalidAdjacencyError(f"{path}: {exc}") from None
    if len(rows) != k or any(len(r) != k for r in rows):
        raise InvalidAdjacencyError(f"{path}: expected {k} rows of {k} entries")
    return _as_binary(np.array(rows, dtype=int)).astype(int)


def save_adjacency(adjacency, path) -> None:
    a = _as_binary(adjacency)
    body = "\n".join(" ".join(str(int(x)) for x in row) for row in a)
    Path(path).write_text(f"{a.shape[0]}\n{body}\n")


def bundled_path(name: str) -> Path:
    return Path(str(resources.files("graphids") / "data" / name))


def bowtie_graph() -> np.ndarray:
    """The five-arm two-clique graph used for the time-invariant experiments."""
    return load_adjacency(bundled_path("bowtie.txt"))


def sample_graph_schedule(n_arms: int, edge_p: float, horizon: int, rng: np.random.Generator) -> np.ndarray:
    """Sequence of undirected Erdos-Renyi graphs with self-loops, shape (T, K, K)."""
    upper = np.triu(rng.random((horizon, n_arms, n_arms)) < edge_p, k=1)
    mats = upper | upper.transpose(0, 2, 1)
    idx = np.arange(n_arms)
    mats[:, idx, idx] = True
    return mats.astype(np.int8)
