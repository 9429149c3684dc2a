"""Experiment configuration files.

One ``key = value`` per line; ``#`` starts a comment. Recognized keys::

    K             number of arms (must match the graph file if one is given)
    T             horizon
    trials        number of trials per policy            (default 1000)
    n             posterior grid size                    (default 1000)
    seed          master seed                            (default 0)
    policies      comma-separated policy ids             (default: all six)
    feedback      deterministic | er | er-graphs
    graph         adjacency file (feedback = deterministic), relative to the config
    r             edge probability, comma-separated schedule, or "uniform" (feedback = er)
    edge_p        edge probability of each sampled graph (feedback = er-graphs)
    schedule_seed seed for sampled schedules              (default: seed)
    prior         "a, b" for every arm, or "a, b; a, b; ..." per arm (default 1, 1)
    out           output directory                       (default results)
    monitor       on | off                               (default on)
    parallelism   worker processes                       (default 1)
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import ConfigError, InvalidAdjacencyError
from .graph import FeedbackModel, bundled_path, load_adjacency, sample_graph_schedule
from .policies import POLICIES

FEEDBACK_KINDS = ("deterministic", "er", "er-graphs")
KEYS = ("K", "T", "trials", "n", "seed", "policies", "feedback", "graph", "r", "edge_p",
        "schedule_seed", "prior", "out", "monitor", "parallelism")


@dataclass(frozen=True)
class ExperimentConfig:
    K: int
    T: int
    feedback: str
    trials: int = 1000
    n: int = 1000
    seed: int = 0
    policies: tuple = tuple(POLICIES)
    graph: Path | None = None
    r: str | None = None
    edge_p: float | None = None
    schedule_seed: int | None = None
    prior: tuple = ((1.0, 1.0),)
    out: Path = Path("results")
    monitor: bool = True
    parallelism: int = 1
    source: Path | None = field(default=None, compare=False)

    def prior_array(self) -> np.ndarray:
        pr = np.array(self.prior, dtype=float)
        return np.tile(pr[0], (self.K, 1)) if len(pr) == 1 else pr

    def with_overrides(self, **kwargs) -> ExperimentConfig:
        return replace(self, **{k: v for k, v in kwargs.items() if v is not None})

    def build_model(self) -> FeedbackModel:
        """Feedback model covering the horizon; sampled schedules use ``schedule_seed``."""
        rng = np.random.default_rng(self.seed if self.schedule_seed is None else self.schedule_seed)
        if self.feedback == "deterministic":
            return FeedbackModel.deterministic(load_adjacency(self.graph))
        if self.feedback == "er-graphs":
            return FeedbackModel.deterministic(sample_graph_schedule(self.K, self.edge_p, self.T, rng))
        if self.r == "uniform":
            return FeedbackModel.erdos_renyi(rng.random(self.T), self.K)
        values = [float(x) for x in self.r.split(",")]
        return FeedbackModel.erdos_renyi(values[0] if len(values) == 1 else values, self.K)


def _positive_int(key, value, line):
    try:
        out = int(value)
    except ValueError:
        raise ConfigError(f"expected an integer, got {value!r}", key, line) from None
    if out < 1:
        raise ConfigError(f"must be positive, got {out}", key, line)
    return out


def _probability(key, value, line):
    try:
        p = float(value)
    except ValueError:
        raise ConfigError(f"expected a number, got {value!r}", key, line) from None
    if not 0.0 <= p <= 1.0:
        raise ConfigError(f"must lie in [0, 1], got {p}", key, line)
    return p


def _parse_prior(value, line):
    pairs = []
    for chunk in value.split(";"):
        parts = [p.strip() for p in chunk.split(",") if p.strip()]
        if len(parts) != 2:
            raise ConfigError(f"expected 'a, b' pairs, got {chunk.strip()!r}", "prior", line)
        try:
            a, b = float(parts[0]), float(parts[1])
        except ValueError:
            raise ConfigError(f"non-numeric prior {chunk.strip()!r}", "prior", line) from None
        if a <= 0 or b <= 0:
            raise ConfigError("Beta parameters must be positive", "prior", line)
        pairs.append((a, b))
    return tuple(pairs)


def parse_config_text(text: str, base_dir=".", source=None) -> ExperimentConfig:
    base_dir = Path(base_dir)
    raw, lines = {}, {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", line=lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError("unknown key", key, lineno)
        if key in raw:
            raise ConfigError("duplicate key", key, lineno)
        raw[key], lines[key] = value, lineno

    def line_of(key):
        return lines.get(key)

    kw = {}
    for key in ("K", "T", "trials", "n", "parallelism"):
        if key in raw:
            kw[key] = _positive_int(key, raw[key], line_of(key))
    for key in ("seed", "schedule_seed"):
        if key in raw:
            try:
                kw[key] = int(raw[key])
            except ValueError:
                raise ConfigError(f"expected an integer, got {raw[key]!r}", key, line_of(key)) from None
            if kw[key] < 0:
                raise ConfigError("seeds must be non-negative", key, line_of(key))
    for key in ("K", "T", "feedback"):
        if key not in raw:
            raise ConfigError("missing required key", key)
    if kw["K"] < 2:
        raise ConfigError("need at least two arms", "K", line_of("K"))

    feedback = raw["feedback"]
    if feedback not in FEEDBACK_KINDS:
        raise ConfigError(f"feedback must be one of {', '.join(FEEDBACK_KINDS)}", "feedback", line_of("feedback"))
    kw["feedback"] = feedback
    if feedback == "deterministic":
        if "graph" not in raw:
            raise ConfigError("deterministic feedback needs a graph file", "graph")
        path = Path(raw["graph"])
        if not path.is_absolute():
            path = base_dir / path
        if not path.exists():
            raise ConfigError(f"graph file {path} not found", "graph", line_of("graph"))
        try:
            adj = load_adjacency(path)
        except InvalidAdjacencyError as exc:
            raise ConfigError(str(exc), "graph", line_of("graph")) from None
        if adj.shape[0] != kw["K"]:
            raise ConfigError(f"graph has {adj.shape[0]} arms but K = {kw['K']}", "graph", line_of("graph"))
        kw["graph"] = path.resolve()
    elif feedback == "er":
        if "r" not in raw:
            raise ConfigError("er feedback needs r", "r")
        if raw["r"] != "uniform":
            values = [_probability("r", v, line_of("r")) for v in raw["r"].split(",")]
            if len(values) > 1 and len(values) < kw["T"]:
                raise ConfigError(f"r schedule has {len(values)} entries, horizon is {kw['T']}", "r", line_of("r"))
        kw["r"] = raw["r"]
    else:
        if "edge_p" not in raw:
            raise ConfigError("er-graphs feedback needs edge_p", "edge_p")
        kw["edge_p"] = _probability("edge_p", raw["edge_p"], line_of("edge_p"))

    if "policies" in raw:
        names = tuple(p.strip() for p in raw["policies"].split(",") if p.strip())
        bad = [p for p in names if p not in POLICIES]
        if bad or not names:
            raise ConfigError(f"unknown policies {bad}; choose from {', '.join(POLICIES)}", "policies", line_of("policies"))
        kw["policies"] = names
    if "prior" in raw:
        prior = _parse_prior(raw["prior"], line_of("prior"))
        if len(prior) not in (1, kw["K"]):
            raise ConfigError(f"need 1 or {kw['K']} prior pairs, got {len(prior)}", "prior", line_of("prior"))
        kw["prior"] = prior
    if "monitor" in raw:
        flag = raw["monitor"].lower()
        if flag not in ("on", "off", "true", "false", "1", "0"):
            raise ConfigError("monitor must be on or off", "monitor", line_of("monitor"))
        kw["monitor"] = flag in ("on", "true", "1")
    if "out" in raw:
        out = Path(raw["out"])
        kw["out"] = out if out.is_absolute() else base_dir / out
    return ExperimentConfig(source=source, **kw)


def resolve_config_path(path) -> Path:
    """Return ``path`` if it exists, else the bundled config of that name."""
    p = Path(path)
    if p.exists():
        return p
    bundled = bundled_path(p.name)
    if bundled.exists():
        return bundled
    raise ConfigError(f"config file {path} not found")


def parse_config(path) -> ExperimentConfig:
    """Parse and validate a config file; bundled names such as ``appendix_b.cfg`` also work."""
    p = resolve_config_path(path)
    return parse_config_text(p.read_text(), base_dir=p.parent, source=p)
