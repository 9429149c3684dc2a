"""Information directed sampling and Thompson sampling for Bernoulli bandits
with graph-structured side observations."""

from .errors import (
    ConfigError,
    GraphIDSError,
    InfeasibleError,
    NoBoundError,
    NoInformationError,
    SizeLimitError,
    TrialError,
)
from .graph import (
    CliqueCover,
    FeedbackModel,
    ObservationSet,
    bowtie_graph,
    effective_matrix,
    exact_clique_cover_number,
    greedy_clique_cover,
    load_adjacency,
    realize_observations,
)
from .policies import POLICIES, PolicyContext, get_policy
from .posterior import BanditStatistics, PosteriorState, compute_statistics, init_posterior, update
from .simulator import expected_regret_bound, run_experiment, run_trial
from .solvers import RatioProblem, solve_constrained_lp, solve_p1

__version__ = "0.1.0"
