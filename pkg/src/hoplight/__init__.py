"""Interestingness-driven behavior analysis for tabular RL agents.

Train a tabular Q-learning agent on the deterministic Frogger-style
gridworld, record the full interaction history, extract interestingness
elements through statistical introspection, and build highlight-based
behavior summaries.
"""

from .agent import (
    AgentProfile,
    PROFILES,
    QTable,
    TrainingSchedule,
    q_update,
    run_experiment,
    select_action,
)
from .env import FroggerGame, GameConfig, StepOutcome, decode_obs, encode_obs, obs_label
from .errors import (
    ConfigError,
    HoplightError,
    IntegrityError,
    ProvenanceError,
    SchemaError,
)
from .recorder import InteractionDataset, Trace, TraceBuilder, TransitionRecord
from .stats import evenness, flag_outliers, jensen_shannon_divergence, normalize_row

__version__ = "0.1.0"
