"""Tabular Q-learning with softmax exploration and the three agent presets.

Training runs ``episodes_train`` episodes with an exponentially decaying
softmax temperature beta(e) = beta_min + beta_max * beta_decay**e, then
``episodes_test`` episodes at beta_min (effectively greedy). Every
transition from both phases is streamed to the interaction dataset and the
trace, tagged with its phase.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict

import numpy as np

from .env import (
    DEATH_CAUSES, FroggerGame, GameConfig, N_ACTIONS, OBS_SPACE_SIZE,
    REGION_NAMES,
)
from .errors import ConfigError
from .recorder import InteractionDataset, Trace, TraceBuilder

_REGION_INDEX = {name: i for i, name in enumerate(REGION_NAMES)}
_DEATH_INDEX = {name: i + 1 for i, name in enumerate(DEATH_CAUSES)}


@dataclass(frozen=True)
class AgentProfile:
    """Perceptual and motivational parameters defining one agent.

    vis_h / vis_v are the horizontal/vertical car vision ranges in pixels,
    r_river the reward for dying in the water, q_init the optimistic
    initialization of the Q-table.
    """

    name: str
    vis_h: float
    vis_v: float
    r_river: float
    q_init: float


PROFILES = {
    "optimized": AgentProfile("optimized", 60.0, 40.0, -200.0, 5000.0),
    "high-vision": AgentProfile("high-vision", 140.0, 120.0, -200.0, 5000.0),
    "fear-water": AgentProfile("fear-water", 60.0, 40.0, -10000.0, 0.0),
}


def resolve_profile(profile) -> AgentProfile:
    if isinstance(profile, AgentProfile):
        return profile
    try:
        return PROFILES[profile]
    except KeyError:
        raise ConfigError(
            f"unknown profile {profile!r}; expected one of {sorted(PROFILES)}"
        ) from None


@dataclass(frozen=True)
class TrainingSchedule:
    episodes_train: int = 2000
    episodes_test: int = 2000
    max_steps_per_episode: int = 300
    beta_min: float = 0.05
    beta_max: float = 20.0
    beta_decay: float = 0.995
    alpha: float = 0.1
    gamma: float = 0.9

    def __post_init__(self):
        if self.beta_min <= 0 or self.beta_max < 0 or not 0 < self.beta_decay <= 1:
            raise ConfigError("beta schedule must keep beta positive")
        if not 0 < self.alpha <= 1:
            raise ConfigError("alpha must be in (0, 1]")
        if not 0 <= self.gamma <= 1:
            raise ConfigError("gamma must be in [0, 1]")

    def beta(self, episode: int) -> float:
        return self.beta_min + self.beta_max * self.beta_decay**episode


class QTable:
    """Dense table over (observation index, action), initialized at q_init.

    Rows are plain Python lists (the training loop is pure-Python hot path);
    as_array() exports a float64 ndarray snapshot.
    """

    def __init__(self, q_init: float = 0.0, n_states: int = OBS_SPACE_SIZE,
                 n_actions: int = N_ACTIONS):
        self.q_init = float(q_init)
        self.n_actions = n_actions
        self.rows = [[self.q_init] * n_actions for _ in range(n_states)]

    def value(self, s: int, a: int) -> float:
        return self.rows[s][a]

    def v(self, s: int) -> float:
        """State value V(s) = max_a Q(s, a)."""
        return max(self.rows[s])

    def greedy(self, s: int) -> int:
        """Argmax with ties broken by the fixed action order N,S,E,W."""
        row = self.rows[s]
        best, best_a = row[0], 0
        for a in range(1, self.n_actions):
            if row[a] > best:
                best, best_a = row[a], a
        return best_a

    def as_array(self) -> np.ndarray:
        return np.array(self.rows, dtype=np.float64)


def select_action(q_row, beta: float, rng) -> int:
    """Sample an action with probability proportional to exp(Q/beta).

    Numerically stabilized by subtracting the row maximum before
    exponentiation, so arbitrarily large magnitudes are safe.
    """
    if beta <= 0:
        raise ValueError("softmax temperature must be positive")
    m = max(q_row)
    if not math.isfinite(m) or not math.isfinite(min(q_row)):
        raise ValueError(f"non-finite Q values: {q_row!r}")
    weights = [math.exp((v - m) / beta) for v in q_row]
    u = rng.random() * (weights[0] + weights[1] + weights[2] + weights[3])
    acc = 0.0
    for a, w in enumerate(weights):
        acc += w
        if u < acc:
            return a
    return len(weights) - 1


def softmax_probabilities(q_row, beta: float) -> np.ndarray:
    """Analytic action distribution used by select_action."""
    q = np.asarray(q_row, dtype=float)
    w = np.exp((q - q.max()) / beta)
    return w / w.sum()


def q_update(q: QTable, s: int, a: int, r: float, s_next: int,
             alpha: float, gamma: float) -> float:
    """One sample backup Q(s,a) += alpha * td; returns the pre-update td.

    td = r + gamma * max_b Q(s_next, b) - Q(s, a), the prediction error the
    recorder accumulates into its running means.
    """
    row = q.rows[s]
    td = r + gamma * max(q.rows[s_next]) - row[a]
    row[a] += alpha * td
    return td


class _PhaseStats:
    def __init__(self):
        self.episodes = 0
        self.steps = 0
        self.level_sum = 0
        self.pads = 0
        self.deaths = {c: 0 for c in DEATH_CAUSES}
        self.deaths_by_region = {r: 0 for r in REGION_NAMES}
        self.region_steps = {r: 0 for r in REGION_NAMES}

    def to_dict(self) -> dict:
        eps = max(self.episodes, 1)
        return {
            "episodes": self.episodes,
            "mean_level": self.level_sum / eps,
            "mean_steps": self.steps / eps,
            "pads_reached": self.pads,
            "deaths": dict(self.deaths),
            "deaths_total": sum(self.deaths.values()),
            "deaths_by_region": dict(self.deaths_by_region),
            "region_steps": dict(self.region_steps),
        }


@dataclass
class ExperimentResult:
    profile: AgentProfile
    schedule: TrainingSchedule
    config: GameConfig
    seed: int
    q: np.ndarray
    dataset: InteractionDataset
    trace: Trace | None
    performance: dict


def episode_seeds(seed: int, n: int) -> np.ndarray:
    """Per-episode environment seeds, re-derivable for trace replay."""
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 1]))
    return rng.integers(0, 2**31 - 1, size=n)


def trace_meta(profile: AgentProfile, schedule: TrainingSchedule,
               config: GameConfig, seed: int) -> dict:
    return {
        "profile": profile.name,
        "profile_params": asdict(profile),
        "schedule": asdict(schedule),
        "config": config.to_dict(),
        "seed": int(seed),
    }


def run_experiment(profile, schedule: TrainingSchedule, config: GameConfig,
                   seed: int, record_trace: bool = True,
                   trace_path=None) -> ExperimentResult:
    """Train then test one agent, recording the full interaction history.

    Returns the learned Q-table, the accumulated dataset, the trace (unless
    record_trace is False), and per-phase performance summaries. If
    trace_path is given the trace is also written there.
    """
    profile = resolve_profile(profile)
    game = FroggerGame(config, profile)
    q = QTable(q_init=profile.q_init)
    meta = trace_meta(profile, schedule, config, seed)
    ds = InteractionDataset(q_init=profile.q_init, meta=meta)
    builder = TraceBuilder(meta) if record_trace or trace_path else None

    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0]))
    total = schedule.episodes_train + schedule.episodes_test
    seeds = episode_seeds(seed, total)
    alpha, gamma = schedule.alpha, schedule.gamma
    max_steps = schedule.max_steps_per_episode
    stats = {0: _PhaseStats(), 1: _PhaseStats()}

    for episode in range(total):
        phase = 0 if episode < schedule.episodes_train else 1
        beta = schedule.beta(episode) if phase == 0 else schedule.beta_min
        st = stats[phase]
        s = game.reset(int(seeds[episode]))
        rows = q.rows
        for step in range(max_steps):
            score_at_s = game.score
            a = select_action(rows[s], beta, rng)
            out = game.step(a)
            s_next = out.observation
            td = q_update(q, s, a, out.reward, s_next, alpha, gamma)
            ds.record(s, a, out.reward, s_next, td)
            region_idx = _REGION_INDEX[out.region]
            st.region_steps[out.region] += 1
            if out.death_cause is not None:
                st.deaths[out.death_cause] += 1
                st.deaths_by_region[out.region] += 1
            if out.pad_reached:
                st.pads += 1
            if builder is not None:
                builder.append(
                    episode, step, phase, s, a, out.reward, s_next,
                    score_at_s, region_idx,
                    0 if out.death_cause is None else _DEATH_INDEX[out.death_cause],
                    out.level,
                )
            st.steps += 1
            s = s_next
            if out.episode_done:
                break
        st.episodes += 1
        st.level_sum += game.level

    ds.q = q.as_array()
    trace = builder.finalize() if builder is not None else None
    if trace_path is not None and trace is not None:
        trace.save(trace_path)
    performance = {"train": stats[0].to_dict(), "test": stats[1].to_dict()}
    return ExperimentResult(
        profile=profile, schedule=schedule, config=config, seed=int(seed),
        q=ds.q, dataset=ds, trace=trace if record_trace else None,
        performance=performance,
    )
