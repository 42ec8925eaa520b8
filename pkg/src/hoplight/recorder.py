"""Interaction recording: transition traces and the accumulated dataset.

The trace is the raw line-delimited history (one transition per line, with a
header carrying schema/provenance); the dataset is everything the analyses
need, accumulated incrementally while recording: visit counters c(s),
c(s,a), c(s,a,s'), recency timestamps, running reward and TD-error means,
and a Q-table snapshot.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .env import DEATH_CAUSES, N_ACTIONS, OBS_SPACE_SIZE, REGION_NAMES
from .errors import SchemaError

SCHEMA_VERSION = 1

PHASES = ("train", "test")

TRACE_FIELDS = (
    "episode", "step", "phase", "s", "a", "r",
    "s_next", "score", "region", "death_cause", "level",
)


@dataclass(frozen=True)
class TransitionRecord:
    """One (episode, step, s, a, r, s') tuple plus bookkeeping tags."""

    episode: int
    step: int
    phase: str  # "train" | "test"
    s: int
    a: int
    r: float
    s_next: int
    score: float  # game score when s was observed (highlight diversity key)
    region: str
    death_cause: str | None
    level: int


class TraceBuilder:
    """Append-only accumulator; finalize() packs columns into a Trace."""

    def __init__(self, meta: dict | None = None):
        self.meta = dict(meta or {})
        self._cols = {f: [] for f in TRACE_FIELDS}

    def append(self, episode, step, phase_idx, s, a, r, s_next, score,
               region_idx, death_idx, level) -> None:
        c = self._cols
        c["episode"].append(episode)
        c["step"].append(step)
        c["phase"].append(phase_idx)
        c["s"].append(s)
        c["a"].append(a)
        c["r"].append(r)
        c["s_next"].append(s_next)
        c["score"].append(score)
        c["region"].append(region_idx)
        c["death_cause"].append(death_idx)
        c["level"].append(level)

    def finalize(self) -> "Trace":
        c = self._cols
        return Trace(
            episode=np.array(c["episode"], dtype=np.int32),
            step=np.array(c["step"], dtype=np.int32),
            phase=np.array(c["phase"], dtype=np.int8),
            s=np.array(c["s"], dtype=np.int16),
            a=np.array(c["a"], dtype=np.int8),
            r=np.array(c["r"], dtype=np.float64),
            s_next=np.array(c["s_next"], dtype=np.int16),
            score=np.array(c["score"], dtype=np.float64),
            region=np.array(c["region"], dtype=np.int8),
            death_cause=np.array(c["death_cause"], dtype=np.int8),
            level=np.array(c["level"], dtype=np.int16),
            meta=self.meta,
        )


class Trace:
    """Columnar transition history (numpy arrays, one entry per step)."""

    def __init__(self, episode, step, phase, s, a, r, s_next, score,
                 region, death_cause, level, meta=None):
        self.episode = episode
        self.step = step
        self.phase = phase
        self.s = s
        self.a = a
        self.r = r
        self.s_next = s_next
        self.score = score
        self.region = region
        self.death_cause = death_cause
        self.level = level
        self.meta = dict(meta or {})

    def __len__(self) -> int:
        return len(self.s)

    def record(self, i: int) -> TransitionRecord:
        death = int(self.death_cause[i])
        return TransitionRecord(
            episode=int(self.episode[i]),
            step=int(self.step[i]),
            phase=PHASES[int(self.phase[i])],
            s=int(self.s[i]),
            a=int(self.a[i]),
            r=float(self.r[i]),
            s_next=int(self.s_next[i]),
            score=float(self.score[i]),
            region=REGION_NAMES[int(self.region[i])],
            death_cause=None if death == 0 else DEATH_CAUSES[death - 1],
            level=int(self.level[i]),
        )

    def phase_indices(self, phase: str | None) -> np.ndarray:
        """Positions matching a phase filter ("train", "test", or None/"all")."""
        if phase in (None, "all"):
            return np.arange(len(self))
        if phase not in PHASES:
            raise ValueError(f"unknown phase: {phase!r}")
        return np.flatnonzero(self.phase == PHASES.index(phase))

    def episode_bounds(self, episode: int) -> tuple:
        """(first step, last step) recorded for an episode."""
        idx = np.flatnonzero(self.episode == episode)
        if idx.size == 0:
            raise KeyError(f"episode {episode} not in trace")
        return int(self.step[idx[0]]), int(self.step[idx[-1]])

    def episode_rows(self, episode: int) -> np.ndarray:
        return np.flatnonzero(self.episode == episode)

    # -- persistence ---------------------------------------------------

    def save(self, path) -> None:
        header = {
            "schema_version": SCHEMA_VERSION,
            "kind": "trace",
            "fields": list(TRACE_FIELDS),
            "phases": list(PHASES),
            "regions": list(REGION_NAMES),
            "death_causes": list(DEATH_CAUSES),
            "meta": self.meta,
        }
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(header) + "\n")
            for i in range(len(self)):
                row = [
                    int(self.episode[i]), int(self.step[i]), int(self.phase[i]),
                    int(self.s[i]), int(self.a[i]), float(self.r[i]),
                    int(self.s_next[i]), float(self.score[i]), int(self.region[i]),
                    int(self.death_cause[i]), int(self.level[i]),
                ]
                fh.write(json.dumps(row) + "\n")

    @classmethod
    def load(cls, path) -> "Trace":
        builder = TraceBuilder()
        try:
            with open(path, "r", encoding="utf-8") as fh:
                header_line = fh.readline()
                header = json.loads(header_line)
                if header.get("kind") != "trace":
                    raise SchemaError(f"{path}: not a trace file")
                if header.get("schema_version") != SCHEMA_VERSION:
                    raise SchemaError(f"{path}: unsupported trace schema version")
                if header.get("fields") != list(TRACE_FIELDS):
                    raise SchemaError(f"{path}: unexpected trace fields")
                builder.meta = header.get("meta", {})
                for line in fh:
                    row = json.loads(line)
                    if len(row) != len(TRACE_FIELDS):
                        raise SchemaError(f"{path}: malformed trace row")
                    builder.append(*row)
        except (json.JSONDecodeError, ValueError) as exc:
            raise SchemaError(f"{path}: corrupt trace file ({exc})") from exc
        return builder.finalize()

    def equals(self, other: "Trace") -> bool:
        return all(
            np.array_equal(getattr(self, f), getattr(other, f))
            for f in TRACE_FIELDS
        ) and self.meta == other.meta


class InteractionDataset:
    """All counters, running averages, and learned tables over a history.

    Counters live in dense arrays over the 6^4 observation space; successor
    counts c(s,a,s') are a sparse dict keyed by s * n_actions + a.
    Recency entries are -1 until first visit. Running means use the
    incremental update m += (x - m) / n.
    """

    def __init__(self, obs_space_size: int = OBS_SPACE_SIZE,
                 n_actions: int = N_ACTIONS, q_init: float = 0.0,
                 meta: dict | None = None):
        self.obs_space_size = obs_space_size
        self.n_actions = n_actions
        self.q_init = float(q_init)
        self.meta = dict(meta or {})
        z, a = obs_space_size, n_actions
        self.n_s = np.zeros(z, dtype=np.int64)
        self.n_sa = np.zeros((z, a), dtype=np.int64)
        self.n_sas: dict = {}
        self.t_s = np.full(z, -1, dtype=np.int64)
        self.t_sa = np.full((z, a), -1, dtype=np.int64)
        self.r_hat = np.zeros((z, a), dtype=np.float64)
        self.dq_hat = np.zeros((z, a), dtype=np.float64)
        self.dq_abs_hat = np.zeros((z, a), dtype=np.float64)
        self.q = np.full((z, a), self.q_init, dtype=np.float64)
        self.total_steps = 0

    # -- recording -------------------------------------------------------

    def record(self, s: int, a: int, r: float, s_next: int, td_error: float) -> None:
        """Fold one transition into every counter and running mean."""
        t = self.total_steps
        self.n_s[s] += 1
        self.n_sa[s, a] += 1
        key = s * self.n_actions + a
        succ = self.n_sas.get(key)
        if succ is None:
            succ = self.n_sas[key] = {}
        succ[s_next] = succ.get(s_next, 0) + 1
        self.t_s[s] = t
        self.t_sa[s, a] = t
        n = self.n_sa[s, a]
        self.r_hat[s, a] += (r - self.r_hat[s, a]) / n
        self.dq_hat[s, a] += (td_error - self.dq_hat[s, a]) / n
        self.dq_abs_hat[s, a] += (abs(td_error) - self.dq_abs_hat[s, a]) / n
        self.total_steps = t + 1

    def visited_states(self) -> np.ndarray:
        return np.flatnonzero(self.n_s > 0)

    def visited_pairs(self):
        """Iterate (s, a) pairs with c(s,a) > 0."""
        rows, cols = np.nonzero(self.n_sa)
        return [(int(s), int(a)) for s, a in zip(rows, cols)]

    def values(self) -> np.ndarray:
        """V(s) = max_a Q(s,a), dense over the observation space."""
        return self.q.max(axis=1)

    # -- empirical distributions ------------------------------------------

    def estimated_transition(self, s: int, a: int) -> dict:
        """P(s'|s,a) = c(s,a,s') / c(s,a); empty dict when (s,a) unvisited."""
        succ = self.n_sas.get(s * self.n_actions + a)
        if not succ:
            return {}
        total = self.n_sa[s, a]
        return {sp: c / total for sp, c in succ.items()}

    def interaction_policy(self, s: int) -> np.ndarray | None:
        """pi(s, .) = c(s, .) / c(s); None when s was never visited."""
        total = self.n_s[s]
        if total == 0:
            return None
        return self.n_sa[s] / total

    def successors(self, s: int) -> set:
        """All observed successors of s, over every action."""
        out: set = set()
        for a in range(self.n_actions):
            succ = self.n_sas.get(s * self.n_actions + a)
            if succ:
                out.update(succ.keys())
        return out

    # -- persistence -------------------------------------------------------

    def to_dict(self) -> dict:
        visited = [int(s) for s in self.visited_states()]
        q_rows = np.flatnonzero(np.any(self.q != self.q_init, axis=1))
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": "dataset",
            "obs_space_size": self.obs_space_size,
            "n_actions": self.n_actions,
            "q_init": self.q_init,
            "total_steps": self.total_steps,
            "meta": self.meta,
            "n_s": {str(s): int(self.n_s[s]) for s in visited},
            "n_sa": {str(s): [int(c) for c in self.n_sa[s]] for s in visited},
            "n_sas": {
                str(key): {str(sp): int(c) for sp, c in sorted(succ.items())}
                for key, succ in sorted(self.n_sas.items())
            },
            "t_s": {str(s): int(self.t_s[s]) for s in visited},
            "t_sa": {str(s): [int(t) for t in self.t_sa[s]] for s in visited},
            "r_hat": {str(s): [float(v) for v in self.r_hat[s]] for s in visited},
            "dq_hat": {str(s): [float(v) for v in self.dq_hat[s]] for s in visited},
            "dq_abs_hat": {str(s): [float(v) for v in self.dq_abs_hat[s]] for s in visited},
            "q": {str(int(s)): [float(v) for v in self.q[s]] for s in q_rows},
        }

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def from_dict(cls, d: dict) -> "InteractionDataset":
        if d.get("kind") != "dataset":
            raise SchemaError("not a dataset snapshot")
        if d.get("schema_version") != SCHEMA_VERSION:
            raise SchemaError("unsupported dataset schema version")
        ds = cls(d["obs_space_size"], d["n_actions"], d["q_init"], d.get("meta"))
        ds.total_steps = d["total_steps"]
        for s, c in d["n_s"].items():
            ds.n_s[int(s)] = c
        for s, row in d["n_sa"].items():
            ds.n_sa[int(s)] = row
        ds.n_sas = {
            int(key): {int(sp): c for sp, c in succ.items()}
            for key, succ in d["n_sas"].items()
        }
        for s, t in d["t_s"].items():
            ds.t_s[int(s)] = t
        for name in ("t_sa", "r_hat", "dq_hat", "dq_abs_hat", "q"):
            arr = getattr(ds, name)
            for s, row in d[name].items():
                arr[int(s)] = row
        return ds

    @classmethod
    def load(cls, path) -> "InteractionDataset":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                d = json.load(fh)
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            raise SchemaError(f"{path}: corrupt dataset snapshot ({exc})") from exc
        if not isinstance(d, dict):
            raise SchemaError(f"{path}: corrupt dataset snapshot")
        try:
            return cls.from_dict(d)
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"{path}: malformed dataset snapshot ({exc})") from exc

    def equals(self, other: "InteractionDataset") -> bool:
        if (self.obs_space_size, self.n_actions, self.q_init, self.total_steps) != (
            other.obs_space_size, other.n_actions, other.q_init, other.total_steps
        ):
            return False
        dense = ("n_s", "n_sa", "t_s", "t_sa", "r_hat", "dq_hat", "dq_abs_hat", "q")
        if not all(np.array_equal(getattr(self, f), getattr(other, f)) for f in dense):
            return False
        return self.n_sas == other.n_sas and self.meta == other.meta
