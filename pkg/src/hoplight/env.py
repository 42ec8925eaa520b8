"""Deterministic Frogger-style gridworld with feature-based partial observations.

Board layout (bottom row first): a grass spawn strip, four road lanes with
wrapping car traffic, a middle grass strip, four river lanes with drifting
logs, and a lilypad row at the top. The frog hops one cell (40 px) per move;
cars and logs advance by a per-lane pixel speed each step, multiplied by
``level_speed_factor`` every time a level is completed.

Dynamics per step, in order:
  1. world advances: a frog standing on a log is carried with it, then cars
     wrap around their lane and logs translate (spawning at the upstream
     edge on a per-game randomized interval, vanishing off-screen);
  2. the frog applies its action displacement, clamped at the borders;
  3. events are evaluated at the resulting position: lilypad arrival
     (+5000, new frog spawns at the bottom; filling all pads completes the
     level, clears the pads and speeds up traffic), car overlap, river
     without a log under the frog's center, riding off-screen, and the
     per-frog move limit.

Rewards: -1 every step, plus -200 on death (``r_river`` for a death by
jumping into the water, -10000 for the fear-water profile), plus -300 when
the last life is lost, plus +5000 on lilypad arrival.

Observations are four features <N, S, E, W> over
{empty, water, car, log, lilypad, bounds}. Cars are visible sideways within
``vis_h`` pixels in the frog's own lane and within ``vis_v`` pixels
(horizontally) in the directly adjacent lane; road and grass both read
``empty`` when no car is visible. River-facing features anticipate this
step's log motion: they read ``log`` exactly when a log will cover the
destination cell center after the logs advance. The lilypad feature appears
only when the row above is the pad row and the destination cell is a free
pad; everything else in that row reads ``water``.

Same seed + same action sequence reproduces the episode bit-for-bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict

import numpy as np

from .errors import ConfigError

# Observation feature values.
EMPTY, WATER, CAR, LOG, LILYPAD, BOUNDS = range(6)
FEATURE_NAMES = ("empty", "water", "car", "log", "lilypad", "bounds")
N_FEATURES = len(FEATURE_NAMES)

# Actions, in the fixed tie-break order used everywhere.
ACTION_NAMES = ("N", "S", "E", "W")
N_ACTIONS = len(ACTION_NAMES)
NORTH, SOUTH, EAST, WEST = range(4)

OBS_SPACE_SIZE = N_FEATURES**4  # 1296 dense observation indices

REGION_NAMES = ("bottom-grass", "road", "middle-grass", "river", "lilypad")
DEATH_CAUSES = ("river", "car", "timeout", "off-screen-log")


def encode_obs(phi_n: int, phi_s: int, phi_e: int, phi_w: int) -> int:
    """Pack four feature values into a dense index in [0, 6^4)."""
    return ((phi_n * N_FEATURES + phi_s) * N_FEATURES + phi_e) * N_FEATURES + phi_w


def decode_obs(index: int):
    """Inverse of encode_obs: index -> (phi_n, phi_s, phi_e, phi_w)."""
    if not 0 <= index < OBS_SPACE_SIZE:
        raise ValueError(f"observation index out of range: {index}")
    phi_w = index % N_FEATURES
    index //= N_FEATURES
    phi_e = index % N_FEATURES
    index //= N_FEATURES
    phi_s = index % N_FEATURES
    phi_n = index // N_FEATURES
    return phi_n, phi_s, phi_e, phi_w


def obs_label(index: int) -> str:
    """Human-readable form of an observation index, e.g. 'N=log S=water ...'."""
    values = decode_obs(index)
    return " ".join(f"{d}={FEATURE_NAMES[v]}" for d, v in zip(ACTION_NAMES, values))


@dataclass(frozen=True)
class GameConfig:
    """Static parameters of one game; defaults give the reference board.

    ``car_speeds`` / ``log_speeds`` are pixels per step per lane, bottom lane
    first; positive values flow west to east. ``log_spawn_interval_range``
    bounds the per-game randomized spawn cadence (steps), drawn once per
    reset from the seeded generator. ``patrol_speed``/``patrol_count``
    configure the slow hazard sweeping the bottom grass strip (the arcade
    snake); it looks like any other moving hazard (feature ``car``) and
    kills on contact. Set patrol_count to 0 to disable it.
    """

    grid_width: int = 14
    lane_rows: tuple = (
        "grass", "road", "road", "road", "road",
        "grass", "river", "river", "river", "river", "pads",
    )
    cell_size: int = 40
    moves_per_level: int = 100
    lives: int = 3
    pad_cells: tuple = (2, 4, 6, 8, 10, 12)
    pads_to_complete: int = 2
    car_speeds: tuple = (12.0, -8.0, 7.0, 9.0)
    cars_per_lane: tuple = (1, 1, 1, 1)
    car_length: int = 20
    log_speeds: tuple = (5.0, -5.0, 4.0, -4.0)
    log_length: int = 240
    log_spawn_interval_range: tuple = (62, 78)
    patrol_speed: float = 7.0
    patrol_count: int = 1
    patrol_length: int = 60
    level_speed_factor: float = 1.25
    rng_seed: int = 0

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.grid_width < 3:
            raise ConfigError("grid_width must be >= 3")
        if self.lives < 1:
            raise ConfigError("lives must be >= 1")
        if self.moves_per_level < 1:
            raise ConfigError("moves_per_level must be >= 1")
        kinds = set(self.lane_rows)
        if not kinds <= {"grass", "road", "river", "pads"}:
            raise ConfigError(f"unknown lane kind in {self.lane_rows}")
        if self.lane_rows.count("pads") != 1 or self.lane_rows[-1] != "pads":
            raise ConfigError("exactly one pads row is required, at the top")
        if len(self.pad_cells) < 2:
            raise ConfigError("the pads row must hold at least 2 pads")
        if any(not 0 <= c < self.grid_width for c in self.pad_cells):
            raise ConfigError("pad cells must lie inside the grid")
        if not 1 <= self.pads_to_complete <= len(self.pad_cells):
            raise ConfigError("pads_to_complete must be within the pad count")
        n_road = self.lane_rows.count("road")
        n_river = self.lane_rows.count("river")
        if n_road == 0 or n_river == 0:
            raise ConfigError("need at least one road and one river lane")
        if len(self.car_speeds) != n_road or len(self.cars_per_lane) != n_road:
            raise ConfigError("car_speeds/cars_per_lane must match the road lane count")
        if len(self.log_speeds) != n_river:
            raise ConfigError("log_speeds must match the river lane count")
        if any(s == 0 for s in self.car_speeds + self.log_speeds):
            raise ConfigError("lane speeds must be nonzero")
        lo, hi = self.log_spawn_interval_range
        if not 1 <= lo <= hi:
            raise ConfigError("invalid log_spawn_interval_range")
        if min(abs(s) for s in self.log_speeds) * lo <= self.log_length:
            raise ConfigError("log spawn interval too short: logs would overlap")
        if self.patrol_count < 0 or (self.patrol_count > 0 and self.patrol_speed == 0):
            raise ConfigError("patrol_count needs a nonzero patrol_speed")

    @property
    def width_px(self) -> int:
        return self.grid_width * self.cell_size

    @property
    def pads_row(self) -> int:
        return len(self.lane_rows) - 1

    def region_of_row(self, row: int) -> str:
        kind = self.lane_rows[row]
        if kind == "grass":
            return "bottom-grass" if row == 0 else "middle-grass"
        if kind == "road":
            return "road"
        if kind == "river":
            return "river"
        return "lilypad"

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "GameConfig":
        d = dict(d)
        for key in ("lane_rows", "pad_cells", "car_speeds", "cars_per_lane",
                    "log_speeds", "log_spawn_interval_range"):
            if key in d:
                d[key] = tuple(d[key])
        return cls(**d)


@dataclass(frozen=True)
class StepOutcome:
    """Everything step() reports about one move."""

    observation: int
    reward: float
    death_cause: str | None
    region: str
    level: int
    episode_done: bool
    pad_reached: bool = False


@dataclass
class _Lane:
    row: int
    kind: str  # "road" | "river" | "patrol"
    speed: float  # current speed (scaled by level), px/step, sign = direction
    length: float  # body length in px (car, log, or patroller)
    positions: list = field(default_factory=list)  # left edge x of each body


class FroggerGame:
    """Mutable state of one game, bound to the observing agent's profile.

    The profile only shapes observations (vision ranges) and the river death
    reward; the world dynamics are profile-independent.
    """

    def __init__(self, config: GameConfig, profile):
        config.validate()
        self.config = config
        self.profile = profile
        self._row_kind = config.lane_rows
        self._road_rows = [r for r, k in enumerate(config.lane_rows) if k == "road"]
        self._river_rows = [r for r, k in enumerate(config.lane_rows) if k == "river"]
        self.done = True  # must reset() before step()

    # -- lifecycle -----------------------------------------------------

    def reset(self, seed: int | None = None) -> int:
        """Start a new game; returns the initial observation index."""
        cfg = self.config
        if seed is None:
            seed = cfg.rng_seed
        self.seed = int(seed)
        self.rng = np.random.default_rng(self.seed)
        lo, hi = cfg.log_spawn_interval_range
        self.spawn_interval = int(self.rng.integers(lo, hi + 1))

        self.level = 1
        self.lives_left = cfg.lives
        self.pads_filled = set()
        self.moves_used = 0  # level clock: survives deaths, resets on pad arrival
        self.step_count = 0
        self.score = 0.0
        self.done = False

        self.lanes = {}
        for i, row in enumerate(self._road_rows):
            lane = _Lane(row, "road", float(cfg.car_speeds[i]), float(cfg.car_length))
            spacing = cfg.width_px / cfg.cars_per_lane[i]
            offset = float(self.rng.uniform(0.0, spacing))
            lane.positions = [offset + j * spacing for j in range(cfg.cars_per_lane[i])]
            self.lanes[row] = lane
        if cfg.patrol_count > 0:
            lane = _Lane(0, "patrol", float(cfg.patrol_speed), float(cfg.patrol_length))
            spacing = cfg.width_px / cfg.patrol_count
            offset = float(self.rng.uniform(0.0, spacing))
            lane.positions = [offset + j * spacing for j in range(cfg.patrol_count)]
            self.lanes[0] = lane
        for i, row in enumerate(self._river_rows):
            lane = _Lane(row, "river", float(cfg.log_speeds[i]), float(cfg.log_length))
            spacing = self.spawn_interval * abs(lane.speed)
            offset = float(self.rng.uniform(0.0, spacing))
            x = -cfg.log_length + offset if lane.speed > 0 else cfg.width_px - offset
            step = spacing if lane.speed > 0 else -spacing
            while -cfg.log_length < x < cfg.width_px:
                lane.positions.append(x)
                x += step
            self.lanes[row] = lane

        self._spawn_frog()
        return self.observe()

    def _spawn_frog(self) -> None:
        self.frog_row = 0
        self.frog_x = float((self.config.grid_width // 2) * self.config.cell_size)

    # -- world dynamics ------------------------------------------------

    def _advance_world(self) -> None:
        cfg = self.config
        w = cfg.width_px
        # carry a riding frog before the logs move
        if self._row_kind[self.frog_row] == "river":
            lane = self.lanes[self.frog_row]
            center = self.frog_x + cfg.cell_size / 2
            for x in lane.positions:
                if x <= center <= x + cfg.log_length:
                    self.frog_x += lane.speed
                    break
        for lane in self.lanes.values():
            if lane.kind == "river":
                lane.positions = [
                    x + lane.speed
                    for x in lane.positions
                    if -lane.length < x + lane.speed < w
                ]
            else:  # road cars and the bottom patrol wrap around
                span = w + lane.length
                lane.positions = [
                    (x + lane.speed + lane.length) % span - lane.length
                    for x in lane.positions
                ]
        # periodic log spawns, staggered per lane
        for i, row in enumerate(self._river_rows):
            lane = self.lanes[row]
            if (self.step_count + i) % self.spawn_interval == 0:
                entry = -cfg.log_length if lane.speed > 0 else float(w)
                clear = all(
                    abs(x - entry) > cfg.log_length for x in lane.positions
                )
                if clear:
                    lane.positions.append(entry)

    def _level_up(self) -> None:
        self.level += 1
        self.pads_filled.clear()
        self.moves_used = 0
        for lane in self.lanes.values():
            lane.speed *= self.config.level_speed_factor

    # -- step ------------------------------------------------------------

    def step(self, action: int) -> StepOutcome:
        """Apply one action; see the module docstring for the event order."""
        if self.done:
            raise RuntimeError("step() called after episode_done; reset() first")
        if action not in (NORTH, SOUTH, EAST, WEST):
            raise ValueError(f"unknown action: {action!r}")
        cfg = self.config
        self.step_count += 1
        self.moves_used += 1
        reward = -1.0

        self._advance_world()

        cell = cfg.cell_size
        if action == NORTH:
            self.frog_row = min(self.frog_row + 1, cfg.pads_row)
        elif action == SOUTH:
            self.frog_row = max(self.frog_row - 1, 0)
        elif action == EAST:
            self.frog_x = min(self.frog_x + cell, float(cfg.width_px - cell))
        else:
            self.frog_x = max(self.frog_x - cell, 0.0)

        death = None
        pad_reached = False
        event_region = cfg.region_of_row(self.frog_row)
        center = self.frog_x + cell / 2

        if self.frog_row == cfg.pads_row:
            pad = int(center // cell)
            if pad in cfg.pad_cells and pad not in self.pads_filled:
                reward += 5000.0
                pad_reached = True
                self.pads_filled.add(pad)
                if len(self.pads_filled) >= cfg.pads_to_complete:
                    self._level_up()
                self.moves_used = 0  # a fresh frog gets a fresh move budget
                self._spawn_frog()
            else:
                death = "river"
        elif self._row_kind[self.frog_row] == "river":
            lane = self.lanes[self.frog_row]
            on_log = any(x <= center <= x + cfg.log_length for x in lane.positions)
            if not on_log:
                death = "river"
            elif center < 0 or center > cfg.width_px:
                death = "off-screen-log"
        else:
            lane = self.lanes.get(self.frog_row)  # road cars or the bottom patrol
            if lane is not None:
                half = (lane.length + cell) / 2
                if any(abs((x + lane.length / 2) - center) < half for x in lane.positions):
                    death = "car"

        if death is None and not pad_reached and self.moves_used >= cfg.moves_per_level:
            death = "timeout"

        if death is not None:
            reward += self.profile.r_river if death == "river" else -200.0
            self.lives_left -= 1
            if self.lives_left == 0:
                reward += -300.0
                self.done = True
            self.moves_used = 0  # per-frog move budget, like the arcade timer
            self._spawn_frog()

        self.score += reward
        return StepOutcome(
            observation=self.observe(),
            reward=reward,
            death_cause=death,
            region=event_region,
            level=self.level,
            episode_done=self.done,
            pad_reached=pad_reached,
        )

    # -- observation -----------------------------------------------------

    def observe(self, profile=None) -> int:
        """Encode the four directional features for the bound (or given) profile.

        River-facing and lilypad features are evaluated at destination *cell
        centers* (compensating the frog's own riding drift), while survival
        is checked at the frog's exact pixel center; the quantization gap is
        the residual chance that hopping toward a seen log still ends in the
        water.
        """
        if profile is None:
            profile = self.profile
        cfg = self.config
        cell = cfg.cell_size
        row, x = self.frog_row, self.frog_x
        center = x + cell / 2
        kind = self._row_kind[row]

        # riding drift: the carry the frog will get before its next hop lands
        drift = 0.0
        if kind == "river":
            lane = self.lanes[row]
            if any(lx <= center <= lx + cfg.log_length for lx in lane.positions):
                drift = lane.speed
        col = int((center + drift) // cell)

        phi = [EMPTY] * 4
        # E/W: frog's own lane; bounds when the destination cell leaves the grid
        if col + 1 >= cfg.grid_width:
            phi[EAST] = BOUNDS
        if col - 1 < 0:
            phi[WEST] = BOUNDS
        if kind == "river":
            for direction, dcol in ((EAST, 1), (WEST, -1)):
                if phi[direction] == BOUNDS:
                    continue
                point = (col + dcol) * cell + cell / 2
                phi[direction] = LOG if self._log_anticipated(row, point) else WATER
        else:
            lane = self.lanes.get(row)  # road cars or the bottom patrol
            if lane is not None:
                for direction, sign in ((EAST, 1.0), (WEST, -1.0)):
                    if phi[direction] == BOUNDS:
                        continue
                    if self._car_visible(lane, center, profile.vis_h, sign):
                        phi[direction] = CAR

        # N/S: adjacent rows
        for direction, drow in ((NORTH, 1), (SOUTH, -1)):
            target = row + drow
            if target < 0 or target > cfg.pads_row:
                phi[direction] = BOUNDS
                continue
            tkind = self._row_kind[target]
            if tkind == "pads":
                free = col in cfg.pad_cells and col not in self.pads_filled
                phi[direction] = LILYPAD if free else WATER
            elif tkind == "river":
                point = col * cell + cell / 2
                phi[direction] = LOG if self._log_anticipated(target, point) else WATER
            else:
                lane = self.lanes.get(target)
                seen = lane is not None and self._car_visible(
                    lane, center, profile.vis_v, 0.0
                )
                phi[direction] = CAR if seen else EMPTY

        return encode_obs(phi[NORTH], phi[SOUTH], phi[EAST], phi[WEST])

    def _car_visible(self, lane: _Lane, center: float, radius: float, sign: float) -> bool:
        """Car within ``radius`` px (center distance); sign 0 means both sides."""
        half_body = lane.length / 2
        for x in lane.positions:
            d = (x + half_body) - center
            if sign and d * sign < 0:
                continue
            if abs(d) <= radius:
                return True
        return False

    def _log_anticipated(self, row: int, point: float) -> bool:
        """Will a log in ``row`` cover ``point`` after this step's log motion?"""
        lane = self.lanes[row]
        length = self.config.log_length
        return any(x + lane.speed <= point <= x + lane.speed + length for x in lane.positions)

    # -- rendering --------------------------------------------------------

    def render_ascii(self) -> str:
        """One character per cell, top row first; no HUD.

        ``O`` free pad, ``@`` filled pad, ``~`` water, ``=`` log, ``<``/``>``
        car by direction, ``.`` road, ``,`` grass, ``F`` the frog.
        """
        cfg = self.config
        cell = cfg.cell_size
        rows = []
        frog_col = int((self.frog_x + cell / 2) // cell)
        for row in reversed(range(len(cfg.lane_rows))):
            kind = cfg.lane_rows[row]
            if kind == "pads":
                chars = ["~"] * cfg.grid_width
                for pad in cfg.pad_cells:
                    chars[pad] = "@" if pad in self.pads_filled else "O"
            elif kind == "grass":
                chars = [","] * cfg.grid_width
                lane = self.lanes.get(row)
                if lane is not None:
                    for x in lane.positions:
                        for col in range(cfg.grid_width):
                            c = col * cell + cell / 2
                            if x <= c <= x + lane.length:
                                chars[col] = "s"
            elif kind == "road":
                chars = ["."] * cfg.grid_width
                lane = self.lanes[row]
                glyph = ">" if lane.speed > 0 else "<"
                for x in lane.positions:
                    for col in range(cfg.grid_width):
                        c = col * cell + cell / 2
                        if x <= c <= x + cfg.car_length:
                            chars[col] = glyph
            else:
                chars = ["~"] * cfg.grid_width
                lane = self.lanes[row]
                for x in lane.positions:
                    for col in range(cfg.grid_width):
                        c = col * cell + cell / 2
                        if x <= c <= x + cfg.log_length:
                            chars[col] = "="
            if row == self.frog_row and 0 <= frog_col < cfg.grid_width:
                chars[frog_col] = "F"
            rows.append("".join(chars))
        return "\n".join(rows)

    _PPM_COLORS = {
        ",": (60, 160, 60), ".": (90, 90, 90), "~": (50, 90, 200),
        "=": (140, 100, 40), ">": (220, 60, 60), "<": (220, 160, 40),
        "O": (120, 220, 120), "@": (20, 120, 20), "F": (250, 250, 80),
        "s": (180, 60, 200),
    }

    def render_ppm(self, scale: int = 8, dim: float = 1.0) -> bytes:
        """Binary P6 pixmap of the current frame; ``dim`` < 1 darkens (fades)."""
        grid = self.render_ascii().splitlines()
        h, w = len(grid), len(grid[0])
        header = f"P6 {w * scale} {h * scale} 255\n".encode()
        out = bytearray(header)
        for line in grid:
            row = bytearray()
            for ch in line:
                r, g, b = self._PPM_COLORS[ch]
                px = bytes((int(r * dim), int(g * dim), int(b * dim))) * scale
                row += px
            out += bytes(row) * scale
        return bytes(out)


def reset(config: GameConfig, profile, seed: int) -> tuple:
    """Convenience: build a game, reset it, return (game, first observation)."""
    game = FroggerGame(config, profile)
    obs = game.reset(seed)
    return game, obs
