"""Deterministic 2-D tile world with a fixed-heading first-person camera.

The agent is a disc of radius ``AGENT_RADIUS`` moving with continuous
coordinates in tile units. It always faces ``+x``; the action's
``forward`` component moves along ``x`` and ``strafe`` along ``y``.

All operations are state-in/state-out on the immutable :class:`WorldState`.
:class:`TileWorld` wraps a state for code that prefers an environment object
(the agents, the demonstrator and the harness).
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from enum import IntEnum
from importlib import resources
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import DeadAgent, MapFormatError, Untraversable

AGENT_RADIUS = 0.2
SIGMA_OBS = 0.05
WEB_SPEED_FACTOR = 0.3
FRAME_WIDTH = 64
FRAME_HEIGHT = 48

# texture id of the striped wall whose period (0.5 tile) divides the tile size
REPETITIVE = 99

_EPS = 1e-9
_MAX_SUBSTEP = 0.25


class TileKind(IntEnum):
    FLOOR = 0
    WALL = 1
    LAVA = 2
    WEB = 3
    GOAL = 4


BLOCKING = (TileKind.WALL,)


class Position(NamedTuple):
    x: float
    y: float

    def distance(self, other) -> float:
        return math.hypot(self.x - other[0], self.y - other[1])


@dataclass(frozen=True)
class Action:
    """Forward/strafe command, each component clamped to [-1, 1]."""

    forward: float = 0.0
    strafe: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "forward", float(min(1.0, max(-1.0, self.forward))))
        object.__setattr__(self, "strafe", float(min(1.0, max(-1.0, self.strafe))))


# ---------------------------------------------------------------------------
# maps

_FLOOR_CHARS = {".": 0, **{c: i + 1 for i, c in enumerate("abcdefghi")}}
_WALL_CHARS = {"#": 0, "R": REPETITIVE, **{str(i): i for i in range(1, 10)}}


@dataclass(frozen=True, eq=False)
class TileMap:
    """Gridded landscape. ``kinds`` and ``textures`` are indexed ``[y, x]``."""

    kinds: np.ndarray
    textures: np.ndarray
    goal_cell: tuple
    spawn: Position
    s_max: float = 4.0
    dt: float = 0.1
    seed: int = 0
    path: tuple = ()
    name: str = "map"
    _render_cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self.kinds.setflags(write=False)
        self.textures.setflags(write=False)
        _check_map(self)

    @property
    def width(self) -> int:
        return self.kinds.shape[1]

    @property
    def height(self) -> int:
        return self.kinds.shape[0]

    def tile(self, x: float, y: float) -> TileKind:
        cx, cy = math.floor(x), math.floor(y)
        if not (0 <= cx < self.width and 0 <= cy < self.height):
            return TileKind.WALL
        return TileKind(int(self.kinds[cy, cx]))

    def in_bounds(self, x: float, y: float) -> bool:
        return 0.0 <= x <= self.width and 0.0 <= y <= self.height

    def body_overlaps_wall(self, x: float, y: float, radius: float = AGENT_RADIUS) -> bool:
        x0, x1 = math.floor(x - radius + _EPS), math.ceil(x + radius - _EPS) - 1
        y0, y1 = math.floor(y - radius + _EPS), math.ceil(y + radius - _EPS) - 1
        if x0 < 0 or y0 < 0 or x1 >= self.width or y1 >= self.height:
            return True
        return bool(np.any(self.kinds[y0:y1 + 1, x0:x1 + 1] == TileKind.WALL))

    def traversable(self, p) -> bool:
        """True if the agent can stand at ``p`` (no wall contact, not in lava)."""
        x, y = p
        if not self.in_bounds(x, y):
            return False
        if self.tile(x, y) in (TileKind.WALL, TileKind.LAVA):
            return False
        return not self.body_overlaps_wall(x, y)

    def goal_center(self) -> Position:
        return Position(self.goal_cell[0] + 0.5, self.goal_cell[1] + 0.5)

    def cells(self, kind=None):
        """Centers of all tiles (optionally of one kind) in row-major order."""
        mask = np.ones(self.kinds.shape, bool) if kind is None else self.kinds == kind
        ys, xs = np.nonzero(mask)
        return [Position(x + 0.5, y + 0.5) for y, x in zip(ys.tolist(), xs.tolist())]


def _check_map(m: TileMap):
    k = m.kinds
    if k.ndim != 2 or k.shape[0] < 3 or k.shape[1] < 3:
        raise MapFormatError("map must be at least 3x3")
    border = np.concatenate([k[0], k[-1], k[:, 0], k[:, -1]])
    if np.any(border != TileKind.WALL):
        raise MapFormatError("border tiles must be walls")
    if int(np.sum(k == TileKind.GOAL)) != 1:
        raise MapFormatError("map needs exactly one goal tile")
    gy, gx = np.argwhere(k == TileKind.GOAL)[0]
    if (int(gx), int(gy)) != tuple(m.goal_cell):
        raise MapFormatError("goal_cell does not match the goal tile")
    if not m.traversable(m.spawn):
        raise MapFormatError(f"spawn {tuple(m.spawn)} is not traversable")
    if m.s_max <= 0 or m.dt <= 0:
        raise MapFormatError("s_max and dt must be positive")


def parse_map(text: str, name: str = "map") -> TileMap:
    """Parse the plain-text map format.

    Header ``width height s_max dt seed``, then ``height`` rows of tile codes
    (``.`` floor, ``#`` wall, ``R`` repetitive wall, ``L`` lava, ``W`` web,
    ``G`` goal, ``S`` spawn; ``a``-``i`` and ``1``-``9`` select alternative
    floor and wall textures). Optional trailing ``path x y x y ...`` lines hold
    the scripted demonstrator route. Lines starting with ``;`` are comments.
    """
    lines = [ln.rstrip("\n") for ln in text.splitlines()]
    lines = [ln for ln in lines if ln.strip() and not ln.lstrip().startswith(";")]
    if not lines:
        raise MapFormatError("empty map file")
    try:
        w, h, s_max, dt, seed = lines[0].split()
        w, h, s_max, dt, seed = int(w), int(h), float(s_max), float(dt), int(seed)
    except ValueError as exc:
        raise MapFormatError(f"bad header {lines[0]!r}") from exc
    rows = lines[1:1 + h]
    if len(rows) != h or any(len(r) != w for r in rows):
        raise MapFormatError(f"expected {h} rows of width {w}")
    kinds = np.zeros((h, w), dtype=np.int8)
    textures = np.zeros((h, w), dtype=np.int16)
    spawn = goal = None
    for y, row in enumerate(rows):
        for x, ch in enumerate(row):
            if ch in _FLOOR_CHARS:
                textures[y, x] = _FLOOR_CHARS[ch]
            elif ch in _WALL_CHARS:
                kinds[y, x] = TileKind.WALL
                textures[y, x] = _WALL_CHARS[ch]
            elif ch == "L":
                kinds[y, x] = TileKind.LAVA
            elif ch == "W":
                kinds[y, x] = TileKind.WEB
            elif ch == "G":
                kinds[y, x] = TileKind.GOAL
                if goal is not None:
                    raise MapFormatError("more than one goal tile")
                goal = (x, y)
            elif ch == "S":
                if spawn is not None:
                    raise MapFormatError("more than one spawn tile")
                spawn = Position(x + 0.5, y + 0.5)
            else:
                raise MapFormatError(f"unknown tile code {ch!r} at ({x}, {y})")
    if spawn is None or goal is None:
        raise MapFormatError("map needs a spawn (S) and a goal (G)")
    path = []
    for ln in lines[1 + h:]:
        parts = ln.split()
        if parts[0] != "path" or len(parts) % 2 == 0:
            raise MapFormatError(f"bad trailing line {ln!r}")
        vals = [float(v) for v in parts[1:]]
        path.extend(Position(vals[i], vals[i + 1]) for i in range(0, len(vals), 2))
    return TileMap(kinds, textures, goal, spawn, s_max, dt, seed, tuple(path), name)


def format_map(m: TileMap) -> str:
    inv_floor = {v: k for k, v in _FLOOR_CHARS.items()}
    inv_wall = {v: k for k, v in _WALL_CHARS.items()}
    out = [f"{m.width} {m.height} {m.s_max:g} {m.dt:g} {m.seed}"]
    sx, sy = math.floor(m.spawn.x), math.floor(m.spawn.y)
    for y in range(m.height):
        row = []
        for x in range(m.width):
            kind, tex = TileKind(int(m.kinds[y, x])), int(m.textures[y, x])
            if (x, y) == (sx, sy):
                row.append("S")
            elif kind == TileKind.WALL:
                row.append(inv_wall[tex])
            elif kind == TileKind.FLOOR:
                row.append(inv_floor[tex])
            else:
                row.append({TileKind.LAVA: "L", TileKind.WEB: "W", TileKind.GOAL: "G"}[kind])
        out.append("".join(row))
    if m.path:
        out.append("path " + " ".join(f"{p.x:g} {p.y:g}" for p in m.path))
    return "\n".join(out) + "\n"


BUNDLED_MAPS = ("mission1", "mission2", "mission3", "openroom", "corridor", "fogroom")


def load_map(source) -> TileMap:
    """Load a map from a path or a bundled map name such as ``"mission1"``."""
    src = str(source)
    stem = src[:-4] if src.endswith(".map") else src
    if stem in BUNDLED_MAPS and not Path(src).exists():
        text = resources.files("infointegrate.maps").joinpath(stem + ".map").read_text()
        return parse_map(text, name=stem)
    path = Path(src)
    return parse_map(path.read_text(), name=path.stem)


# ---------------------------------------------------------------------------
# state and operations


@dataclass(frozen=True)
class WorldState:
    map: TileMap
    pos: Position
    clock: float = 0.0
    alive: bool = True
    rng_seed: int = 0
    interaction_counter: int = 0
    noise_draws: int = 0

    @property
    def heading(self) -> float:
        return 0.0


def new_state(tile_map: TileMap, seed=None) -> WorldState:
    seed = tile_map.seed if seed is None else int(seed)
    if seed < 0:
        raise ValueError("seed must be non-negative")
    return WorldState(tile_map, Position(*tile_map.spawn), rng_seed=seed)


def _clamp_axis(m: TileMap, x: float, y: float, d: float, axis: int) -> float:
    """Move one axis by ``d`` (|d| < 1) and stop at the first blocking tile face."""
    r = AGENT_RADIUS
    a, b = (x, y) if axis == 0 else (y, x)
    lo_b, hi_b = math.floor(b - r + _EPS), math.ceil(b + r - _EPS) - 1
    new = a + d
    if d > 0:
        first, last = math.ceil(a + r - _EPS), math.ceil(new + r - _EPS) - 1
        cols = range(first, last + 1)
    else:
        first, last = math.floor(a - r + _EPS) - 1, math.floor(new - r + _EPS)
        cols = range(first, last - 1, -1)
    for c in cols:
        for o in range(lo_b, hi_b + 1):
            tx, ty = (c, o) if axis == 0 else (o, c)
            if m.tile(tx + 0.5, ty + 0.5) == TileKind.WALL:
                return c - r if d > 0 else c + 1 + r
    return new


def step(state: WorldState, a: Action, dt=None) -> WorldState:
    """Advance the agent by one control interval."""
    if not state.alive:
        raise DeadAgent("cannot step a dead agent")
    m = state.map
    dt = m.dt if dt is None else float(dt)
    if dt <= 0:
        raise ValueError("dt must be positive")
    factor = WEB_SPEED_FACTOR if m.tile(*state.pos) == TileKind.WEB else 1.0
    dx = dt * m.s_max * factor * a.forward
    dy = dt * m.s_max * factor * a.strafe
    n = max(1, math.ceil(max(abs(dx), abs(dy)) / _MAX_SUBSTEP))
    x, y = state.pos
    alive = True
    for _ in range(n):
        x = _clamp_axis(m, x, y, dx / n, 0)
        y = _clamp_axis(m, x, y, dy / n, 1)
        if m.tile(x, y) == TileKind.LAVA:
            alive = False
            break
    return dataclasses.replace(state, pos=Position(x, y), clock=state.clock + dt, alive=alive,
                               interaction_counter=state.interaction_counter + 1)


def render(state: WorldState, noise: bool = True, sigma: float = SIGMA_OBS):
    """Return ``(new_state, frame)``; the frame is a (48, 64) array in [0, 1]."""
    from .render import render_clean

    frame = render_clean(state.map, state.pos)
    draws = state.noise_draws
    if noise and sigma > 0:
        rng = np.random.default_rng([state.rng_seed, draws])
        frame = np.clip(frame + rng.normal(0.0, sigma, frame.shape), 0.0, 1.0)
        draws += 1
    return dataclasses.replace(state, interaction_counter=state.interaction_counter + 1,
                               noise_draws=draws), frame


def teleport(state: WorldState, p) -> WorldState:
    p = Position(float(p[0]), float(p[1]))
    if not state.map.traversable(p):
        raise Untraversable(f"cannot teleport to {tuple(p)}")
    return dataclasses.replace(state, pos=p, interaction_counter=state.interaction_counter + 1)


def restart(state: WorldState) -> WorldState:
    return dataclasses.replace(state, pos=Position(*state.map.spawn), clock=0.0, alive=True,
                               noise_draws=0)


class TileWorld:
    """Mutable environment handle around a :class:`WorldState`."""

    def __init__(self, tile_map: TileMap, seed=None, noise=True, sigma=SIGMA_OBS):
        self.map = tile_map
        self.noise = noise
        self.sigma = sigma
        self.state = new_state(tile_map, seed)

    @property
    def pos(self) -> Position:
        return self.state.pos

    @property
    def clock(self) -> float:
        return self.state.clock

    @property
    def alive(self) -> bool:
        return self.state.alive

    @property
    def counter(self) -> int:
        return self.state.interaction_counter

    @property
    def dt(self) -> float:
        return self.map.dt

    def traversable(self, p) -> bool:
        return self.map.traversable(p)

    def step(self, a: Action, dt=None) -> Position:
        self.state = step(self.state, a, dt)
        return self.state.pos

    def render(self, noise=None) -> np.ndarray:
        self.state, frame = render(self.state, self.noise if noise is None else noise, self.sigma)
        return frame

    def teleport(self, p) -> Position:
        self.state = teleport(self.state, p)
        return self.state.pos

    def restart(self) -> Position:
        self.state = restart(self.state)
        return self.state.pos

    def on_goal(self) -> bool:
        return self.map.tile(*self.pos) == TileKind.GOAL
