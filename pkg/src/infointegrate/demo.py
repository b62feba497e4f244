"""Scripted demonstrator and demonstration (de)serialisation."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .control import PController, control_action
from .errors import CorruptDemo, DemonstratorFailed
from .vision import quantize, read_pgm, write_pgm
from .world import Action, Position, TileKind

META_FILE = "meta.jsonl"


@dataclass
class Demonstration:
    """Demonstrator video ``frames`` with the withheld ground-truth ``positions``."""

    frames: list
    positions: list
    stride: int = 3
    map_id: str = ""

    def __post_init__(self):
        if len(self.frames) != len(self.positions) or not self.frames:
            raise ValueError("frames and positions must be non-empty and aligned")

    def __len__(self):
        return len(self.frames)

    @property
    def L(self) -> int:
        return len(self.frames) - 1

    def __eq__(self, other):
        if not isinstance(other, Demonstration):
            return NotImplemented
        return (self.stride == other.stride and self.map_id == other.map_id
                and [tuple(p) for p in self.positions] == [tuple(p) for p in other.positions]
                and all(np.array_equal(a, b) for a, b in zip(self.frames, other.frames)))


def _unit_disk(a: Action) -> Action:
    n = math.hypot(a.forward, a.strafe)
    return a if n <= 1.0 else Action(a.forward / n, a.strafe / n)


def run_demonstrator(world, path=None, stride=3, ctl=None, time_limit=15.0,
                     demo_noise_sigma=0.0) -> Demonstration:
    """Drive ``world`` through ``path`` and record every ``stride``-th (position, frame).

    Actions are rescaled onto the unit disk so one control step never covers
    more than ``s_max * dt``. Frames are quantised to 8 bits, as a camera
    would deliver them. The run ends once the agent is within ``eps_wp`` of the
    final path point, which must lie on the goal tile.
    """
    ctl = ctl or PController()
    path = list(world.map.path if path is None else path)
    if stride < 1:
        raise ValueError("stride must be >= 1")
    if not path:
        raise DemonstratorFailed("empty demonstrator path")
    if world.map.tile(*path[-1]) != TileKind.GOAL:
        raise DemonstratorFailed("demonstrator path must end on the goal tile")
    extra_rng = np.random.default_rng([world.state.rng_seed, 7])

    def snap():
        f = world.render()
        if demo_noise_sigma > 0:
            f = np.clip(f + extra_rng.normal(0.0, demo_noise_sigma, f.shape), 0.0, 1.0)
        frames.append(quantize(f))
        positions.append(Position(*world.pos))

    frames, positions = [], []
    snap()
    j, n_steps = 0, 0
    while True:
        target = path[j]
        if world.pos.distance(target) <= ctl.eps_wp:
            if j == len(path) - 1:
                break
            j += 1
            continue
        if world.clock + 1e-9 >= time_limit:
            raise DemonstratorFailed(f"demonstrator did not finish within {time_limit} s")
        world.step(_unit_disk(control_action(ctl, world.pos, target)))
        n_steps += 1
        if not world.alive:
            raise DemonstratorFailed(f"demonstrator died at {tuple(world.pos)}")
        if n_steps % stride == 0:
            snap()
    if n_steps % stride != 0:
        snap()
    return Demonstration(frames, positions, stride, world.map.name)


def save_demonstration(demo: Demonstration, directory) -> Path:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    lines = [json.dumps({"meta": True, "map_id": demo.map_id, "stride": demo.stride,
                         "n": len(demo)}, sort_keys=True)]
    for i, (p, f) in enumerate(zip(demo.positions, demo.frames)):
        name = f"frame_{i:05d}.pgm"
        write_pgm(d / name, f)
        lines.append(json.dumps({"i": i, "x": p[0], "y": p[1], "frame_file": name}, sort_keys=True))
    (d / META_FILE).write_text("\n".join(lines) + "\n")
    return d


def load_demonstration(directory) -> Demonstration:
    d = Path(directory)
    meta_path = d / META_FILE
    if not meta_path.is_file():
        raise CorruptDemo(f"{d}: missing {META_FILE}")
    try:
        records = [json.loads(ln) for ln in meta_path.read_text().splitlines() if ln.strip()]
    except json.JSONDecodeError as exc:
        raise CorruptDemo(f"{meta_path}: {exc}") from exc
    header = {"map_id": "", "stride": 1, "n": None}
    if records and records[0].get("meta"):
        header.update(records.pop(0))
    if not records:
        raise CorruptDemo(f"{d}: no frames recorded")
    if header["n"] is not None and header["n"] != len(records):
        raise CorruptDemo(f"{d}: header says {header['n']} frames, found {len(records)}")
    frames, positions = [], []
    for k, rec in enumerate(records):
        if rec.get("i") != k:
            raise CorruptDemo(f"{d}: record {k} has index {rec.get('i')}")
        try:
            frames.append(read_pgm(d / rec["frame_file"]))
        except (OSError, ValueError, KeyError) as exc:
            raise CorruptDemo(f"{d}: unreadable frame for record {k}: {exc}") from exc
        positions.append(Position(float(rec["x"]), float(rec["y"])))
    return Demonstration(frames, positions, int(header["stride"]), str(header["map_id"]))
