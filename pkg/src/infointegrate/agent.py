"""Agents that turn another agent's first-person video into their own waypoints.

``run_mission_algorithm2`` is the teleportation variant: infer all waypoints
by local grid search, restart, then track them. ``run_mission_algorithm1``
visits the search candidates by steering instead of teleporting.
``run_baseline_sweep`` ignores the video and sweeps every cell.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator

from .control import FAIL, SUCCESS, PController, control_action, track_waypoints
from .errors import BudgetExhausted, NoFeasibleCandidate
from .optimize import SearchSpec, _standardizer, candidates, grid_search, image_objective
from .vision import average
from .world import Position, TileKind

ALG1_CANDIDATE_BUDGET = 3.0
ALG1_REACH_TOL = 1e-3


@dataclass
class MissionReport:
    algorithm: str
    U: str
    waypoints: list = field(default_factory=list)
    trajectory: list = field(default_factory=list)
    demo_positions: list = field(default_factory=list)
    interactions_inference: int = 0
    interactions_tracking: int = 0
    wall_time: float = 0.0
    map_id: str = ""
    unreachable: list = field(default_factory=list)
    goal_frame_distance: float | None = None

    @property
    def interactions_total(self) -> int:
        return self.interactions_inference + self.interactions_tracking

    @property
    def success(self) -> bool:
        return self.U == SUCCESS

    def waypoint_errors(self):
        """Distance of each inferred waypoint r_i to the demonstrator's q*_i."""
        return [math.dist(r, q) for r, q in zip(self.waypoints, self.demo_positions[1:])]

    def to_dict(self) -> dict:
        # wall_time is left out so serialised reports are reproducible byte for byte
        return {
            "algorithm": self.algorithm,
            "map_id": self.map_id,
            "U": self.U,
            "waypoints": [[p[0], p[1]] for p in self.waypoints],
            "trajectory": [[p[0], p[1]] for p in self.trajectory],
            "demo_positions": [[p[0], p[1]] for p in self.demo_positions],
            "interactions_inference": self.interactions_inference,
            "interactions_tracking": self.interactions_tracking,
            "interactions_total": self.interactions_total,
            "unreachable": [[i, p[0], p[1]] for i, p in self.unreachable],
            "goal_frame_distance": self.goal_frame_distance,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d):
        pos = lambda seq: [Position(*p) for p in seq]  # noqa: E731
        return cls(d["algorithm"], d["U"], pos(d["waypoints"]), pos(d["trajectory"]),
                   pos(d["demo_positions"]), d["interactions_inference"],
                   d["interactions_tracking"], 0.0, d.get("map_id", ""),
                   [(i, Position(x, y)) for i, x, y in d.get("unreachable", [])],
                   d.get("goal_frame_distance"))


def infer_waypoints(world, demo, spec: SearchSpec, kern=1.5):
    """Recover r_1..r_L by local search around the previous waypoint (teleport-based)."""
    r = Position(*world.pos)
    out = []
    for i in range(1, len(demo.frames)):
        objective = image_objective(world, spec, demo.frames[i], kern)
        try:
            r, _, _ = grid_search(r, spec, objective)
        except NoFeasibleCandidate as exc:
            raise NoFeasibleCandidate(f"waypoint {i}: {exc}", index=i) from exc
        out.append(r)
    return out


def run_mission_algorithm2(world, demo, spec=None, ctl=None, time_limit=15.0, kern=1.5):
    spec = spec or SearchSpec()
    ctl = ctl or PController()
    t0 = time.perf_counter()
    c0 = world.counter
    waypoints = infer_waypoints(world, demo, spec, kern)
    c1 = world.counter
    world.restart()
    U, traj = track_waypoints(world, ctl, waypoints, time_limit, goal_check=True)
    return MissionReport("2", U, waypoints, traj, list(demo.positions), c1 - c0,
                         world.counter - c1, time.perf_counter() - t0, demo.map_id)


def _serpentine(center, spec):
    k = spec.half_width
    grid = candidates(center, spec)
    n = 2 * k + 1
    cols = [grid[i * n:(i + 1) * n] for i in range(n)]
    return [p for i, col in enumerate(cols) for p in (col if i % 2 == 0 else col[::-1])]


def _box_has_lava(tile_map, a, b):
    x0, x1 = sorted((a[0], b[0]))
    y0, y1 = sorted((a[1], b[1]))
    tx0, tx1 = max(0, math.floor(x0)), min(tile_map.width - 1, math.floor(x1))
    ty0, ty1 = max(0, math.floor(y0)), min(tile_map.height - 1, math.floor(y1))
    return bool(np.any(tile_map.kinds[ty0:ty1 + 1, tx0:tx1 + 1] == TileKind.LAVA))


def _navigate(world, ctl, target, budget, tol):
    """Steer towards ``target`` until within ``tol``; False if the time budget runs out."""
    n_max = int(round(budget / world.dt))
    for _ in range(n_max):
        if world.pos.distance(target) <= tol:
            return True
        world.step(control_action(ctl, world.pos, target))
        if not world.alive:
            return False
    return world.pos.distance(target) <= tol


def run_mission_algorithm1(world, demo, spec=None, ctl=None, kern=1.5,
                           candidate_budget=ALG1_CANDIDATE_BUDGET, reach_tol=ALG1_REACH_TOL):
    """Single pass without teleportation.

    Every candidate is reached with the controller (serpentine order) and
    observed ``n_avg`` times; the best one becomes the next waypoint and the
    agent steers there. Candidates in lava, behind lava (the box spanned by
    the current position and the candidate touches a lava tile) or not reached
    within ``candidate_budget`` seconds are skipped and listed in the report.
    U is success iff the agent ends alive on the goal tile.
    """
    spec = spec or SearchSpec()
    ctl = ctl or PController()
    standardizer = _standardizer(kern)
    t0 = time.perf_counter()
    c0 = world.counter
    r = Position(*world.pos)
    waypoints, unreachable = [], []
    trajectory = [r]
    for i in range(1, len(demo.frames)):
        target_t = standardizer.transform(demo.frames[i])
        best, best_key = None, None
        for p in _serpentine(r, spec):
            if not world.traversable(p) or _box_has_lava(world.map, world.pos, p):
                continue
            if not _navigate(world, ctl, p, candidate_budget, reach_tol):
                if not world.alive:
                    break
                unreachable.append((i, p))
                continue
            frames = [world.render() for _ in range(spec.n_avg)]
            val = float(np.linalg.norm(standardizer.transform(average(frames)) - target_t))
            key = (val, p.x, p.y)
            if best_key is None or key < best_key:
                best, best_key = p, key
        if not world.alive:
            break
        if best is None:
            raise NoFeasibleCandidate(f"waypoint {i}: no reachable candidate", index=i)
        r = best
        waypoints.append(r)
        _navigate(world, ctl, r, candidate_budget, reach_tol)
        trajectory.append(Position(*world.pos))
        if not world.alive:
            break
    U = SUCCESS if world.alive and world.on_goal() else FAIL
    return MissionReport("1", U, waypoints, trajectory, list(demo.positions),
                         world.counter - c0, 0, time.perf_counter() - t0, demo.map_id, unreachable)


def sweep_order(tile_map):
    """Traversable tile centres, row by row with alternating direction."""
    out = []
    for y in range(tile_map.height):
        xs = range(tile_map.width) if y % 2 == 0 else range(tile_map.width - 1, -1, -1)
        out.extend(Position(x + 0.5, y + 0.5) for x in xs
                   if tile_map.traversable((x + 0.5, y + 0.5)))
    return out


def run_baseline_sweep(world, goal_frame=None, time_limit_interactions=10**6, kern=1.5):
    """Uninformed agent: teleport to and look at every cell until standing on the goal."""
    t0 = time.perf_counter()
    c0 = world.counter
    trajectory = []
    standardizer = _standardizer(kern) if goal_frame is not None else None
    for p in sweep_order(world.map):
        if world.counter - c0 + 2 > time_limit_interactions:
            raise BudgetExhausted(f"sweep budget of {time_limit_interactions} interactions used up")
        world.teleport(p)
        frame = world.render()
        trajectory.append(p)
        if world.on_goal():
            report = MissionReport("baseline", SUCCESS, [], trajectory, [], world.counter - c0, 0,
                                   time.perf_counter() - t0, world.map.name)
            if standardizer is not None:
                report.goal_frame_distance = standardizer.distance(frame, goal_frame)
            return report
    return MissionReport("baseline", FAIL, [], trajectory, [], world.counter - c0, 0,
                         time.perf_counter() - t0, world.map.name)


class VideoAgent(BaseEstimator):
    """Estimator-style wrapper: ``fit(demo, world)`` runs a full mission.

    After fitting, ``report_`` holds the :class:`MissionReport` and
    ``waypoints_`` the inferred waypoints.
    """

    def __init__(self, algorithm=2, sigma=1.5, radius=2.0, step=0.5, n_avg=3, kp=2.0,
                 eps_wp=0.3, time_limit=15.0):
        self.algorithm = algorithm
        self.sigma = sigma
        self.radius = radius
        self.step = step
        self.n_avg = n_avg
        self.kp = kp
        self.eps_wp = eps_wp
        self.time_limit = time_limit

    def fit(self, demo, world):
        spec = SearchSpec(self.radius, self.step, self.n_avg)
        ctl = PController(self.kp, self.eps_wp)
        if self.algorithm == 2:
            self.report_ = run_mission_algorithm2(world, demo, spec, ctl, self.time_limit, self.sigma)
        elif self.algorithm == 1:
            self.report_ = run_mission_algorithm1(world, demo, spec, ctl, self.sigma)
        else:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        self.waypoints_ = self.report_.waypoints
        return self

    def score(self, demo, world):
        """1.0 if the mission succeeds on ``world``, else 0.0."""
        return float(self.fit(demo, world).report_.success)
