"""Proportional position controller and the waypoint-tracking loop."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .world import Action, Position

SUCCESS = "success"
FAIL = "fail"


@dataclass(frozen=True)
class PController:
    kp: float = 2.0
    eps_wp: float = 0.3

    def __post_init__(self):
        if self.kp <= 0 or self.eps_wp <= 0:
            raise ValueError("kp and eps_wp must be positive")

    def __call__(self, current, target) -> Action:
        return control_action(self, current, target)


def control_action(ctl: PController, current, target) -> Action:
    """``clip(kp * (target - current))`` mapped to (forward, strafe)."""
    ax = np.clip(ctl.kp * (target[0] - current[0]), -1.0, 1.0)
    ay = np.clip(ctl.kp * (target[1] - current[1]), -1.0, 1.0)
    return Action(float(ax), float(ay))


def track_waypoints(world, ctl: PController, waypoints, time_limit=15.0, goal_check=False):
    """Steer through ``waypoints`` in order; returns ``(U, trajectory)``.

    A waypoint counts as reached once the agent is within ``ctl.eps_wp`` of
    it. Without ``goal_check``, U is success iff the last waypoint is reached
    alive within ``time_limit``. With ``goal_check`` the loop also ends as soon
    as the agent stands on the goal tile, and finishing the waypoints anywhere
    else is a failure.
    """
    trajectory = [Position(*world.pos)]
    i = 0
    while i < len(waypoints):
        if goal_check and world.on_goal():
            return SUCCESS, trajectory
        if world.pos.distance(waypoints[i]) <= ctl.eps_wp:
            i += 1
            continue
        if world.clock + 1e-9 >= time_limit:
            return FAIL, trajectory
        world.step(control_action(ctl, world.pos, waypoints[i]))
        trajectory.append(Position(*world.pos))
        if not world.alive:
            return FAIL, trajectory
    if world.clock > time_limit + 1e-9:
        return FAIL, trajectory
    if goal_check and not world.on_goal():
        return FAIL, trajectory
    return SUCCESS, trajectory
