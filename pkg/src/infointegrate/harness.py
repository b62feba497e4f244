"""Experiment drivers: bundled missions, the scaling sweep and the averaging study."""

from __future__ import annotations

import math

import numpy as np

from .agent import (infer_waypoints, run_baseline_sweep, run_mission_algorithm1,
                    run_mission_algorithm2)
from .control import PController
from .demo import run_demonstrator
from .optimize import SearchSpec
from .world import TileWorld, load_map, parse_map

AGENT_SEED_OFFSET = 1000


def run_bundled_mission(name_or_map, seed=None, algorithm=2, spec=None, ctl=None, stride=3,
                        sigma=1.5, time_limit=15.0, demo=None):
    """Record a demonstration on a map and run one agent on it; returns (demo, report)."""
    m = load_map(name_or_map) if isinstance(name_or_map, str) else name_or_map
    seed = m.seed if seed is None else seed
    spec = spec or SearchSpec()
    ctl = ctl or PController()
    if demo is None:
        demo = run_demonstrator(TileWorld(m, seed=seed), stride=stride, ctl=ctl,
                                time_limit=time_limit)
    world = TileWorld(m, seed=seed + AGENT_SEED_OFFSET)
    if algorithm == 2:
        report = run_mission_algorithm2(world, demo, spec, ctl, time_limit, sigma)
    elif algorithm == 1:
        report = run_mission_algorithm1(world, demo, spec, ctl, sigma)
    elif algorithm == "baseline":
        report = run_baseline_sweep(world, demo.frames[-1], kern=sigma)
    else:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    return demo, report


def scaling_map(target_L, stride=3, s_max=4.0, dt=0.1, seed=0):
    """Open square room whose L-shaped demonstrator route yields roughly ``target_L`` frames.

    The route runs up the west side and along the far row; the goal sits next
    to the far corner, which the row-by-row sweep reaches last.
    """
    per_frame = stride * s_max * dt
    n = max(7, math.ceil((per_frame * target_L + 7) / 2))
    if (n - 2) % 2:
        n += 1
    rows = []
    for y in range(n):
        if y in (0, n - 1):
            rows.append("#" * n)
            continue
        row = ["#"] + ["."] * (n - 2) + ["#"]
        if y == 1:
            row[1] = "S"
        if y == n - 2:
            row[n - 3] = "G"
        rows.append("".join(row))
    path = f"path 1.5 {n - 1.5} {n - 2.5} {n - 1.5}"
    text = f"{n} {n} {s_max:g} {dt:g} {seed}\n" + "\n".join(rows) + "\n" + path + "\n"
    return parse_map(text, name=f"scaling{target_L}")


def scaling_experiment(sizes, seed=0, spec=None, ctl=None, stride=3, sigma=1.5):
    """Rows of (L, agent interactions, baseline interactions, map side, agent U)."""
    spec = spec or SearchSpec()
    ctl = ctl or PController()
    rows = []
    for target in sizes:
        m = scaling_map(target, stride, seed=seed)
        budget = 2 * 2 * m.width / m.s_max + 5.0
        demo = run_demonstrator(TileWorld(m, seed=seed), stride=stride, ctl=ctl, time_limit=budget)
        agent = run_mission_algorithm2(TileWorld(m, seed=seed + AGENT_SEED_OFFSET), demo, spec,
                                       ctl, budget, sigma)
        base = run_baseline_sweep(TileWorld(m, seed=seed + AGENT_SEED_OFFSET), demo.frames[-1],
                                  kern=sigma)
        rows.append({"L": demo.L, "agent_interactions": agent.interactions_total,
                     "baseline_interactions": base.interactions_total, "map_side": m.width,
                     "agent_U": agent.U})
    return rows


def loglog_slope(xs, ys) -> float:
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


def averaging_experiment(n_runs=20, map_name="fogroom", n_avg_values=(1, 3), spec=None,
                         sigma=1.5, stride=3):
    """Waypoint error rate (fraction of r_i more than h from q*_i) per ``n_avg``."""
    spec = spec or SearchSpec()
    m = load_map(map_name)
    wrong = {n: 0 for n in n_avg_values}
    total = 0
    for run in range(n_runs):
        demo = run_demonstrator(TileWorld(m, seed=run), stride=stride)
        total += demo.L
        for n in n_avg_values:
            s = SearchSpec(spec.radius, spec.step, n)
            wps = infer_waypoints(TileWorld(m, seed=run + AGENT_SEED_OFFSET), demo, s, sigma)
            wrong[n] += sum(math.dist(r, q) > s.step for r, q in zip(wps, demo.positions[1:]))
    return {n: wrong[n] / total for n in n_avg_values}


TILE_PX = 20
_TILE_FILL = {1: "#555555", 2: "#d2501e", 3: "#c8c8e6", 4: "#50b450"}


def _polyline(points, colour, dash=None):
    pts = " ".join(f"{p[0] * TILE_PX:.2f},{p[1] * TILE_PX:.2f}" for p in points)
    extra = f' stroke-dasharray="{dash}"' if dash else ""
    return (f'<polyline points="{pts}" fill="none" stroke="{colour}" stroke-width="2"'
            f'{extra}/>')


def trajectory_svg(report, tile_map) -> str:
    """Top-down overlay: demonstrator blue dashed, agent red solid, waypoints as dots."""
    w, h = tile_map.width * TILE_PX, tile_map.height * TILE_PX
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
           f'viewBox="0 0 {w} {h}">', f'<rect width="{w}" height="{h}" fill="#ffffff"/>']
    for y in range(tile_map.height):
        for x in range(tile_map.width):
            fill = _TILE_FILL.get(int(tile_map.kinds[y, x]))
            if fill:
                out.append(f'<rect x="{x * TILE_PX}" y="{y * TILE_PX}" width="{TILE_PX}" '
                           f'height="{TILE_PX}" fill="{fill}"/>')
    if len(report.demo_positions) > 1:
        out.append(_polyline(report.demo_positions, "blue", "6,4"))
    if len(report.trajectory) > 1:
        out.append(_polyline(report.trajectory, "red"))
    for p in report.waypoints:
        out.append(f'<circle cx="{p[0] * TILE_PX:.2f}" cy="{p[1] * TILE_PX:.2f}" r="2.5" '
                   f'fill="red"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
