"""Integrating another agent's information: video-to-waypoint agents and causal mechanism transfer."""

from .agent import (MissionReport, VideoAgent, run_baseline_sweep, run_mission_algorithm1,
                    run_mission_algorithm2)
from .causal import (CausalModel, MechanismTransfer, build_diagram, do_intervene, infer_g,
                     parse_description, predict_accel, simulate_car, transfer_control)
from .control import PController, track_waypoints
from .demo import Demonstration, load_demonstration, run_demonstrator, save_demonstration
from .optimize import SearchSpec, grid_search
from .vision import BlurredStandardizer, blur, dist, gaussian_kernel, normalize
from .world import Action, Position, TileMap, TileWorld, load_map, parse_map

__version__ = "0.1.0"

__all__ = [
    "Action", "BlurredStandardizer", "CausalModel", "Demonstration", "MechanismTransfer",
    "MissionReport", "PController", "Position", "SearchSpec", "TileMap", "TileWorld",
    "VideoAgent", "blur", "build_diagram", "dist", "do_intervene", "gaussian_kernel",
    "grid_search", "infer_g", "load_demonstration", "load_map", "normalize", "parse_description",
    "parse_map", "predict_accel", "run_baseline_sweep", "run_demonstrator",
    "run_mission_algorithm1", "run_mission_algorithm2", "save_demonstration", "simulate_car",
    "track_waypoints", "transfer_control",
]
