"""Command-line entry point.

Settings are resolved as defaults < command-line flags < ``--config`` JSON file.
Exit codes: 0 success, 1 task-level failure, 2 usage or IO error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from .agent import run_baseline_sweep, run_mission_algorithm1, run_mission_algorithm2
from .causal import G_PROFILES, CausalConfig, run_causal_experiment
from .control import PController
from .demo import load_demonstration, run_demonstrator, save_demonstration
from .errors import BudgetExhausted, DemonstratorFailed, InfoIntegrateError, NoFeasibleCandidate
from .harness import AGENT_SEED_OFFSET, scaling_experiment, trajectory_svg
from .optimize import SearchSpec
from .world import TileWorld, load_map

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


@dataclass
class RunConfig:
    map: str | None = None
    seed: int | None = None
    sigma: float = 1.5
    radius: float = 2.0
    step: float = 0.5
    n_avg: int = 3
    kp: float = 2.0
    eps_wp: float = 0.3
    time_limit: float = 15.0
    stride: int = 3
    demo_noise_sigma: float = 0.0
    out: str | None = None
    dt_c: float = 0.01
    bin_width: float = 0.25
    hp_sources: tuple = (60.0, 120.0)
    hp_target: float = 90.0
    g_profile: str = "bumpy"

    def __post_init__(self):
        self.hp_sources = tuple(float(h) for h in self.hp_sources)
        for name in ("sigma", "radius", "step", "n_avg", "kp", "eps_wp", "time_limit", "stride",
                     "dt_c", "bin_width", "hp_target"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)!r}")
        if not self.demo_noise_sigma >= 0:
            raise ValueError(f"demo_noise_sigma must be >= 0, got {self.demo_noise_sigma!r}")
        if not self.hp_sources or min(self.hp_sources) <= 0:
            raise ValueError("hp_sources must be a non-empty list of positive values")
        if self.seed is not None and (not isinstance(self.seed, int) or self.seed < 0):
            raise ValueError(f"seed must be a non-negative integer, got {self.seed!r}")
        if self.g_profile not in G_PROFILES:
            raise ValueError(f"unknown g profile {self.g_profile!r}; choose from {sorted(G_PROFILES)}")

    @property
    def search(self) -> SearchSpec:
        return SearchSpec(self.radius, self.step, self.n_avg)

    @property
    def controller(self) -> PController:
        return PController(self.kp, self.eps_wp)


def resolve_config(args) -> RunConfig:
    """Defaults, then flags given on the command line, then the ``--config`` file."""
    fields = {f.name for f in dataclasses.fields(RunConfig)}
    values = {k: v for k, v in vars(args).items() if k in fields and v is not None}
    if getattr(args, "config", None):
        try:
            loaded = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ValueError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ValueError("config file must hold a JSON object")
        unknown = set(loaded) - fields
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        values.update(loaded)
    return RunConfig(**values)


def _common(p, out_help):
    p.add_argument("--config", help="JSON file; its keys override command-line flags")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help=out_help)


def _search_flags(p):
    p.add_argument("--map", help="map file or bundled map name")
    p.add_argument("--sigma", type=float, help="blur sigma (default 1.5)")
    p.add_argument("--radius", type=float, help="search radius R (default 2)")
    p.add_argument("--step", type=float, help="grid step h (default 0.5)")
    p.add_argument("--n-avg", dest="n_avg", type=int, help="renders averaged per candidate (3)")
    p.add_argument("--kp", type=float, help="controller gain (default 2)")
    p.add_argument("--eps-wp", dest="eps_wp", type=float, help="waypoint radius (default 0.3)")
    p.add_argument("--time-limit", dest="time_limit", type=float, help="seconds (default 15)")
    p.add_argument("--stride", type=int, help="demonstrator frame stride (default 3)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="infointegrate", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("record-demo", help="run the scripted demonstrator and save its video")
    _common(p, "demonstration directory")
    _search_flags(p)
    p.add_argument("--demo-noise-sigma", dest="demo_noise_sigma", type=float,
                   help="extra camera noise on the demonstrator only (default 0)")

    p = sub.add_parser("run-mission", help="run an agent on a recorded demonstration")
    _common(p, "output directory for report.json and trajectory.svg")
    _search_flags(p)
    p.add_argument("--demo", required=True, help="demonstration directory")
    p.add_argument("--alg", type=int, choices=(1, 2), default=2)
    p.add_argument("--baseline", action="store_true", help="run the uninformed sweep instead")

    p = sub.add_parser("scaling", help="interaction counts for growing demonstration lengths")
    _common(p, "CSV file (stdout if omitted)")
    _search_flags(p)
    p.add_argument("--sizes", type=int, nargs="*", default=[10, 20, 40])

    p = sub.add_parser("causal", help="two-car mechanism transfer experiment")
    _common(p, "JSON file (stdout if omitted)")
    p.add_argument("--dt-c", dest="dt_c", type=float)
    p.add_argument("--bin-width", dest="bin_width", type=float, help="bin width for y")
    p.add_argument("--hp-sources", dest="hp_sources", type=float, nargs="+")
    p.add_argument("--hp-target", dest="hp_target", type=float)
    p.add_argument("--g-profile", dest="g_profile", choices=sorted(G_PROFILES))
    return parser


def _emit(text, out):
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_record_demo(cfg: RunConfig) -> int:
    if not cfg.map or not cfg.out:
        raise ValueError("record-demo needs --map and --out")
    m = load_map(cfg.map)
    seed = m.seed if cfg.seed is None else cfg.seed
    try:
        demo = run_demonstrator(TileWorld(m, seed=seed), stride=cfg.stride, ctl=cfg.controller,
                                time_limit=cfg.time_limit, demo_noise_sigma=cfg.demo_noise_sigma)
    except DemonstratorFailed as exc:
        print(f"demonstrator failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    save_demonstration(demo, cfg.out)
    print(f"recorded {len(demo)} frames (L={demo.L}) to {cfg.out}")
    return EXIT_OK


def cmd_run_mission(cfg: RunConfig, demo_dir, alg, baseline) -> int:
    if not cfg.out:
        raise ValueError("run-mission needs --out")
    demo = load_demonstration(demo_dir)
    m = load_map(cfg.map or demo.map_id)
    seed = (m.seed if cfg.seed is None else cfg.seed) + AGENT_SEED_OFFSET
    world = TileWorld(m, seed=seed)
    try:
        report = _mission(cfg, world, demo, alg, baseline)
    except (NoFeasibleCandidate, BudgetExhausted) as exc:
        print(f"mission aborted: {exc}", file=sys.stderr)
        return EXIT_FAIL
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(report.to_json())
    (out / "trajectory.svg").write_text(trajectory_svg(report, m))
    print(f"U={report.U} interactions={report.interactions_total}")
    return EXIT_OK if report.success else EXIT_FAIL


def _mission(cfg, world, demo, alg, baseline):
    if baseline:
        report = run_baseline_sweep(world, demo.frames[-1], kern=cfg.sigma)
        report.demo_positions = list(demo.positions)
        return report
    if alg == 1:
        return run_mission_algorithm1(world, demo, cfg.search, cfg.controller, cfg.sigma)
    return run_mission_algorithm2(world, demo, cfg.search, cfg.controller, cfg.time_limit,
                                  cfg.sigma)


def cmd_scaling(cfg: RunConfig, sizes) -> int:
    rows = scaling_experiment(sizes, seed=cfg.seed or 0, spec=cfg.search, ctl=cfg.controller,
                              stride=cfg.stride, sigma=cfg.sigma)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["L", "agent_interactions", "baseline_interactions"])
    for r in rows:
        writer.writerow([r["L"], r["agent_interactions"], r["baseline_interactions"]])
    _emit(buf.getvalue(), cfg.out)
    return EXIT_OK


def cmd_causal(cfg: RunConfig) -> int:
    cc = CausalConfig(hp_sources=cfg.hp_sources, hp_target=cfg.hp_target, dt_c=cfg.dt_c,
                      bin_width=cfg.bin_width, g_profile=cfg.g_profile)
    result = run_causal_experiment(cc)
    result["seed"] = cfg.seed
    _emit(json.dumps(result, indent=1, sort_keys=True) + "\n", cfg.out)
    return EXIT_OK if result["rms_transferred"] < result["rms_naive"] else EXIT_FAIL


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        if args.command == "record-demo":
            return cmd_record_demo(cfg)
        if args.command == "run-mission":
            return cmd_run_mission(cfg, args.demo, args.alg, args.baseline)
        if args.command == "scaling":
            return cmd_scaling(cfg, args.sizes)
        return cmd_causal(cfg)
    except (InfoIntegrateError, OSError, ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
