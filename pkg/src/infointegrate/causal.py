"""Mechanism transfer between cars with different engines.

Each car obeys ``F = f_F(u, hp) = hp * u`` and ``ydd = (F + G) / m`` with a
position-dependent environment force ``G = f_G(y)`` shared by all cars.
Because ``hp`` only enters through ``F``, the learned table for ``f_G`` can be
reused by a car that never drove the road itself.
"""

from __future__ import annotations

import csv
import dataclasses
import math
from dataclasses import dataclass, field

import networkx as nx
import numpy as np
from sklearn.base import BaseEstimator

from .errors import ContradictoryIndependence, CyclicDescription, LogTooShort, UnknownVariable

DEFAULT_DESCRIPTION = """\
mech F <- u hp : known f_F
mech ydd <- F G : known newton
mech G <- y : unknown
indep G hp
const m 1.0
"""

KNOWN_MECHANISMS = {
    "f_F": lambda u, hp: hp * u,
    "newton": lambda F, G, m: (F + G) / m,
}

G_PROFILES = {
    "bumpy": lambda y: -2.0 + 1.5 * np.sin(0.8 * np.asarray(y, dtype=float)),
    "constant": lambda y: np.full(np.shape(y), -2.0),
    "zero": lambda y: np.zeros(np.shape(y)),
}


@dataclass(frozen=True)
class HardwareSpec:
    hp: float

    def __post_init__(self):
        if not self.hp > 0:
            raise ValueError("hp must be positive")


@dataclass(frozen=True)
class MechanismDecl:
    output: str
    inputs: tuple
    form: str = "unknown"  # "unknown" or "known:<formula id>"

    @property
    def known(self) -> bool:
        return self.form.startswith("known")

    @property
    def formula(self):
        return self.form.split(":", 1)[1] if self.known else None


@dataclass(frozen=True)
class Description:
    mechanisms: tuple = ()
    independences: tuple = ()
    constants: dict = field(default_factory=dict)

    def __post_init__(self):
        outputs = [d.output for d in self.mechanisms]
        dup = {o for o in outputs if outputs.count(o) > 1}
        if dup:
            raise ValueError(f"variables declared as output twice: {sorted(dup)}")

    @property
    def variables(self):
        seen = []
        for d in self.mechanisms:
            for v in (*d.inputs, d.output):
                if v not in seen:
                    seen.append(v)
        for a, b in self.independences:
            for v in (a, b):
                if v not in seen:
                    seen.append(v)
        return seen


def parse_description(text: str) -> Description:
    """Parse lines like ``mech F <- u hp : known f_F``, ``indep G hp``, ``const m 1.0``."""
    mechs, indeps, consts = [], [], {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, *rest = line.split()
        if head == "mech":
            lhs, _, rhs = line[len("mech"):].partition("<-")
            inputs, _, form = rhs.partition(":")
            form = form.split()
            if not lhs.strip() or not form or form[0] not in ("known", "unknown"):
                raise ValueError(f"line {lineno}: bad mechanism {raw!r}")
            form = "unknown" if form[0] == "unknown" else f"known:{form[1]}"
            mechs.append(MechanismDecl(lhs.strip(), tuple(inputs.split()), form))
        elif head == "indep" and len(rest) == 2:
            indeps.append((rest[0], rest[1]))
        elif head == "const" and len(rest) == 2:
            consts[rest[0]] = float(rest[1])
        else:
            raise ValueError(f"line {lineno}: cannot parse {raw!r}")
    return Description(tuple(mechs), tuple(indeps), consts)


def build_diagram(d: Description) -> nx.DiGraph:
    """DAG with an edge ``input -> output`` for every mechanism input."""
    parents = {m.output: set(m.inputs) for m in d.mechanisms}
    for var, other in d.independences:
        if other in parents.get(var, ()):
            raise ContradictoryIndependence(f"{var} is declared independent of its input {other}")
    g = nx.DiGraph()
    g.add_nodes_from(d.variables)
    for m in d.mechanisms:
        g.add_edges_from((i, m.output) for i in m.inputs)
    if not nx.is_directed_acyclic_graph(g):
        raise CyclicDescription(f"description implies a cycle: {nx.find_cycle(g)}")
    return g


# ---------------------------------------------------------------------------
# experience


@dataclass
class ExperienceLog:
    t: np.ndarray
    u: np.ndarray
    y: np.ndarray
    dt: float

    def __len__(self):
        return len(self.t)


def simulate_car(spec: HardwareSpec, g_true, policy, steps, dt_c=0.01, y0=0.0, v0=0.0, m=1.0):
    """Semi-implicit Euler ground truth; only (t, u, y) are logged."""
    if dt_c <= 0:
        raise ValueError("dt_c must be positive")
    t = np.arange(steps)
    u = np.empty(steps)
    y = np.empty(steps)
    pos, vel = float(y0), float(v0)
    for k in range(steps):
        uk = float(np.clip(policy(k * dt_c), -1.0, 1.0))
        u[k], y[k] = uk, pos
        acc = (spec.hp * uk + float(g_true(pos))) / m
        vel += acc * dt_c
        pos += vel * dt_c
    return ExperienceLog(t, u, y, dt_c)


def write_log_csv(log: ExperienceLog, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "u", "y"])
        for row in zip(log.t.tolist(), log.u.tolist(), log.y.tolist()):
            w.writerow([row[0], repr(row[1]), repr(row[2])])


def read_log_csv(path, dt_c=0.01) -> ExperienceLog:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return ExperienceLog(np.array([int(r["t"]) for r in rows]),
                         np.array([float(r["u"]) for r in rows]),
                         np.array([float(r["y"]) for r in rows]), dt_c)


# ---------------------------------------------------------------------------
# causal model


@dataclass
class CausalModel:
    diagram: nx.DiGraph
    description: Description
    mass: float = 1.0
    bin_width: float = 0.25
    table: dict = field(default_factory=dict)  # bin index -> (mean force, sample count)
    fixed: dict = field(default_factory=dict)

    @classmethod
    def from_description(cls, d: Description, bin_width=0.25):
        return cls(build_diagram(d), d, d.constants.get("m", 1.0), bin_width)

    def bin(self, y) -> int:
        return math.floor(y / self.bin_width)

    def covered(self, y) -> bool:
        return self.bin(y) in self.table

    def g_hat(self, y):
        """Learned environment force at ``y``, or None outside visited bins."""
        entry = self.table.get(self.bin(y))
        return None if entry is None else entry[0]

    def mechanism(self, var):
        for decl in self.description.mechanisms:
            if decl.output == var:
                return decl
        raise UnknownVariable(var)


def _samples(model: CausalModel, spec: HardwareSpec, log: ExperienceLog):
    if len(log) < 3:
        raise LogTooShort(f"need at least 3 records, got {len(log)}")
    f_F = KNOWN_MECHANISMS[model.mechanism("F").formula]
    y, u = np.asarray(log.y, float), np.asarray(log.u, float)
    ydd = (y[2:] - 2 * y[1:-1] + y[:-2]) / log.dt ** 2
    force = model.mass * ydd - f_F(u[1:-1], spec.hp)
    bins = np.floor(y[1:-1] / model.bin_width).astype(np.int64)
    return bins, force


def infer_g(model: CausalModel, logs) -> CausalModel:
    """Pool ``m * ydd - f_F(u, hp)`` samples from all cars into per-bin means."""
    pairs = [_samples(model, spec, log) for spec, log in logs]
    if not pairs:
        return dataclasses.replace(model, table={})
    bins = np.concatenate([b for b, _ in pairs])
    force = np.concatenate([f for _, f in pairs])
    # sort by (bin, value) so the sums do not depend on the order of logs or records
    order = np.lexsort((force, bins))
    bins, force = bins[order], force[order]
    keys, starts, counts = np.unique(bins, return_index=True, return_counts=True)
    sums = np.add.reduceat(force, starts)
    table = {int(k): (float(s / c), int(c)) for k, s, c in zip(keys, sums, counts)}
    return dataclasses.replace(model, table=table)


def predict_accel(model: CausalModel, u, y, spec_j: HardwareSpec):
    """Acceleration of car ``j`` under ``do(u)`` at ``y``; None if ``y`` was never visited."""
    g = model.g_hat(y)
    if g is None:
        return None
    u = model.fixed.get("u", u)
    f_F = KNOWN_MECHANISMS[model.mechanism("F").formula]
    newton = KNOWN_MECHANISMS[model.mechanism("ydd").formula]
    F = model.fixed.get("F", f_F(u, model.fixed.get("hp", spec_j.hp)))
    return float(newton(F, model.fixed.get("G", g), model.mass))


def do_intervene(model: CausalModel, assignments) -> CausalModel:
    """Post-interventional model: cut edges into assigned variables and fix their values."""
    for var in assignments:
        if var not in model.diagram:
            raise UnknownVariable(var)
    g = model.diagram.copy()
    for var in assignments:
        g.remove_edges_from(list(g.in_edges(var)))
    return dataclasses.replace(model, diagram=g, fixed={**model.fixed, **assignments})


def for_agent(model: CausalModel, spec_j: HardwareSpec) -> CausalModel:
    """The model's implication for one car: its hardware slot set to ``spec_j.hp``."""
    return do_intervene(model, {"hp": spec_j.hp})


@dataclass
class TrackingResult:
    t: np.ndarray
    y: np.ndarray
    y_ref: np.ndarray
    u: np.ndarray
    rms: float
    uncovered_steps: int


def transfer_control(model, spec_j: HardwareSpec, ref, fallback_gain, steps, dt_c, g_true,
                     y0=None, v0=0.0, mass=1.0):
    """Track ``ref(t) -> (y_ref, a_ref)`` with learned feedforward plus position feedback.

    ``u = clip((m * a_ref - g_hat(y)) / hp + k_fb * (y_ref - y))``. In bins the
    model has not seen, the feedforward term is dropped. ``model=None`` is the
    naive controller that assumes ``g_hat = 0`` everywhere.
    """
    m = model.mass if model is not None else mass
    t = np.arange(steps) * dt_c
    ys, refs, us = np.empty(steps), np.empty(steps), np.empty(steps)
    pos = ref(0.0)[0] if y0 is None else float(y0)
    vel = float(v0)
    uncovered = 0
    for k in range(steps):
        y_ref, a_ref = ref(t[k])
        g_hat = 0.0 if model is None else model.g_hat(pos)
        fb = fallback_gain * (y_ref - pos)
        if g_hat is None:
            uncovered += 1
            uk = fb
        else:
            uk = (m * a_ref - g_hat) / spec_j.hp + fb
        uk = float(np.clip(uk, -1.0, 1.0))
        ys[k], refs[k], us[k] = pos, y_ref, uk
        vel += (spec_j.hp * uk + float(g_true(pos))) / m * dt_c
        pos += vel * dt_c
    rms = float(np.sqrt(np.mean((ys - refs) ** 2)))
    return TrackingResult(t, ys, refs, us, rms, uncovered)


class MechanismTransfer(BaseEstimator):
    """Learn the shared environment mechanism from several cars and predict for a new one.

    ``fit`` takes a list of ``(HardwareSpec, ExperienceLog)`` pairs. ``predict``
    takes rows ``(u, y, hp)`` and returns accelerations, NaN outside the
    visited bins.
    """

    def __init__(self, bin_width=0.25, description=DEFAULT_DESCRIPTION):
        self.bin_width = bin_width
        self.description = description

    def fit(self, logs, y=None):
        model = CausalModel.from_description(parse_description(self.description), self.bin_width)
        self.model_ = infer_g(model, logs)
        return self

    def predict(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        out = np.full(len(X), np.nan)
        for i, (u, y, hp) in enumerate(X):
            a = predict_accel(self.model_, u, y, HardwareSpec(hp))
            if a is not None:
                out[i] = a
        return out

    def g_table(self):
        return {k: v[0] for k, v in sorted(self.model_.table.items())}


# ---------------------------------------------------------------------------
# end-to-end toy experiment


def reference_trajectory(y0=2.0, speed=1.5):
    """``y_ref = y0 + speed * (t - sin t)``; starts at rest."""
    def ref(t):
        return y0 + speed * (t - math.sin(t)), speed * math.sin(t)
    return ref


def force_policy(hp, base, amp, freq):
    """Open-loop command producing the engine force ``base + amp * sin(freq t)`` for any ``hp``."""
    return lambda t: (base + amp * math.sin(freq * t)) / hp


@dataclass
class CausalConfig:
    hp_sources: tuple = (60.0, 120.0)
    hp_target: float = 90.0
    mass: float = 1.0
    dt_c: float = 0.01
    bin_width: float = 0.25
    g_profile: str = "bumpy"
    source_starts: tuple = (0.0, 10.0)
    source_seconds: float = 10.0
    ref_start: float = 2.0
    ref_seconds: float = 20.0
    feedback_gain: float = 0.05


def run_causal_experiment(cfg: CausalConfig | None = None) -> dict:
    """Two source cars, one target car; returns the numbers the toy scenario is judged on."""
    cfg = cfg or CausalConfig()
    g_true = G_PROFILES[cfg.g_profile]
    steps = int(round(cfg.source_seconds / cfg.dt_c))
    forces = [(3.0, 1.0, 0.5), (2.5, 1.2, 0.7)]

    def source_logs(hps):
        return [(HardwareSpec(hp), simulate_car(HardwareSpec(hp), g_true,
                                                force_policy(hp, *forces[k % 2]), steps, cfg.dt_c,
                                                y0=cfg.source_starts[k % len(cfg.source_starts)],
                                                m=cfg.mass))
                for k, hp in enumerate(hps)]

    desc = DEFAULT_DESCRIPTION.replace("const m 1.0", f"const m {cfg.mass!r}")
    est = MechanismTransfer(cfg.bin_width, desc)
    logs = source_logs(cfg.hp_sources)
    model = est.fit(logs).model_
    keys = np.array(sorted(model.table))
    g_hat = np.array([model.table[k][0] for k in keys])
    centers = (keys + 0.5) * cfg.bin_width
    g_c = g_true(centers)
    rel_err = float(np.linalg.norm(g_hat - g_c) / np.linalg.norm(g_c))

    # per-car estimates on the bins both cars visited
    per_car = [infer_g(model, [lg]).table for lg in logs]
    shared = sorted(set(per_car[0]).intersection(*per_car[1:])) if len(per_car) > 1 else []
    if shared:
        a = np.array([per_car[0][k][0] for k in shared])
        b = np.array([per_car[1][k][0] for k in shared])
        agreement = float(np.linalg.norm(a - b) / np.linalg.norm(a))
    else:
        agreement = float("nan")

    swapped = est.__class__(cfg.bin_width, desc).fit(source_logs(cfg.hp_sources[::-1])).model_
    same_bins = set(swapped.table) == set(model.table)
    swap_diff = (max(abs(swapped.table[k][0] - model.table[k][0]) for k in model.table)
                 if same_bins else float("inf"))

    # prediction for the never-driven target car at every position a source car visited,
    # commanded to produce the same engine force that source car used there
    target = HardwareSpec(cfg.hp_target)
    num = den = 0.0
    for spec, lg in logs:
        u = spec.hp * lg.u / target.hp
        pred = est.predict(np.column_stack([u, lg.y, np.full(len(u), target.hp)]))
        truth = (target.hp * u + g_true(lg.y)) / cfg.mass
        ok = ~np.isnan(pred)
        num += float(np.sum((pred[ok] - truth[ok]) ** 2))
        den += float(np.sum(truth[ok] ** 2))
    pred_rel = math.sqrt(num / den) if den > 0 else float("nan")

    # coverage audit: a sweep well beyond the visited range must never extrapolate
    sweep = np.arange(-20.0, 120.0, cfg.bin_width / 4)
    answered_outside = sum(predict_accel(model, 0.0, y, target) is not None
                           for y in sweep if model.bin(y) not in model.table)

    ref = reference_trajectory(cfg.ref_start)
    ref_steps = int(round(cfg.ref_seconds / cfg.dt_c))
    n_uncovered = sum(not model.covered(ref(k * cfg.dt_c)[0]) for k in range(ref_steps))

    transferred = transfer_control(model, target, ref, cfg.feedback_gain, ref_steps, cfg.dt_c,
                                   g_true)
    naive = transfer_control(None, target, ref, cfg.feedback_gain, ref_steps, cfg.dt_c, g_true,
                             mass=cfg.mass)
    return {
        "bins_covered": len(model.table),
        "g_rel_l2_error": rel_err,
        "per_car_shared_bins": len(shared),
        "per_car_rel_disagreement": agreement,
        "hp_swap_max_table_change": swap_diff,
        "prediction_rel_l2_error": pred_rel,
        "coverage_sweep_queries": len(sweep),
        "coverage_sweep_uncovered": int(sum(not model.covered(y) for y in sweep)),
        "silent_extrapolations": int(answered_outside),
        "reference_uncovered_queries": n_uncovered,
        "rms_transferred": transferred.rms,
        "rms_naive": naive.rms,
        "rms_ratio": transferred.rms / naive.rms,
        "uncovered_control_steps": transferred.uncovered_steps,
    }
