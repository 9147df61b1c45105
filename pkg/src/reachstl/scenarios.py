"""Synthetic driving scenarios: desk-scale parking and roundabout analogs.

A planar kinematic unicycle x(k+1) = x(k) + dt v [cos th, sin th] + w(k)
supplies training data and reference drives. The default analysis mode is
single-step: at every step the reachable set is recomputed from the
measured reference state, constrained by the scheduled strips, and audited
against sampled, side-information-consistent successors. An open-loop mode
chains the recursion over the horizon instead.
"""

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import constrain as cn
from . import reach as rc
from . import stl
from .errors import ConfigError, DataError
from .plots import set_polygon, write_step_svg
from .setalg import (
    MEMBERSHIP_TOL,
    Zonotope,
    contains_points,
    is_empty,
    lift,
    to_dict,
    volume,
)

EMPTY_SET_DIAGNOSTIC = "side information inconsistent with data-driven set"


def worker_count():
    """Worker cap from REACHSTL_THREADS (default 1; results seed-stable)."""
    try:
        return max(1, int(os.environ.get("REACHSTL_THREADS", "1")))
    except ValueError:
        return 1


class SyntheticSystem:
    """Discrete-time kinematic unicycle over planar position."""

    def __init__(self, dt, speed_range, heading_range, noise_zonotope,
                 truth_noise_scale=1.0):
        self.dt = float(dt)
        self.speed_range = (float(speed_range[0]), float(speed_range[1]))
        self.heading_range = (float(heading_range[0]), float(heading_range[1]))
        self.noise_zonotope = noise_zonotope
        # actual simulation noise is uniform inside truth_noise_scale * Z_w;
        # the reachability pipeline always uses the full bound Z_w
        self.truth_noise_scale = float(truth_noise_scale)
        if not 0.0 <= self.truth_noise_scale <= 1.0:
            raise ConfigError("truth_noise_scale must be in [0, 1]")

    def motion(self, x, u):
        v, th = u[0], u[1]
        return np.array([
            x[0] + self.dt * v * math.cos(th),
            x[1] + self.dt * v * math.sin(th),
        ])

    def sample_noise(self, n, rng, full=False):
        scale = 1.0 if full else self.truth_noise_scale
        z = self.noise_zonotope
        B = rng.uniform(-1.0, 1.0, size=(n, z.order))
        return z.center + scale * (B @ z.generators.T)

    def step(self, x, u, rng):
        return self.motion(x, u) + self.sample_noise(1, rng)[0]


def generate_dataset(system, points, seed, segment_length=5, start_box=None):
    """Seeded trajectory data: short excitation segments, random inputs."""
    if points < 2:
        raise ConfigError("points must be >= 2")
    rng = np.random.default_rng(seed)
    if start_box is None:
        start_box = [(-3.0, 3.0), (-3.0, 3.0)]
    segs = []
    made = 0
    while made < points:
        x = np.array([rng.uniform(lo, hi) for lo, hi in start_box])
        states = [x]
        inputs = []
        for _ in range(min(segment_length, points - made)):
            u = np.array([
                rng.uniform(*system.speed_range),
                rng.uniform(*system.heading_range),
            ])
            x = system.step(x, u, rng)
            states.append(x)
            inputs.append(u)
            made += 1
        segs.append((states, inputs))
    return rc.TrajectoryDataset(segs)


# ---------------------------------------------------------------------------
# predicate tables

def build_parking_predicates():
    """Parking strips h1..h5 (positions in meters)."""
    return {
        "h1": stl.Predicate.linear("h1", [[1.0, 0.0]], [0.2805], [1.7175]),
        "h2": stl.Predicate.linear("h2", [[0.0, 1.0]], [0.839], [2.429]),
        "h3": stl.Predicate.linear("h3", [[1.0, 0.0]], [-0.3225], [1.3045]),
        "h4": stl.Predicate.linear("h4", [[0.0, 1.0]], [-1.137], [0.453]),
        "h5": stl.Predicate.linear("h5", [[0.0, 1.0]], [-1.665], [1.0]),
    }


def build_roundabout_predicates():
    """Roundabout strips: approach band, circular region, exit band."""
    from . import expr as ex

    circle = ex.parse_expr("norm(x1 - 0.307, x2 - 0.044)", 2)
    return {
        "h1": stl.Predicate.linear("h1", [[0.0, 1.0]], [2.25], [1.0]),
        "h2": stl.Predicate.nonlinear("h2", [circle], [1.429], 2),
        "h3": stl.Predicate.linear("h3", [[0.0, 1.0]], [-2.169], [1.0]),
    }


def build_heading_region(corners, name_suffix=""):
    """Two strips whose intersection is the rectangle through the corners.

    Corner order: (1) front-right, (2) front-left, (3) rear-right,
    (4) rear-left; edge 1-2 has slope m1, edge 1-3 slope m2, opposite edges
    parallel. Edges vertical in these coordinates have undefined slopes and
    raise; rotate coordinates before calling in that case.
    """
    (x1, y1), (x2, y2), (x3, y3), (x4, y4) = [
        (float(c[0]), float(c[1])) for c in corners
    ]
    if abs(x2 - x1) < 1e-12 or abs(x3 - x1) < 1e-12:
        raise ConfigError(
            "heading rectangle has a vertical edge; rotate coordinates"
        )
    m1 = (y2 - y1) / (x2 - x1)
    m2 = (y3 - y1) / (x3 - x1)
    c1 = -m1 * x1 + y1
    c2 = -m2 * x1 + y1
    c3 = -m2 * x2 + y2
    c4 = -m1 * x3 + y3
    h6 = stl.Predicate.linear(
        f"h6{name_suffix}", [[-m2, 1.0]], [0.5 * (c2 + c3)], [0.5 * abs(c2 - c3)]
    )
    h7 = stl.Predicate.linear(
        f"h7{name_suffix}", [[-m1, 1.0]], [0.5 * (c1 + c4)], [0.5 * abs(c1 - c4)]
    )
    return h6, h7


def heading_rectangle_corners(anchor, heading, half_length, half_width):
    """World-frame corners of the per-step motion rectangle."""
    c, s = math.cos(heading), math.sin(heading)
    R = np.array([[c, -s], [s, c]])
    center = np.asarray(anchor, dtype=float)
    local = [
        (half_length, -half_width),   # front-right
        (half_length, half_width),    # front-left
        (-half_length, -half_width),  # rear-right
        (-half_length, half_width),   # rear-left
    ]
    return [center + R @ np.array(p) for p in local]


# ---------------------------------------------------------------------------
# scenario configuration

_DEFAULT_AUDIT = {"samples": 10000, "seed": 99, "max_draw_factor": 400}


class ScenarioConfig:
    """Validated scenario description; see builtin_config for examples."""

    def __init__(self, raw):
        self.raw = raw
        try:
            sysd = raw["system"]
            self.system = SyntheticSystem(
                sysd["dt"],
                sysd.get("speed_range", [0.0, 0.5]),
                sysd.get("heading_range", [-math.pi, math.pi]),
                Zonotope(sysd["noise_center"], sysd["noise_generators"]),
                sysd.get("truth_noise_scale", 1.0),
            )
            self.dataset = dict(raw["dataset"])
            self.reach = dict(raw["reach"])
            self.predicates = {
                name: stl.predicate_from_dict({"name": name, **spec})
                for name, spec in raw["predicates"].items()
            }
            self.formula_text = raw["formula"]
            self.formula = stl.parse_formula(self.formula_text, self.predicates)
            self.instantiations = {
                int(item["node"]): tuple(item["window"])
                for item in raw.get("instantiations", [])
            }
            self.reference = dict(raw["reference"])
            self.heading_region = dict(raw.get("heading_region", {"enabled": False}))
            self.audit = {**_DEFAULT_AUDIT, **raw.get("audit", {})}
            self.volume = dict(raw.get("volume", {"method": "exact2d"}))
            self.representation = raw.get("representation", "both")
            self.output = dict(raw.get("output", {"dir": "report"}))
        except KeyError as err:
            raise ConfigError(f"missing config key: {err}") from err
        if self.representation not in ("zonotope", "constrained", "both"):
            raise ConfigError(f"bad representation {self.representation!r}")
        if self.audit["samples"] < 1:
            raise ConfigError("audit samples must be >= 1")
        self.horizon = int(self.reach["horizon"])
        self.mode = self.reach.get("mode", "single_step")
        if self.mode not in ("single_step", "open_loop"):
            raise ConfigError(f"bad mode {self.mode!r}")

    @classmethod
    def from_file(cls, path):
        with open(path) as fh:
            return cls(json.load(fh))


def reference_trajectory(config):
    """Reference states/inputs driven through the scenario waypoints.

    Each step re-aims at the current segment target (closed-loop drive), so
    tracking error stays within single-step noise; the simulated drive adds
    the system's (scaled) truth noise.
    """
    ref = config.reference
    wps = [np.asarray(p, dtype=float) for p in ref["waypoints"]]
    times = [int(t) for t in ref["times"]]
    if len(wps) != len(times) or times[0] != 0:
        raise ConfigError("reference needs matching waypoints/times from t=0")
    if times[-1] < config.horizon:
        raise ConfigError("reference must cover the horizon")
    rng = np.random.default_rng(ref.get("seed", 1))
    dt = config.system.dt
    v_lo, v_hi = config.system.speed_range
    states = [wps[0].copy()]
    inputs = []
    th_prev = 0.0
    for seg in range(len(wps) - 1):
        k0, k1 = times[seg], times[seg + 1]
        if k1 <= k0:
            raise ConfigError("waypoint times must be strictly increasing")
        for k in range(k0, k1):
            # re-aim at the segment target each step (closed-loop drive)
            delta = wps[seg + 1] - states[-1]
            dist = float(np.linalg.norm(delta))
            steps_left = k1 - k
            if dist < 1e-9:
                u = np.array([0.0, th_prev])
            else:
                v = min(max(dist / (steps_left * dt), v_lo), v_hi)
                th_prev = math.atan2(delta[1], delta[0])
                u = np.array([v, th_prev])
            inputs.append(u)
            states.append(config.system.step(states[-1], u, rng))
    return np.asarray(states[: config.horizon + 1]), np.asarray(inputs[: config.horizon])


def reference_violations(schedule, states):
    """(step, predicate name) pairs where the reference leaves a strip."""
    out = []
    for k in range(min(len(states) - 1, schedule.horizon) + 1):
        for pred in schedule.active[k]:
            if not pred.satisfied(states[k], margin=0.0):
                out.append((k, pred.name))
    return out


def _corridor_covering_radius(config, dataset, ref_states, ref_inputs):
    """Largest distance from any reachability query point to the data."""
    Zdata = np.vstack([dataset.X_minus, dataset.U_minus]).T
    queries = np.hstack([ref_states[:-1], ref_inputs])
    d = np.linalg.norm(Zdata[None, :, :] - queries[:, None, :], axis=2)
    nearest = d.min(axis=1)
    # queries range over the anchor and input boxes, not just their centers
    slack = float(
        np.linalg.norm(config.reach.get("measurement_radius", [0.0, 0.0]))
        + np.linalg.norm(config.reach.get("input_deviation", [0.0, 0.0]))
    )
    return float(nearest.max()) + slack


def _resolve_dataset(config):
    d = config.dataset
    if d.get("source", "generate") == "load":
        return rc.dataset_from_csv(d["path"])
    return generate_dataset(
        config.system,
        int(d.get("points", 1000)),
        int(d.get("seed", 0)),
        int(d.get("segment_length", 5)),
        d.get("start_box"),
    )


def _schedule_with_heading(config, ref_states, ref_inputs):
    sched = stl.compile_schedule(
        config.formula,
        config.system.dt,
        config.horizon,
        config.instantiations,
        config.reach.get("assume_f_at_deadline", False),
    )
    hr = config.heading_region
    if hr.get("enabled", False):
        for k in range(1, config.horizon + 1):
            corners = heading_rectangle_corners(
                config.system.motion(ref_states[k - 1], ref_inputs[k - 1]),
                ref_inputs[k - 1][1],
                float(hr["half_length"]),
                float(hr["half_width"]),
            )
            h6, h7 = build_heading_region(corners, name_suffix=f"@{k}")
            sched.active[k].extend([h6, h7])
    return sched


class Report:
    """In-memory scenario result; write() persists the artifact files."""

    def __init__(self, config, schedule, ref_states, ref_inputs):
        self.config = config
        self.schedule = schedule
        self.ref_states = ref_states
        self.ref_inputs = ref_inputs
        self.data_driven = []
        self.stl_zono = []
        self.stl_cz = []
        self.volume_rows = []    # (step, representation, constrained_by, volume)
        self.audit_rows = []     # (step, kept, viol_data, viol_zono, viol_cz)
        self.diagnostics = []    # (step, message)
        self.lipschitz = None
        self.covering_radius = None

    @property
    def total_violations(self):
        return sum(r[2] + r[3] + r[4] for r in self.audit_rows)

    def average_volume(self, representation, constrained_by):
        vals = [
            v for (_, rep, by, v) in self.volume_rows
            if rep == representation and by == constrained_by
        ]
        return float(np.mean(vals)) if vals else float("nan")

    def write(self, out_dir, svg=True):
        os.makedirs(out_dir, exist_ok=True)
        steps = []
        for k in range(len(self.data_driven)):
            entry = {"step": k, "data_driven": to_dict(self.data_driven[k])}
            if self.stl_zono:
                entry["stl_zonotope"] = to_dict(self.stl_zono[k])
            if self.stl_cz:
                entry["stl_constrained"] = to_dict(self.stl_cz[k])
            steps.append(entry)
        with open(os.path.join(out_dir, "sets.json"), "w") as fh:
            json.dump({"steps": steps}, fh, sort_keys=True)
            fh.write("\n")
        with open(os.path.join(out_dir, "volumes.csv"), "w") as fh:
            fh.write("step,representation,constrained_by,volume\n")
            for step, rep, by, v in self.volume_rows:
                fh.write(f"{step},{rep},{by},{v:.12g}\n")
        with open(os.path.join(out_dir, "audit.csv"), "w") as fh:
            fh.write(
                "step,kept,violations_data_driven,violations_stl_zonotope,"
                "violations_stl_constrained\n"
            )
            for row in self.audit_rows:
                fh.write(",".join(str(v) for v in row) + "\n")
        meta = {
            "config": self.config.raw,
            "mode": self.config.mode,
            "feedback": bool(self.config.reach.get("feedback", True)),
            "lipschitz": self.lipschitz,
            "covering_radius": self.covering_radius,
            "reference_states": [list(map(float, s)) for s in self.ref_states],
            "reference_inputs": [list(map(float, u)) for u in self.ref_inputs],
            "schedule": [
                [stl.predicate_to_dict(p) for p in lst]
                for lst in self.schedule.active
            ],
            "diagnostics": [
                {"step": k, "message": msg} for k, msg in self.diagnostics
            ],
        }
        with open(os.path.join(out_dir, "metadata.json"), "w") as fh:
            json.dump(meta, fh, sort_keys=True)
            fh.write("\n")
        if svg:
            for k in range(len(self.data_driven)):
                layers = [(set_polygon(self.data_driven[k]), "#4878a8", "data-driven")]
                if self.stl_zono:
                    layers.append((set_polygon(self.stl_zono[k]), "#d62728", "stl zonotope"))
                if self.stl_cz:
                    layers.append((set_polygon(self.stl_cz[k]), "#7a0c0c", "stl constrained"))
                write_step_svg(
                    os.path.join(out_dir, f"step_{k:03d}.svg"),
                    layers,
                    reference_point=self.ref_states[k],
                )
        return out_dir


def _audit_step(config, schedule, sets_at, ref_state, ref_input, k_next, seed):
    """Sample side-information-consistent successors of ref_state and count
    membership violations in each representation's step-k_next set."""
    system = config.system
    want = int(config.audit["samples"])
    max_draws = want * int(config.audit["max_draw_factor"])
    rng = np.random.default_rng(seed)
    u_dev = np.asarray(config.reach.get("input_deviation", [0.0, 0.0]), dtype=float)
    active = schedule.active[k_next] if k_next <= schedule.horizon else []
    kept = []
    drawn = 0
    while sum(len(c) for c in kept) < want and drawn < max_draws:
        chunk = min(max(4 * want, 10000), max_draws - drawn)
        drawn += chunk
        us = ref_input + rng.uniform(-1.0, 1.0, size=(chunk, 2)) * u_dev
        ws = system.sample_noise(chunk, rng, full=True)
        succ = np.column_stack([
            ref_state[0] + system.dt * us[:, 0] * np.cos(us[:, 1]),
            ref_state[1] + system.dt * us[:, 0] * np.sin(us[:, 1]),
        ]) + ws
        ok = np.ones(chunk, dtype=bool)
        for pred in active:
            ok &= pred.satisfied_batch(succ)
            if not ok.any():
                break
        kept.append(succ[ok])
    samples = np.vstack(kept) if kept else np.zeros((0, 2))
    samples = samples[:want]
    if samples.shape[0] < want:
        raise DataError(
            f"audit keep rate too low at step {k_next}: "
            f"{samples.shape[0]}/{want} after {drawn} draws"
        )
    counts = []
    for s in sets_at:
        if s is None:
            counts.append(0)
            continue
        inside = contains_points(s, samples, MEMBERSHIP_TOL)
        counts.append(int((~inside).sum()))
    return samples.shape[0], counts


def run_scenario(config):
    """Full pipeline: data, reach, schedule, constraining, volumes, audit.

    Inconsistent side information (a constrained set becoming empty) is a
    reported diagnostic, never a crash: the audit is skipped and the report
    carries the affected steps. A reference drive that violates a
    consistent schedule is a scenario-geometry error and raises.
    """
    dataset = _resolve_dataset(config)
    ref_states, ref_inputs = reference_trajectory(config)
    schedule = _schedule_with_heading(config, ref_states, ref_inputs)
    ref_bad = reference_violations(schedule, ref_states)

    report = Report(config, schedule, ref_states, ref_inputs)
    z_w = config.system.noise_zonotope
    lip = config.reach.get("lipschitz", "estimate")
    rad = config.reach.get("covering_radius", "corridor")
    if lip == "estimate" or rad == "estimate":
        est_l, est_d = rc.estimate_lipschitz_and_radius(dataset)
    if lip == "estimate":
        lip = est_l
    if rad == "estimate":
        rad = est_d
    elif rad == "corridor":
        rad = _corridor_covering_radius(config, dataset, ref_states, ref_inputs)
    lip, rad = float(lip), float(rad)
    report.lipschitz, report.covering_radius = lip, rad
    z_eps = rc.lipschitz_zonotope(lip, rad, 2)
    m_w = rc.build_noise_matrix_zonotope(z_w, dataset.n_points)
    meas = np.asarray(config.reach.get("measurement_radius", [0.01, 0.01]), dtype=float)
    u_dev = np.asarray(config.reach.get("input_deviation", [0.05, 0.2]), dtype=float)

    want_zono = config.representation in ("zonotope", "both")
    want_cz = config.representation in ("constrained", "both")

    def constrain_step(zset, k):
        zono = cn.constrain_zono(zset, schedule.active[k]) if want_zono else None
        cz = cn.constrain_cz(lift(zset), schedule.active[k]) if want_cz else None
        return zono, cz

    anchors = [Zonotope(s, np.diag(meas)) for s in ref_states]
    u_sets = [Zonotope(u, np.diag(u_dev)) for u in ref_inputs]

    if config.mode == "single_step":
        data_sets = [anchors[0]]
        for k in range(1, config.horizon + 1):
            model = rc.fit_model(
                dataset, anchors[k - 1].center, u_sets[k - 1].center, m_w
            )
            z_l = rc.residual_zonotope(dataset, model, m_w, z_w)
            data_sets.append(
                rc.reach_step(
                    anchors[k - 1], u_sets[k - 1], model, z_l, z_eps, z_w,
                    config.reach.get("max_order", 10.0),
                )
            )
    else:
        cfg = rc.ReachConfig(
            z_w, u_sets, anchors[0], config.horizon,
            lipschitz=lip, covering_radius=rad,
            max_order=config.reach.get("max_order", 10.0),
        )
        result = cn.stl_reach(
            cfg, dataset, schedule,
            feedback=bool(config.reach.get("feedback", True)),
        )
        data_sets = result["data_driven"]

    report.data_driven = data_sets
    for k, zset in enumerate(data_sets):
        zono, cz = constrain_step(zset, k)
        if want_zono:
            report.stl_zono.append(zono)
        if want_cz:
            report.stl_cz.append(cz)

    vol_method = config.volume.get("method", "exact2d")
    vol_kwargs = {}
    if vol_method == "monte_carlo":
        vol_kwargs = {
            "samples": int(config.volume.get("samples", 100000)),
            "seed": int(config.volume.get("seed", 0)),
        }
    for k in range(config.horizon + 1):
        report.volume_rows.append(
            (k, "zonotope", "none", volume(data_sets[k], vol_method, **vol_kwargs))
        )
        if want_zono:
            report.volume_rows.append(
                (k, "zonotope", "phi",
                 volume(report.stl_zono[k], vol_method, **vol_kwargs))
            )
        if want_cz:
            czk = report.stl_cz[k]
            if is_empty(czk):
                report.diagnostics.append((k, EMPTY_SET_DIAGNOSTIC))
                report.volume_rows.append((k, "constrained_zonotope", "phi", 0.0))
            else:
                report.volume_rows.append(
                    (k, "constrained_zonotope", "phi",
                     volume(czk, vol_method, **vol_kwargs))
                )

    if report.diagnostics:
        # inconsistent side information: no consistent run exists to audit
        return report
    if ref_bad:
        k, name = ref_bad[0]
        raise ConfigError(
            f"reference violates {name} at step {k}; fix the scenario geometry"
        )

    base_seed = int(config.audit["seed"])
    steps = list(range(1, config.horizon + 1))

    def audit_one(k):
        sets_at = [
            data_sets[k],
            report.stl_zono[k] if want_zono else None,
            report.stl_cz[k] if want_cz else None,
        ]
        kept, counts = _audit_step(
            config, schedule, sets_at, ref_states[k - 1], ref_inputs[k - 1],
            k, base_seed * 1000003 + k,
        )
        return (k, kept, counts[0], counts[1], counts[2])

    workers = worker_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(audit_one, steps))
    else:
        rows = [audit_one(k) for k in steps]
    report.audit_rows = sorted(rows)
    return report


# ---------------------------------------------------------------------------
# built-in scenario configurations

def parking_config(heading=False, seed=0):
    """Desk-scale parking-lot analog; heading=True adds the per-step
    motion rectangle strips."""
    preds = {
        name: {k: v for k, v in stl.predicate_to_dict(p).items() if k != "name"}
        for name, p in build_parking_predicates().items()
    }
    # region predicates: P inside the lot, E the exit box, O the street
    preds["P"] = {
        "kind": "linear",
        "H": [[1.0, 0.0], [0.0, 1.0]],
        "y": [0.2805, 0.839],
        "r": [1.7175, 2.429],
    }
    preds["E"] = {
        "kind": "linear",
        "H": [[1.0, 0.0], [0.0, 1.0]],
        "y": [-0.3225, -1.137],
        "r": [1.3045, 0.453],
    }
    preds["O"] = {"kind": "linear", "H": [[0.0, 1.0]], "y": [-1.665], "r": [1.0]}
    return {
        "name": "parking-heading" if heading else "parking",
        "system": {
            "dt": 1.0,
            "speed_range": [0.0, 0.5],
            "heading_range": [-math.pi, math.pi],
            "noise_center": [0.0, 0.0],
            "noise_generators": [[0.9], [0.9]],
            "truth_noise_scale": 0.15,
        },
        "dataset": {
            "source": "generate",
            "points": 1000,
            "seed": 12345 + seed,
            "segment_length": 5,
            "start_box": [[-2.0, 2.5], [-2.8, 3.4]],
        },
        "reach": {
            "horizon": 40,
            "max_order": 10,
            "lipschitz": 1.8,
            "covering_radius": "corridor",
            "measurement_radius": [0.01, 0.01],
            "input_deviation": [0.05, 0.2],
            "mode": "single_step",
            "feedback": True,
        },
        "predicates": preds,
        "formula": "G[0,25](P) & F[0,25](E) & G[25,40](O)",
        "instantiations": [{"node": 0, "window": [24, 25]}],
        "reference": {
            "waypoints": [
                [0.9, 2.2], [-0.3225, -1.137], [-0.37, -1.25],
                [-0.6, -1.67], [-0.9, -1.8],
            ],
            "times": [0, 24, 25, 30, 40],
            "seed": 7 + seed,
        },
        "heading_region": {
            "enabled": bool(heading),
            "half_length": 0.45,
            "half_width": 0.25,
        },
        "audit": {"samples": 10000, "seed": 99 + seed, "max_draw_factor": 400},
        "volume": {"method": "exact2d"},
        "representation": "both",
        "output": {"dir": "report-parking"},
    }


def roundabout_config(seed=0):
    """Desk-scale roundabout analog with the nonlinear circular region."""
    preds = {
        name: {k: v for k, v in stl.predicate_to_dict(p).items() if k != "name"}
        for name, p in build_roundabout_predicates().items()
    }
    table = {
        "B": preds["h1"],
        "O": preds["h2"],
        "A": preds["h3"],
    }
    return {
        "name": "roundabout",
        "system": {
            "dt": 1.0,
            "speed_range": [0.0, 0.6],
            "heading_range": [-math.pi, math.pi],
            "noise_center": [0.0, 0.0],
            "noise_generators": [[0.25], [0.25]],
            "truth_noise_scale": 0.3,
        },
        "dataset": {
            "source": "generate",
            "points": 1000,
            "seed": 54321 + seed,
            "segment_length": 5,
            "start_box": [[-2.0, 2.0], [-2.8, 3.2]],
        },
        "reach": {
            "horizon": 14,
            "max_order": 10,
            "lipschitz": 1.8,
            "covering_radius": "corridor",
            "measurement_radius": [0.01, 0.01],
            "input_deviation": [0.05, 0.2],
            "mode": "single_step",
            "feedback": True,
        },
        "predicates": table,
        "formula": "G[0,4](B) & G[4,10](O) & G[10,14](A)",
        "instantiations": [],
        "reference": {
            "waypoints": [
                [0.35, 2.9], [0.31, 1.35], [1.35, 0.05],
                [0.31, -1.28], [0.2, -2.15],
            ],
            "times": [0, 4, 7, 10, 14],
            "seed": 11 + seed,
        },
        "heading_region": {"enabled": False},
        "audit": {"samples": 10000, "seed": 299 + seed, "max_draw_factor": 400},
        "volume": {"method": "exact2d"},
        "representation": "both",
        "output": {"dir": "report-roundabout"},
    }


def builtin_config(name, seed=0):
    if name == "parking":
        return parking_config(heading=False, seed=seed)
    if name == "parking-heading":
        return parking_config(heading=True, seed=seed)
    if name == "roundabout":
        return roundabout_config(seed=seed)
    raise ConfigError(f"unknown scenario {name!r}")
