"""Command-line interface: gen-data, analyze, check, version.

Exit codes are stable contracts:
  0  success
  2  validation / configuration error
  3  a constrained set became empty (side information inconsistent)
  4  the inclusion audit found a violation
  5  internal error
"""

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from . import reach as rc
from . import scenarios as sc
from . import stl
from .errors import ReachStlError
from .setalg import from_dict

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_EMPTY = 3
EXIT_AUDIT = 4
EXIT_INTERNAL = 5


def _load_config(args):
    if args.config:
        raw = json.load(open(args.config))
    elif args.scenario:
        raw = sc.builtin_config(args.scenario, seed=args.seed or 0)
    else:
        raise ReachStlError("pass --config PATH or --scenario NAME")
    if args.seed is not None:
        raw.setdefault("dataset", {})["seed"] = args.seed
        raw.setdefault("audit", {})["seed"] = args.seed + 1
        raw.setdefault("reference", {})["seed"] = args.seed + 2
    if args.horizon is not None:
        raw["reach"]["horizon"] = args.horizon
    if args.representation is not None:
        raw["representation"] = args.representation
    if args.volume_method is not None:
        raw.setdefault("volume", {})["method"] = args.volume_method
    if args.samples is not None:
        if args.samples < 1:
            raise ReachStlError("--samples must be >= 1")
        raw.setdefault("audit", {})["samples"] = args.samples
    if args.assume_f_at_deadline:
        raw["reach"]["assume_f_at_deadline"] = True
    if args.no_feedback:
        raw["reach"]["feedback"] = False
    if args.open_loop:
        raw["reach"]["mode"] = "open_loop"
    if args.out is not None:
        raw.setdefault("output", {})["dir"] = args.out
    return raw


def cmd_gen_data(args):
    if args.points < 2:
        print("error: --points must be >= 2", file=sys.stderr)
        return EXIT_VALIDATION
    system = sc.SyntheticSystem(
        args.dt, [0.0, args.speed_max], [-np.pi, np.pi],
        sc.Zonotope([0.0, 0.0], np.array([[args.noise], [args.noise]])),
        truth_noise_scale=args.truth_noise_scale,
    )
    dataset = sc.generate_dataset(system, args.points, args.seed)
    rc.dataset_to_csv(dataset, args.out)
    lip, delta = rc.estimate_lipschitz_and_radius(dataset)
    print(f"wrote {args.out}")
    print(
        f"T={dataset.n_points} K={len(dataset.trajectories)} "
        f"estimated L*={lip:.6g} delta={delta:.6g}"
    )
    return EXIT_OK


def cmd_analyze(args):
    raw = _load_config(args)
    config = sc.ScenarioConfig(raw)
    report = sc.run_scenario(config)
    out_dir = config.output.get("dir", "report")
    report.write(out_dir, svg=config.output.get("svg", True))
    un = report.average_volume("zonotope", "none")
    zp = report.average_volume("zonotope", "phi")
    cp = report.average_volume("constrained_zonotope", "phi")
    print(f"report written to {out_dir}")
    print(f"average volumes: unconstrained={un:.6g} stl-zonotope={zp:.6g} "
          f"stl-constrained={cp:.6g}")
    print(f"audit: {report.total_violations} violations over "
          f"{sum(r[1] for r in report.audit_rows)} kept samples")
    if report.diagnostics:
        for k, msg in report.diagnostics:
            print(f"step {k}: {msg}", file=sys.stderr)
        return EXIT_EMPTY
    if report.total_violations > 0:
        return EXIT_AUDIT
    return EXIT_OK


def cmd_check(args):
    if args.samples is not None and args.samples < 1:
        print("error: --samples must be >= 1", file=sys.stderr)
        return EXIT_VALIDATION
    meta_path = os.path.join(args.report, "metadata.json")
    sets_path = os.path.join(args.report, "sets.json")
    if not (os.path.exists(meta_path) and os.path.exists(sets_path)):
        print(f"error: {args.report} is not a report directory", file=sys.stderr)
        return EXIT_VALIDATION
    meta = json.load(open(meta_path))
    sets_doc = json.load(open(sets_path))
    config = sc.ScenarioConfig(meta["config"])
    if args.samples is not None:
        config.audit["samples"] = args.samples
    schedule = stl.PredicateSchedule(
        config.horizon, config.system.dt,
        [[stl.predicate_from_dict(d) for d in lst] for lst in meta["schedule"]],
    )
    ref_states = np.asarray(meta["reference_states"])
    ref_inputs = np.asarray(meta["reference_inputs"])
    violations = 0
    kept_total = 0
    base_seed = int(config.audit["seed"])
    for entry in sets_doc["steps"]:
        k = entry["step"]
        if k == 0:
            continue
        sets_at = [
            from_dict(entry["data_driven"]),
            from_dict(entry["stl_zonotope"]) if "stl_zonotope" in entry else None,
            from_dict(entry["stl_constrained"]) if "stl_constrained" in entry else None,
        ]
        kept, counts = sc._audit_step(
            config, schedule, sets_at, ref_states[k - 1], ref_inputs[k - 1],
            k, base_seed * 1000003 + k,
        )
        kept_total += kept
        violations += sum(counts)
    print(f"checked {kept_total} samples: {violations} violations")
    return EXIT_AUDIT if violations else EXIT_OK


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="reachstl",
        description="Data-driven reachable sets under STL side information",
    )
    sub = parser.add_subparsers(dest="command")

    g = sub.add_parser("gen-data", help="generate a trajectory CSV")
    g.add_argument("--points", type=int, default=1000)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", default="trajectories.csv")
    g.add_argument("--dt", type=float, default=1.0)
    g.add_argument("--speed-max", type=float, default=0.5)
    g.add_argument("--noise", type=float, default=0.9)
    g.add_argument("--truth-noise-scale", type=float, default=0.15)

    a = sub.add_parser("analyze", help="run a scenario end to end")
    a.add_argument("--config", help="scenario config JSON")
    a.add_argument("--scenario",
                   choices=["parking", "parking-heading", "roundabout"],
                   help="built-in scenario")
    a.add_argument("--seed", type=int)
    a.add_argument("--horizon", type=int)
    a.add_argument("--representation",
                   choices=["zonotope", "constrained", "both"])
    a.add_argument("--volume-method", choices=["exact2d", "monte_carlo"])
    a.add_argument("--samples", type=int, help="audit sample count per step")
    a.add_argument("--assume-f-at-deadline", action="store_true")
    a.add_argument("--no-feedback", action="store_true")
    a.add_argument("--open-loop", action="store_true")
    a.add_argument("--out", help="report directory")
    a.add_argument("--dump-config", action="store_true",
                   help="print the resolved config and exit")

    c = sub.add_parser("check", help="re-run the inclusion audit on a report")
    c.add_argument("--report", required=True)
    c.add_argument("--samples", type=int)

    sub.add_parser("version", help="print the package version")

    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return EXIT_VALIDATION
    if args.command == "version":
        print(__version__)
        return EXIT_OK
    try:
        if args.command == "gen-data":
            return cmd_gen_data(args)
        if args.command == "analyze":
            if args.dump_config:
                print(json.dumps(_load_config(args), indent=2, sort_keys=True))
                return EXIT_OK
            return cmd_analyze(args)
        if args.command == "check":
            return cmd_check(args)
    except ReachStlError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as err:
        print(f"io error: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
