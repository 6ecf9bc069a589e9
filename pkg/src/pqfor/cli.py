"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 infeasible start or solver
failure, 3 file IO error.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .aggregation import (
    AggConfig,
    DispatchEvaluator,
    LossMapConfig,
    NoFeasibleStart,
    compute_for,
    for_result_csv,
    for_result_from_dict,
    for_result_to_dict,
    loss_map,
    loss_map_csv,
    random_sampling_for,
)
from .grid import BenchmarkConfig, GridError, build_cigre_mv_grid, load_grid, save_grid
from .monetization import CURVE_KINDS, EPFCurve, ZoneConfig, classify_zone, epf_cost, reactive_cost_factor
from .powerflow import PowerFlowError, SolverOptions
from .scenario import (
    EV_CASES,
    EVPenetrationSpec,
    ParseError,
    ScenarioError,
    build_scenario,
    derive_ev_fleet,
    load_base_fpus,
    load_scenario_file,
)

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------


def _digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _write(path, text: str) -> None:
    Path(path).write_text(text)


def _write_manifest(out, command: str, config: dict, inputs: dict, seed, started: float, outputs) -> None:
    manifest = {
        "command": command,
        "config": config,
        "inputs": {k: _digest(v) for k, v in inputs.items() if v is not None},
        "outputs": [str(o) for o in outputs],
        "seed": seed,
        "version": __version__,
        "duration_s": round(time.perf_counter() - started, 3),
    }
    _write(f"{out}.manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _solver_options(args) -> SolverOptions:
    if args.pf_tol <= 0 or args.pf_max_iter < 1:
        raise UsageError("--pf-tol must be positive and --pf-max-iter at least 1")
    return SolverOptions(tol=args.pf_tol, max_iter=args.pf_max_iter)


def _threads(args) -> int:
    if args.threads is None:
        return os.cpu_count() or 1
    if args.threads < 1:
        raise UsageError("--threads must be at least 1")
    return args.threads


def _grid(args):
    grid = load_grid(args.grid) if args.grid else build_cigre_mv_grid()
    if getattr(args, "ith", None) is not None:
        if args.ith <= 0:
            raise UsageError("--ith must be positive")
        grid = grid.with_line_rating(args.ith)
    return grid


def _scenario(args, grid, default_id=None):
    if args.scenario_file:
        return load_scenario_file(args.scenario_file)
    sid = args.scenario or default_id
    if sid is None:
        raise UsageError("one of --scenario or --scenario-file is required")
    base = load_base_fpus(args.base_fpus) if args.base_fpus else None
    return build_scenario(sid, grid, base)


def _inputs(args) -> dict:
    return {k: getattr(args, k, None) for k in ("grid", "scenario_file", "base_fpus", "for_file")}


def _agg_config(args) -> AggConfig:
    try:
        return AggConfig(
            directions=args.directions,
            swarm_size=args.swarm_size,
            iterations=args.iterations,
            perpendicular_penalty=args.perpendicular_penalty,
            seed=args.seed,
            binding_margin=args.binding_margin,
            refine_passes=args.refine_passes,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _sibling(out, suffix: str) -> Path:
    p = Path(out)
    return p.with_suffix(suffix) if p.suffix else Path(f"{out}{suffix}")


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_build_grid(args, started):
    if args.ith is not None and args.ith <= 0:
        raise UsageError("--ith must be positive")
    config = BenchmarkConfig() if args.ith is None else BenchmarkConfig(i_rated=args.ith)
    grid = build_cigre_mv_grid(config)
    save_grid(grid, args.out)
    _write_manifest(args.out, "build-grid", {"i_rated": config.i_rated, "frequency": config.frequency},
                    {}, None, started, [args.out])


def cmd_for(args, started):
    options = _solver_options(args)
    grid = _grid(args)
    scenario = _scenario(args, grid)
    config = _agg_config(args)
    result = compute_for(scenario, grid, config, options, threads=_threads(args))
    doc = for_result_to_dict(result, options)
    if args.ith is not None:
        doc["i_rated_override"] = args.ith
    _write(args.out, json.dumps(doc, indent=1) + "\n")
    csv_path = args.csv or _sibling(args.out, ".csv")
    _write(csv_path, for_result_csv(result))
    outputs = [args.out, csv_path]
    if args.plot:
        from .plotting import plot_for

        png = _sibling(args.out, ".png")
        plot_for(result, png)
        outputs.append(png)
    resolved = dict(doc["config"], i_rated=args.ith, scenario=scenario.id)
    _write_manifest(args.out, "for", resolved, _inputs(args), args.seed, started, outputs)
    print(f"area {result.area:.6f} MW*Mvar over {len(result.boundary)} boundary points")


def cmd_sample(args, started):
    if args.samples < 1:
        raise UsageError("--samples must be at least 1")
    options = _solver_options(args)
    grid = _grid(args)
    scenario = _scenario(args, grid)
    cloud, hull = random_sampling_for(scenario, grid, args.samples, args.seed, options)
    rows = ["p_mw,q_mvar"] + [f"{p!r},{q!r}" for p, q in cloud.tolist()]
    _write(args.out, "\n".join(rows) + "\n")
    hull_path = _sibling(args.out, ".hull.csv")
    rows = ["p_mw,q_mvar"] + [f"{p!r},{q!r}" for p, q in hull.tolist()]
    _write(hull_path, "\n".join(rows) + "\n")
    outputs = [args.out, hull_path]
    if args.plot:
        from .plotting import plot_samples

        png = _sibling(args.out, ".png")
        plot_samples(cloud, hull, png)
        outputs.append(png)
    config = {"samples": args.samples, "scenario": scenario.id, "i_rated": args.ith,
              "pf_tol": options.tol, "pf_max_iter": options.max_iter}
    _write_manifest(args.out, "sample", config, _inputs(args), args.seed, started, outputs)
    print(f"{len(cloud)} of {args.samples} samples feasible")


def cmd_loss_map(args, started):
    if args.resolution < 2:
        raise UsageError("--resolution must be at least 2")
    options = _solver_options(args)
    grid = _grid(args)
    if args.for_file:
        try:
            doc = json.loads(Path(args.for_file).read_text())
            result = for_result_from_dict(doc)
        except (json.JSONDecodeError, ValueError) as exc:
            raise ParseError(f"{args.for_file}: {exc}") from exc
        if args.ith is None and doc.get("i_rated_override") is not None:
            args.ith = float(doc["i_rated_override"])
            grid = grid.with_line_rating(args.ith)
        scenario = _scenario(args, grid, default_id=result.scenario_id)
        if result.fpu_names and result.fpu_names != tuple(f.name for f in scenario.fpus):
            raise UsageError("the FOR file was computed for a different set of FPUs")
    else:
        scenario = _scenario(args, grid)
        result = compute_for(scenario, grid, _agg_config(args), options, threads=_threads(args))
    lm_config = LossMapConfig(resolution=args.resolution, tolerance=args.tolerance, seed=args.seed)
    lm = loss_map(scenario, grid, result, lm_config, options)
    _write(args.out, loss_map_csv(lm))
    outputs = [args.out]
    if args.plot:
        from .plotting import plot_loss_map

        png = _sibling(args.out, ".png")
        plot_loss_map(lm, png, result)
        outputs.append(png)
    config = dict(asdict(lm_config), scenario=scenario.id, i_rated=args.ith,
                  pf_tol=options.tol, pf_max_iter=options.max_iter)
    _write_manifest(args.out, "loss-map", config, _inputs(args), args.seed, started, outputs)
    print(f"{int(lm.feasible.sum())} of {lm.resolution ** 2} cells feasible")


def cmd_epf(args, started):
    if args.curve not in CURVE_KINDS:
        raise UsageError(f"unknown curve {args.curve!r}; expected one of {', '.join(CURVE_KINDS)}")
    if args.cp < 0:
        raise UsageError("--cp must be non-negative")
    curve = EPFCurve(args.curve, args.cp)
    if args.sweep is not None:
        if args.sweep < 2:
            raise UsageError("--sweep needs at least 2 points")
        ps = np.linspace(-1.0, 1.0, args.sweep)
        rows = ["p_norm,cost,zone,tier"]
        for p in ps.tolist():
            z = classify_zone(p)
            rows.append(f"{p!r},{epf_cost(curve, p)!r},{z.zone},{z.likelihood_tier}")
        text = "\n".join(rows) + "\n"
    else:
        p = 0.0 if args.p is None else args.p
        if not -1.0 <= p <= 1.0:
            raise UsageError("--p must lie in [-1, 1]")
        text = f"{epf_cost(curve, p)!r}\n"
    if args.out:
        _write(args.out, text)
        outputs = [args.out]
        if args.plot:
            from .plotting import plot_epf

            grid = np.linspace(-1.0, 1.0, 201)
            png = _sibling(args.out, ".png")
            plot_epf(grid, {k: epf_cost(EPFCurve(k, args.cp), grid) for k in CURVE_KINDS}, png, ZoneConfig())
            outputs.append(png)
        config = {"curve": args.curve, "c_p": args.cp, "c_q": reactive_cost_factor(args.cp),
                  "p": args.p, "sweep": args.sweep}
        _write_manifest(args.out, "epf", config, {}, None, started, outputs)
    else:
        sys.stdout.write(text)


def cmd_derive_fleet(args, started):
    cases = sorted(EV_CASES) if args.share is None else [None]
    rows = ["case,ev_share,households,evs,ac_kva_per_node,dc_nodes"]
    for case in cases:
        share = args.share if case is None else EV_CASES[case][0]
        try:
            spec = EVPenetrationSpec(args.simultaneity, args.peak_kw, args.node_mw, share, args.ac_kva)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        households, evs, kva = derive_ev_fleet(spec)
        dc = "" if case is None else " ".join(str(n) for n in EV_CASES[case][1])
        rows.append(f"{'' if case is None else case},{share!r},{households},{evs},{kva!r},{dc}")
    text = "\n".join(rows) + "\n"
    if args.out:
        _write(args.out, text)
        config = {"simultaneity": args.simultaneity, "peak_kw": args.peak_kw, "node_mw": args.node_mw,
                  "share": args.share, "ac_kva": args.ac_kva}
        _write_manifest(args.out, "derive-fleet", config, {}, None, started, [args.out])
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--threads", type=int, default=None, help="worker processes (default: CPU count)")
    common.add_argument("--pf-tol", type=float, default=SolverOptions().tol)
    common.add_argument("--pf-max-iter", type=int, default=SolverOptions().max_iter)
    common.add_argument("--plot", action="store_true", help="also render a PNG next to the output")

    parser = _Parser(prog="pqfor", description="PQ flexibility aggregation at the HV/MV interconnection")
    parser.add_argument("--version", action="version", version=f"pqfor {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("build-grid", parents=[common], help="write the benchmark grid file")
    p.add_argument("--out", required=True)
    p.add_argument("--ith", type=float, default=None, help="line rating in A (default 220)")
    p.set_defaults(func=cmd_build_grid)

    def scenario_flags(p):
        p.add_argument("--grid", help="grid file (default: built-in benchmark)")
        p.add_argument("--ith", type=float, default=None, help="override every line rating (A)")
        p.add_argument("--scenario", help="scenario id, e.g. 3a")
        p.add_argument("--scenario-file")
        p.add_argument("--base-fpus", help="replacement base load/DER file for built-in scenarios")

    def agg_flags(p):
        d = AggConfig()
        p.add_argument("--directions", type=int, default=d.directions)
        p.add_argument("--swarm-size", type=int, default=d.swarm_size)
        p.add_argument("--iterations", type=int, default=d.iterations)
        p.add_argument("--perpendicular-penalty", type=float, default=d.perpendicular_penalty)
        p.add_argument("--binding-margin", type=float, default=d.binding_margin)
        p.add_argument("--refine-passes", type=int, default=d.refine_passes)

    p = sub.add_parser("for", parents=[common], help="compute the feasible operation region")
    scenario_flags(p)
    agg_flags(p)
    p.add_argument("--out", required=True, help="FOR JSON file")
    p.add_argument("--csv", help="boundary CSV (default: next to --out)")
    p.set_defaults(func=cmd_for)

    p = sub.add_parser("sample", parents=[common], help="random-sampling FOR baseline")
    scenario_flags(p)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--out", required=True, help="feasible cloud CSV")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("loss-map", parents=[common], help="loss raster over the FOR")
    scenario_flags(p)
    agg_flags(p)
    p.add_argument("--for", dest="for_file", help="FOR JSON from the 'for' command")
    p.add_argument("--resolution", type=int, default=LossMapConfig().resolution)
    p.add_argument("--tolerance", type=float, default=LossMapConfig().tolerance,
                   help="accepted target miss as a fraction of the FOR diameter")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_loss_map)

    p = sub.add_parser("epf", parents=[common], help="expected payment function values")
    p.add_argument("--curve", required=True, help="linear, quadratic or cubic")
    p.add_argument("--cp", type=float, default=35.0)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--p", type=float)
    g.add_argument("--sweep", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_epf)

    p = sub.add_parser("derive-fleet", parents=[common], help="EVs and AC rating per LV node")
    d = EVPenetrationSpec()
    p.add_argument("--share", type=float, default=None, help="EV share (default: all case-study shares)")
    p.add_argument("--simultaneity", type=float, default=d.simultaneity)
    p.add_argument("--peak-kw", type=float, default=d.peak_household_power)
    p.add_argument("--node-mw", type=float, default=d.max_node_load)
    p.add_argument("--ac-kva", type=float, default=d.ev_ac_rating)
    p.add_argument("--out")
    p.set_defaults(func=cmd_derive_fleet)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    started = time.perf_counter()
    try:
        args.func(args, started)
    except (ParseError, GridError) as exc:
        print(f"pqfor: bad input file: {exc}", file=sys.stderr)
        return EXIT_IO
    except (UsageError, ScenarioError) as exc:
        print(f"pqfor: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NoFeasibleStart, PowerFlowError) as exc:
        print(f"pqfor: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except OSError as exc:
        print(f"pqfor: io error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
