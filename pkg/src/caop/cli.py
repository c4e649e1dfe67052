"""Command-line interface: gen, correlate, depots, solve, export-miqp, render, bench."""

from __future__ import annotations

import argparse
import json
import sys

from .bench import BenchCase, format_report, random_micro_instance, run_benchmark
from .correlation import (
    WeightModel,
    fov_weights,
    inverse_distance_weights,
    weights_from_entries,
    weights_to_entries,
)
from .depots import kmedoids_depots, with_depots
from .distances import DistanceTable
from .errors import CaopError
from .exact import OracleLimits, solve_bruteforce
from .generators import gen_grid, gen_random_planar, gen_spiral
from .greedy import GreedyConfig, solve_greedy
from .instance import add_direct_deadhead_edges, load_instance, save_instance
from .miqp import export_miqp
from .render import render_svg
from .routing import Solution, solution_from_doc, solution_to_doc


def _resolve_weights(inst, raw_entries, spec: str) -> WeightModel:
    if spec == "file":
        if raw_entries is None:
            raise CaopError("instance file carries no weights; use --weights fov:<w>|invdist|none")
        return weights_from_entries(inst, raw_entries)
    if spec == "none":
        return WeightModel.empty()
    if spec == "invdist":
        return inverse_distance_weights(inst)
    if spec.startswith("fov:"):
        return fov_weights(inst, float(spec[4:]))
    raise CaopError(f"unknown weights spec {spec!r}; use file|none|invdist|fov:<w>")


def _write_json(path: str, doc: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def _cmd_gen(args) -> int:
    if args.kind == "spiral":
        inst = gen_spiral(args.segments, args.spacing, args.capacity, args.robots)
    elif args.kind == "grid":
        inst = gen_grid(args.rows, args.cols, args.capacity, args.robots)
    else:
        if args.seed is None:
            raise CaopError("gen random requires --seed")
        inst = gen_random_planar(args.vertices, args.edges, args.seed,
                                 args.service_speed, args.deadhead_speed,
                                 args.capacity, args.robots)
    if args.direct_deadhead:
        inst = add_direct_deadhead_edges(inst, args.service_speed, args.deadhead_speed)
    save_instance(args.output, inst)
    print(f"wrote {args.output}: |V|={inst.n_vertices} |E|={inst.n_edges} "
          f"K={len(inst.robots)}")
    return 0


def _cmd_correlate(args) -> int:
    inst, _ = load_instance(args.input)
    if args.fov is not None:
        wm = fov_weights(inst, args.fov, samples=args.fov_samples)
    else:
        wm = inverse_distance_weights(inst, d_min=args.d_min, floor=args.floor)
    save_instance(args.output, inst, weights_to_entries(wm))
    print(f"wrote {args.output}: {len(wm)} weight entries")
    return 0


def _cmd_depots(args) -> int:
    inst, raw = load_instance(args.input)
    depots, _ = kmedoids_depots(inst, args.clusters, args.seed)
    inst = with_depots(inst, depots, args.capacity)
    save_instance(args.output, inst, raw)
    print(f"wrote {args.output}: depots={depots}")
    return 0


def _cmd_solve(args) -> int:
    inst, raw = load_instance(args.input)
    wm = _resolve_weights(inst, raw, args.weights)
    dist = DistanceTable(inst)
    if args.algo == "greedy":
        sol = solve_greedy(inst, wm, GreedyConfig(eps_u=args.eps_u), dist=dist)
    else:
        limits = OracleLimits(max_edges=args.max_edges, max_robots=args.max_robots)
        sol = solve_bruteforce(inst, wm, limits, dist=dist)
    _write_json(args.output, solution_to_doc(inst, dist, sol))
    if args.svg:
        with open(args.svg, "w", encoding="utf-8") as fh:
            fh.write(render_svg(inst, sol, dist=dist))
    serviced = len(sol.serviced)
    print(f"wrote {args.output}: reward={sol.total_reward:.6g} serviced={serviced}")
    return 0


def _cmd_export_miqp(args) -> int:
    inst, raw = load_instance(args.input)
    wm = _resolve_weights(inst, raw, args.weights)
    model = export_miqp(inst, wm, args.out, linearize=args.linearize)
    n_con = len(model.constraints)
    n_var = len(model.binaries) + len(model.generals) + sum(
        1 for b in model.bounds if b not in model.binaries and b not in model.generals)
    print(f"wrote {args.out}: {n_var} variables, {n_con} constraints, "
          f"{len(model.quad_obj)} quadratic terms")
    return 0


def _cmd_render(args) -> int:
    inst, _ = load_instance(args.input)
    sol: Solution | None = None
    dist = DistanceTable(inst)
    if args.solution:
        with open(args.solution, "r", encoding="utf-8") as fh:
            sol = solution_from_doc(inst, dist, json.load(fh))
    with open(args.output, "w", encoding="utf-8") as fh:
        fh.write(render_svg(inst, sol, dist=dist))
    print(f"wrote {args.output}")
    return 0


def _cmd_bench(args) -> int:
    cases = []
    for i in range(args.count):
        inst, wm = random_micro_instance(args.seed + i, max_edges=args.max_edges)
        cases.append(BenchCase(f"micro-{args.seed + i}", inst, wm, use_oracle=not args.no_oracle))
    records = run_benchmark(cases, workers=args.workers)
    report = format_report(records)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(report)
    print(report.splitlines()[-1])
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="caop", description="Correlated arc orienteering toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate an instance")
    g.add_argument("kind", choices=["spiral", "grid", "random"])
    g.add_argument("--segments", type=int, default=77)
    g.add_argument("--spacing", type=int, default=1)
    g.add_argument("--rows", type=int, default=5)
    g.add_argument("--cols", type=int, default=5)
    g.add_argument("--vertices", type=int, default=50)
    g.add_argument("--edges", type=int, default=60)
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("--capacity", type=float, default=None)
    g.add_argument("--robots", type=int, default=1)
    g.add_argument("--direct-deadhead", action="store_true",
                   help="add a deadhead-only edge for every unconnected vertex pair")
    g.add_argument("--service-speed", type=float, default=1.0)
    g.add_argument("--deadhead-speed", type=float, default=1.0)
    g.add_argument("-o", "--output", required=True)
    g.set_defaults(func=_cmd_gen)

    c = sub.add_parser("correlate", help="attach correlation weights to an instance")
    c.add_argument("--input", required=True)
    grp = c.add_mutually_exclusive_group(required=True)
    grp.add_argument("--fov", type=float, default=None)
    grp.add_argument("--invdist", action="store_true")
    c.add_argument("--fov-samples", type=int, default=50)
    c.add_argument("--d-min", type=float, default=1.0)
    c.add_argument("--floor", type=float, default=1e-4)
    c.add_argument("-o", "--output", required=True)
    c.set_defaults(func=_cmd_correlate)

    d = sub.add_parser("depots", help="k-medoids depot placement")
    d.add_argument("--input", required=True)
    d.add_argument("--clusters", "-K", type=int, required=True)
    d.add_argument("--seed", type=int, required=True)
    d.add_argument("--capacity", type=float, required=True)
    d.add_argument("-o", "--output", required=True)
    d.set_defaults(func=_cmd_depots)

    s = sub.add_parser("solve", help="solve an instance")
    s.add_argument("--input", required=True)
    s.add_argument("--algo", choices=["greedy", "exact"], default="greedy")
    s.add_argument("--weights", default="file", help="file|none|invdist|fov:<w>")
    s.add_argument("--output", required=True)
    s.add_argument("--svg", default=None)
    s.add_argument("--seed", type=int, default=None, help="reserved for stochastic solvers")
    s.add_argument("--eps-u", type=float, default=1e-9)
    s.add_argument("--max-edges", type=int, default=8)
    s.add_argument("--max-robots", type=int, default=2)
    s.set_defaults(func=_cmd_solve)

    e = sub.add_parser("export-miqp", help="write the MIQP model file")
    e.add_argument("--input", required=True)
    e.add_argument("--weights", default="file", help="file|none|invdist|fov:<w>")
    e.add_argument("--out", required=True)
    e.add_argument("--linearize", action="store_true")
    e.set_defaults(func=_cmd_export_miqp)

    r = sub.add_parser("render", help="render an instance or solution to SVG")
    r.add_argument("--input", required=True)
    r.add_argument("--solution", default=None)
    r.add_argument("-o", "--output", required=True)
    r.set_defaults(func=_cmd_render)

    b = sub.add_parser("bench", help="greedy-vs-oracle gap report on random micro instances")
    b.add_argument("--count", type=int, default=50)
    b.add_argument("--seed", type=int, default=1)
    b.add_argument("--max-edges", type=int, default=8)
    b.add_argument("--no-oracle", action="store_true")
    b.add_argument("--workers", type=int, default=1)
    b.add_argument("--out", required=True)
    b.set_defaults(func=_cmd_bench)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CaopError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
