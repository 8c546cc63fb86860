"""Command-line interface.

Subcommands: ``detect``, ``gamma``, ``generate``, ``fig1`` and
``check-equivalence``.  Exit codes: 0 success, 1 usage error, 2 data error,
3 non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from importlib import resources
from pathlib import Path

import numpy as np

from .graph import GraphError, Partition, load_edgelist, write_edgelist, write_partition
from .optimize import AnnealSchedule, SearchMode, optimize
from .quality import (NullModel, PlantedPartitionParams, equivalence_constants, modularity,
                      pp_log_likelihood)
from .resolution import iterate_gamma
from .synth import SyntheticSpec, generate_planted_partition, true_gamma

SCHEMA = 1
EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NOCONV = 0, 1, 2, 3
EQUIVALENCE_TOL = 1e-9

log = logging.getLogger("ppmod")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def bundled_path(name: str) -> Path:
    """Path of a bundled edge list (``karate`` or ``dolphins``)."""
    ref = resources.files("ppmod") / "data" / f"{name}.txt"
    if not ref.is_file():
        raise FileNotFoundError(f"no bundled network named {name!r}")
    return Path(str(ref))


def _resolve_input(spec: str) -> Path:
    if spec.startswith("bundled:"):
        return bundled_path(spec.split(":", 1)[1])
    return Path(spec)


def _schedule(args) -> AnnealSchedule:
    return AnnealSchedule(seed=args.seed, restarts=args.restarts)


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cell_seed(base: int, *key: int) -> int:
    """Independent 32-bit seed for a sub-run, derived from the user seed and a counter key."""
    return int(np.random.SeedSequence(base, spawn_key=key).generate_state(1)[0])


def cmd_detect(args) -> int:
    graph = load_edgelist(_resolve_input(args.input))
    null, mode = NullModel(args.null), SearchMode(args.mode)
    t0 = time.perf_counter()
    part = optimize(graph, args.q, args.gamma, null, _schedule(args), mode, workers=args.workers)
    elapsed = time.perf_counter() - t0
    summary = {
        "schema": SCHEMA,
        "command": "detect",
        "input": args.input,
        "n": graph.n,
        "m": graph.m,
        "q": args.q,
        "gamma": args.gamma,
        "null": null.value,
        "mode": mode.value,
        "seed": args.seed,
        "restarts": args.restarts,
        "Q": modularity(graph, part, args.gamma, null),
        "m_in": part.m_in,
        "kappa": part.kappa.tolist(),
        "sizes": part.sizes.tolist(),
        "occupied_groups": part.occupied(),
    }
    if args.out:
        with open(args.out, "w", newline="") as fh:
            write_partition(part, fh, args.format)
        summary["partition_file"] = args.out
    else:
        summary["partition"] = part.to_dict()
    summary["wall_time"] = elapsed
    print(json.dumps(summary, indent=1))
    return EXIT_OK


def cmd_gamma(args) -> int:
    if args.q < 2:
        raise UsageError("--q must be at least 2 for gamma estimation")
    graph = load_edgelist(_resolve_input(args.input))
    trace = iterate_gamma(graph, args.q, args.gamma0, args.tol, args.max_iter, _schedule(args),
                          workers=args.workers)
    meta = {"schema": SCHEMA, "command": "gamma", "input": args.input, "q": args.q,
            "gamma0": args.gamma0, "tol": args.tol, "max_iter": args.max_iter, "seed": args.seed,
            "restarts": args.restarts}
    if args.format == "csv":
        _emit(trace.to_csv(), args.out)
    else:
        _emit(trace.to_json(**meta) + "\n", args.out)
    if args.out:
        print(json.dumps({**meta, "final_gamma": trace.final_gamma, "converged": trace.converged,
                          "n_iterations": len(trace.iterations), "diagnostic": trace.diagnostic,
                          "trace_file": args.out}, indent=1))
    if trace.diagnostic:
        print(f"warning: {trace.diagnostic}", file=sys.stderr)
    return EXIT_OK if trace.converged else EXIT_NOCONV


def cmd_generate(args) -> int:
    spec = SyntheticSpec(args.q, args.group_size, args.d_in, args.d_out, args.seed)
    graph, truth = generate_planted_partition(spec)
    prefix = Path(args.out)
    edges, groups = prefix.with_suffix(".edges"), prefix.with_suffix(".truth.csv")
    header = (f"planted partition q={spec.q} group_size={spec.group_size} d_in={spec.d_in} "
              f"d_out={spec.d_out} seed={spec.seed}\nn={graph.n} m={graph.m}")
    write_edgelist(graph, edges, header=header)
    with open(groups, "w", newline="") as fh:
        write_partition(truth, fh, "csv")
    if graph.m == 0:
        print("warning: generated graph has no edges", file=sys.stderr)
    print(json.dumps({"schema": SCHEMA, "command": "generate", "q": spec.q,
                      "group_size": spec.group_size, "d_in": spec.d_in, "d_out": spec.d_out,
                      "seed": spec.seed, "n": graph.n, "m": graph.m,
                      "expected_m": spec.expected_edges,
                      "true_gamma": true_gamma(spec) if graph.m else None,
                      "edges_file": str(edges), "truth_file": str(groups)}, indent=1))
    return EXIT_OK


def fig1_cell(q: int, idx: int, args_dict: dict) -> dict:
    seed = cell_seed(args_dict["seed"], q, idx)
    spec = SyntheticSpec(q, args_dict["group_size"], args_dict["d_in"], args_dict["d_out"], seed)
    row = {"q": q, "seed": seed, "gamma_est": math.nan, "gamma_true": math.nan,
           "iterations": 0, "converged": False, "error": ""}
    try:
        row["gamma_true"] = true_gamma(spec)
        graph, _ = generate_planted_partition(spec)
        sched = AnnealSchedule(seed=cell_seed(seed, 1), restarts=args_dict["restarts"])
        trace = iterate_gamma(graph, q, args_dict["gamma0"], args_dict["tol"],
                              args_dict["max_iter"], sched)
        row.update(gamma_est=trace.final_gamma, iterations=len(trace.iterations),
                   converged=trace.converged, error=trace.diagnostic)
    except Exception as exc:  # recorded per row; the sweep continues
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


FIG1_COLUMNS = ["q", "seed", "gamma_est", "gamma_true", "iterations", "converged", "error"]


def run_fig1(qs, seeds: int, jobs: int = 1, **params) -> list[dict]:
    cells = [(q, i) for q in qs for i in range(seeds)]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            futures = [pool.submit(fig1_cell, q, i, params) for q, i in cells]
            return [f.result() for f in futures]
    return [fig1_cell(q, i, params) for q, i in cells]


def cmd_fig1(args) -> int:
    try:
        qs = [int(x) for x in args.qs.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"--qs must be a comma-separated list of integers, got {args.qs!r}")
    if not qs or min(qs) < 2:
        raise UsageError("every q must be at least 2")
    rows = run_fig1(qs, args.seeds, args.jobs, seed=args.seed, group_size=args.group_size,
                    d_in=args.d_in, d_out=args.d_out, gamma0=args.gamma0, tol=args.tol,
                    max_iter=args.max_iter, restarts=args.restarts)
    buf = io.StringIO()
    w = csv.DictWriter(buf, FIG1_COLUMNS, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def check_equivalence(graph, params: PlantedPartitionParams, trials: int, seed: int, q: int = 2) -> dict:
    """Sample random partitions and measure how constant ``log L - B Q(gamma)`` is."""
    const = equivalence_constants(params, graph.m)
    rng = np.random.default_rng(seed)
    offsets = []
    for _ in range(trials):
        part = Partition(graph, rng.integers(0, q, size=graph.n), q)
        offsets.append(pp_log_likelihood(graph, part, params) - const.B * modularity(graph, part, const.gamma))
    offsets = np.array(offsets)
    mean = float(offsets.mean())
    scale = max(abs(mean), 1e-300)
    spread = float(np.max(np.abs(offsets - mean)) / scale)
    c_err = abs(mean - const.C) / max(abs(const.C), 1e-300)
    return {"B": const.B, "C": const.C, "gamma": const.gamma, "mode": SearchMode.for_coefficient(const.B).value,
            "mean_offset": mean, "max_abs_deviation": float(np.max(np.abs(offsets - mean))),
            "max_rel_deviation": spread, "C_rel_error": c_err,
            "passed": bool(spread <= EQUIVALENCE_TOL and c_err <= EQUIVALENCE_TOL)}


def cmd_check_equivalence(args) -> int:
    if args.omega_in <= 0 or args.omega_out <= 0:
        raise UsageError("rates must be positive")
    if args.omega_in == args.omega_out:
        raise UsageError("degenerate: omega_in == omega_out makes the likelihood independent of the partition")
    graph = load_edgelist(_resolve_input(args.input))
    report = check_equivalence(graph, PlantedPartitionParams(args.omega_in, args.omega_out),
                               args.trials, args.seed, args.q)
    print(json.dumps({"schema": SCHEMA, "command": "check-equivalence", "input": args.input,
                      "omega_in": args.omega_in, "omega_out": args.omega_out,
                      "trials": args.trials, "seed": args.seed, "q": args.q, **report}, indent=1))
    return EXIT_OK if report["passed"] else EXIT_DATA


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ppmod", description="Generalized modularity and planted-partition likelihood tools.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, search=True):
        sp.add_argument("--seed", type=int, default=0)
        if search:
            sp.add_argument("--restarts", type=int, default=5)
            sp.add_argument("--workers", type=int, default=1, help="threads for annealing restarts")

    d = sub.add_parser("detect", help="maximize (or minimize) generalized modularity")
    d.add_argument("--input", required=True, help="edge list path or bundled:NAME")
    d.add_argument("--q", type=int, required=True)
    d.add_argument("--gamma", type=float, default=1.0)
    d.add_argument("--null", choices=[m.value for m in NullModel], default="config")
    d.add_argument("--mode", choices=[m.value for m in SearchMode], default="max")
    d.add_argument("--out", help="partition output file")
    d.add_argument("--format", choices=["json", "csv"], default="json")
    common(d)
    d.set_defaults(func=cmd_detect)

    g = sub.add_parser("gamma", help="estimate the resolution parameter iteratively")
    g.add_argument("--input", required=True)
    g.add_argument("--q", type=int, required=True)
    g.add_argument("--gamma0", type=float, default=1.0)
    g.add_argument("--tol", type=float, default=0.01)
    g.add_argument("--max-iter", type=int, default=10)
    g.add_argument("--out")
    g.add_argument("--format", choices=["json", "csv"], default="json")
    common(g)
    g.set_defaults(func=cmd_gamma)

    s = sub.add_parser("generate", help="sample a planted-partition network")
    s.add_argument("--q", type=int, default=2)
    s.add_argument("--group-size", type=int, default=250)
    s.add_argument("--d-in", type=float, default=16.0)
    s.add_argument("--d-out", type=float, default=8.0)
    s.add_argument("--out", required=True, help="output prefix; writes PREFIX.edges and PREFIX.truth.csv")
    common(s, search=False)
    s.set_defaults(func=cmd_generate)

    f = sub.add_parser("fig1", help="estimated vs true gamma over synthetic networks")
    f.add_argument("--qs", default="2,3,4,6,8,10")
    f.add_argument("--seeds", type=int, default=5, help="instances per q")
    f.add_argument("--group-size", type=int, default=250)
    f.add_argument("--d-in", type=float, default=16.0)
    f.add_argument("--d-out", type=float, default=8.0)
    f.add_argument("--gamma0", type=float, default=1.0)
    f.add_argument("--tol", type=float, default=0.01)
    f.add_argument("--max-iter", type=int, default=10)
    f.add_argument("--restarts", type=int, default=5)
    f.add_argument("--jobs", type=int, default=1)
    f.add_argument("--out")
    f.add_argument("--seed", type=int, default=0)
    f.set_defaults(func=cmd_fig1)

    e = sub.add_parser("check-equivalence", help="verify log L = B Q(gamma) + C on random partitions")
    e.add_argument("--input", required=True)
    e.add_argument("--omega-in", type=float, required=True)
    e.add_argument("--omega-out", type=float, required=True)
    e.add_argument("--trials", type=int, default=100)
    e.add_argument("--q", type=int, default=2)
    common(e, search=False)
    e.set_defaults(func=cmd_check_equivalence)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits on usage errors and --help
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if getattr(args, "q", 2) < 1:
            raise UsageError("--q must be positive")
        return args.func(args)
    except UsageError as exc:
        print(f"ppmod: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (GraphError, OSError, ValueError) as exc:
        print(f"ppmod: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
