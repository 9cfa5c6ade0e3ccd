"""Command-line entry point: ``qenet <subcommand> ...``.

Exit codes: 0 success, 1 usage error, 2 bad input data, 3 numeric or IO
failure. All randomness comes from ``--seed`` (or the config's ``seed``).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .annealing import SaTrace, run_sa
from .bench import bench_compare, bench_instances
from .config import RunConfig, load_config, override
from .elastic_net import EnTrace, extract_tour, run_elastic_net
from .errors import DataError, NumericFailure, ParseError
from .instances import (
    canonical,
    make_tour,
    parse_tour,
    parse_tsplib,
    random_euclidean,
    write_tour,
    write_tsplib,
)
from .landscapes import (
    BITSTRING_MAX_N,
    TOUR_CENSUS_MAX_N,
    SpinGlass,
    TourLandscape,
    census_brute_force,
    census_sampled,
    energy_histogram,
    hopfield_from_patterns,
    random_patterns,
)
from .refiner import tunnel_refine
from .tunneling import (
    KmcStats,
    MinimaChain,
    drift_velocity,
    mean_first_passage_analytic,
    rate_backward,
    rate_forward,
    simulate_kmc,
)

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3

TRACE_HEADERS = {
    EnTrace: ("iter", "k", "free_energy", "max_city_dist"),
    SaTrace: ("step", "temperature", "energy_current", "energy_best"),
    KmcStats: ("t", "mean_q", "stderr_q"),
}

# Reference figures for census reports. Both are large-n statements and are
# not expected to show up at the sizes enumerated here.
CENSUS_CLAIMS = [
    "Hopfield net with random patterns: about 0.138 n stored minima (large-n capacity result)",
    "Infinite-range spin glass: local-minimum count grows like a small power of n, not exp(n)",
]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}\n{self.format_usage()}")


def _num(v):
    return repr(v) if isinstance(v, float) else str(v)


def emit_traces(trace, path, fmt: str = "csv") -> None:
    """Write a solver trace as CSV (header from ``TRACE_HEADERS``) or JSON rows."""
    header = TRACE_HEADERS[type(trace)]
    rows = trace.rows()
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows([_num(v) for v in row] for row in rows)
        text = buf.getvalue()
    elif fmt == "json":
        text = json.dumps([dict(zip(header, row)) for row in rows], indent=1) + "\n"
    else:
        raise ValueError(f"unknown trace format {fmt!r}")
    Path(path).write_text(text)


def _write(path, text):
    Path(path).write_text(text)


def _read_instance(path):
    return parse_tsplib(Path(path).read_text())


def _config(args) -> RunConfig:
    cfg = load_config(args.config) if getattr(args, "config", None) else RunConfig()
    return override(cfg, seed=args.seed)


# --- subcommands -------------------------------------------------------------


def cmd_gen(args):
    inst = random_euclidean(args.n, args.seed if args.seed is not None else 0)
    if args.name:
        inst = type(inst)(args.name, inst.coords)
    _write(args.out, write_tsplib(inst))
    print(f"wrote {inst.n} cities to {args.out}")


def cmd_solve_en(args):
    cfg = _config(args)
    inst = _read_instance(args.inp)
    string, trace = run_elastic_net(inst, cfg.en, cfg.seed)
    tour = extract_tour(inst, string)
    if args.out_tour:
        _write(args.out_tour, write_tour(tour, inst.name))
    if args.trace:
        emit_traces(trace, args.trace, args.trace_format)
    print(f"length {tour.length!r} after {trace.iters[-1]} iterations")


def cmd_solve_sa(args):
    cfg = _config(args)
    cfg = override(cfg, "sa", schedule=args.schedule, steps=args.steps)
    inst = _read_instance(args.inp)
    span = float((inst.coords.max(axis=0) - inst.coords.min(axis=0)).max())
    land = TourLandscape(inst)
    best, trace = run_sa(land, cfg.sa.build(span), cfg.sa.steps, cfg.seed)
    tour = make_tour(inst, best)
    if args.out_tour:
        _write(args.out_tour, write_tour(tour, inst.name))
    if args.trace:
        emit_traces(trace, args.trace, args.trace_format)
    print(f"length {tour.length!r} after {cfg.sa.steps} steps")


def cmd_refine(args):
    cfg = _config(args)
    rc = override(cfg.refiner, max_width=args.max_width, samples_per_width=args.samples)
    rc = replace(rc, seed=cfg.seed)
    inst = _read_instance(args.inp)
    order = parse_tour(Path(args.tour).read_text())
    if len(order) != inst.n:
        raise ParseError(f"tour has {len(order)} cities, instance has {inst.n}")
    land = TourLandscape(inst)
    res = tunnel_refine(land, canonical(order), rc)
    tour = make_tour(inst, res.state)
    if args.out_tour:
        _write(args.out_tour, write_tour(tour, inst.name))
    if args.hops_json:
        hops = [{"width": h.width, "e_from": h.e_from, "e_to": h.e_to, "tau": h.tau} for h in res.hops]
        _write(args.hops_json, json.dumps(hops, indent=1) + "\n")
    print(f"length {res.start_energy!r} -> {tour.length!r} in {len(res.hops)} hops")


def _read_rate_csv(path) -> MinimaChain:
    rows = list(csv.DictReader(io.StringIO(Path(path).read_text())))
    if not rows or not {"forward", "backward"} <= set(rows[0]):
        raise ParseError(f"{path}: expected header with forward,backward columns", 1)
    fwd, bwd = [], []
    for line, row in enumerate(rows, start=2):
        try:
            fwd.append(float(row["forward"]))
            bwd.append(float(row["backward"]))
        except (TypeError, ValueError):
            raise ParseError(f"{path}: malformed rate row {row}", line) from None
    return MinimaChain.from_rates(fwd, bwd)


def cmd_tunnel_sim(args):
    cfg = _config(args)
    p = override(cfg.tunnel, delta=args.delta, omega=args.omega, sigma=args.sigma,
                 eta=args.eta, d=args.d, beta=args.beta)
    summary = {"rates": args.rates, "t_max": args.tmax, "trajectories": args.trajectories, "seed": cfg.seed}
    if args.rates == "params":
        chain = MinimaChain.from_params(p, args.minima)
        start = args.start if args.start is not None else args.minima // 2
        gf, gb = rate_forward(p), rate_backward(p)
        summary.update(alpha=p.alpha, gamma_forward=gf, gamma_backward=gb, expected_slope=p.d * (gf - gb))
        if math.isfinite(p.beta):
            summary["drift_velocity"] = {v: drift_velocity(p, v) for v in ("literal", "corrected")}
    else:
        chain = _read_rate_csv(args.rates)
        start = args.start if args.start is not None else 0
    forward_only = not chain.backward_rates.any() and chain.forward_rates[start:].all()
    track = forward_only and args.rates != "params"
    stats = simulate_kmc(chain, args.tmax, args.trajectories, cfg.seed, start=start, first_passage=track)
    summary.update(start=start, fitted_slope=stats.slope, slope_stderr=stats.slope_stderr)
    if track:
        mean, se = stats.mean_first_passage()
        summary["mean_first_passage"] = {
            "kmc": mean, "stderr": se, "analytic": mean_first_passage_analytic(chain) if start == 0 else None,
        }
    emit_traces(stats, args.out, "csv")
    summary_path = args.summary or str(Path(args.out).with_suffix(".json"))
    _write(summary_path, json.dumps(summary, indent=1, sort_keys=True) + "\n")
    print(f"slope {stats.slope!r} +- {stats.slope_stderr!r}")


def cmd_census(args):
    seed = args.seed if args.seed is not None else 0
    n = args.n
    report = {"landscape": args.landscape, "n": n, "seed": seed, "reference_claims": CENSUS_CLAIMS}
    if args.landscape == "hopfield":
        p = args.patterns
        land = hopfield_from_patterns(random_patterns(n, p, seed))
        report["p"] = p
        brute_ok = n <= BITSTRING_MAX_N
        default_starts = 10 * 2 ** min(n, BITSTRING_MAX_N)
    elif args.landscape == "spinglass":
        land = SpinGlass(n, seed)
        brute_ok = n <= BITSTRING_MAX_N
        default_starts = 10 * 2 ** min(n, BITSTRING_MAX_N)
    else:
        land = TourLandscape(random_euclidean(n, seed))
        brute_ok = n <= TOUR_CENSUS_MAX_N
        default_starts = 1000
    method = args.method
    if method == "auto":
        method = "brute" if brute_ok else "sampled"
    if method == "brute":
        census = census_brute_force(land)
    else:
        census = census_sampled(land, args.starts or default_starts, seed)
    report.update(
        method=method,
        starts=census.starts,
        minima_count=census.count,
        energies_histogram=energy_histogram(census),
        coverage_estimate=census.coverage,
    )
    _write(args.out, json.dumps(report, indent=1, sort_keys=True) + "\n")
    print(f"{census.count} local minima ({method})")


def cmd_bench(args):
    cfg = _config(args)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    b = cfg.bench
    report = bench_compare(bench_instances(cfg), b.methods, b.budget, cfg.seed, cfg)
    _write(out / "bench.csv", report.to_csv(timing=args.timing))
    _write(out / "bench.json", report.to_json(timing=args.timing) + "\n")
    cmp = report.summary().get("median_comparison")
    if cmp:
        print(f"median length: en {cmp['en_median']!r} vs sa {cmp['sa_median']!r} "
              f"(ratio {cmp['en_over_sa']:.4f}, better: {cmp['better']})")


# --- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="qenet", description="Elastic Net, annealing and tunneling-style refinement for the TSP")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="generate a random Euclidean instance")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.add_argument("--name")
    p.set_defaults(func=cmd_gen)

    def solver_io(p):
        p.add_argument("--in", dest="inp", required=True)
        p.add_argument("--seed", type=int)
        p.add_argument("--config")
        p.add_argument("--out-tour")
        p.add_argument("--trace")
        p.add_argument("--trace-format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("solve-en", help="solve with the Elastic Net")
    solver_io(p)
    p.set_defaults(func=cmd_solve_en)

    p = sub.add_parser("solve-sa", help="solve with simulated annealing over 2-opt moves")
    solver_io(p)
    p.add_argument("--schedule", choices=("geometric", "logarithmic"))
    p.add_argument("--steps", type=int)
    p.set_defaults(func=cmd_solve_sa)

    p = sub.add_parser("refine", help="escape 2-opt local minima with wide moves")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--tour", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--config")
    p.add_argument("--max-width", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--out-tour")
    p.add_argument("--hops-json")
    p.set_defaults(func=cmd_refine)

    p = sub.add_parser("tunnel-sim", help="kinetic Monte Carlo over a chain of minima")
    p.add_argument("--rates", required=True, help="'params' or a CSV with forward,backward columns")
    p.add_argument("--tmax", type=float, required=True)
    p.add_argument("--trajectories", type=int, default=1000)
    p.add_argument("--seed", type=int)
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.add_argument("--summary")
    p.add_argument("--minima", type=int, default=201)
    p.add_argument("--start", type=int)
    for name in ("delta", "omega", "sigma", "eta", "d", "beta"):
        p.add_argument(f"--{name}", type=float)
    p.set_defaults(func=cmd_tunnel_sim)

    p = sub.add_parser("census", help="count local minima of a landscape")
    p.add_argument("--landscape", choices=("hopfield", "spinglass", "tour"), required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--patterns", type=int, default=1)
    p.add_argument("--seed", type=int)
    p.add_argument("--method", choices=("auto", "brute", "sampled"), default="auto")
    p.add_argument("--starts", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_census)

    p = sub.add_parser("bench", help="compare methods at a matched evaluation budget")
    p.add_argument("--config")
    p.add_argument("--seed", type=int)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--timing", action="store_true", help="include wall-clock times (breaks byte-identical output)")
    p.set_defaults(func=cmd_bench)
    return ap


def cmd_dispatch(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        args.func(args)
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericFailure as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"io error: {exc.filename or ''}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def main():
    sys.exit(cmd_dispatch())


if __name__ == "__main__":
    main()
