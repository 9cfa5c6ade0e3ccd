"""Side-by-side comparison of Elastic Net, annealing and the refiner.

Budgets are counted in energy evaluations: one Elastic Net iteration (one
gradient of the free energy) or one tour-length evaluation each count as
one. The refiner's extra evaluations are reported on top of its input
stage's.
"""

from __future__ import annotations

import csv
import io
import json
import statistics
import time
from pathlib import Path
from dataclasses import dataclass, field, replace
from itertools import combinations

import numpy as np

from . import elastic_net
from .annealing import run_sa
from .config import RunConfig
from .instances import (
    BRUTE_FORCE_MAX_N,
    TspInstance,
    brute_force_optimal,
    canonical,
    make_tour,
    parse_tsplib,
    random_euclidean,
)
from .landscapes import TourLandscape
from .refiner import tunnel_refine

ROW_FIELDS = ("instance", "n", "seed", "method", "length", "gap", "evaluations", "tau_total")
TIE_TOL = 1e-9
BASES = ("en", "sa")


@dataclass
class BenchRow:
    instance: str
    n: int
    seed: int
    method: str
    length: float
    gap: float | None
    evaluations: int
    tau_total: float
    wall_time: float = field(default=0.0, compare=False)


@dataclass
class BenchReport:
    rows: list[BenchRow]

    def lengths(self, method):
        return [r.length for r in self.rows if r.method == method]

    def summary(self) -> dict:
        methods = list(dict.fromkeys(r.method for r in self.rows))
        per = {}
        for m in methods:
            rows = [r for r in self.rows if r.method == m]
            gaps = [r.gap for r in rows if r.gap is not None]
            per[m] = {
                "median_length": statistics.median(r.length for r in rows),
                "mean_gap": statistics.fmean(gaps) if gaps else None,
                "evaluations": sum(r.evaluations for r in rows),
            }
        by_inst = {}
        for r in self.rows:
            by_inst.setdefault(r.instance, {})[r.method] = r.length
        wtl = {}
        for a, b in combinations(methods, 2):
            w = t = l = 0
            for lengths in by_inst.values():
                if a in lengths and b in lengths:
                    diff = lengths[a] - lengths[b]
                    if abs(diff) <= TIE_TOL:
                        t += 1
                    elif diff < 0:
                        w += 1
                    else:
                        l += 1
            wtl[f"{a}_vs_{b}"] = {"win": w, "tie": t, "loss": l}
        out = {"methods": per, "win_tie_loss": wtl}
        if "en" in per and "sa" in per:
            en, sa = per["en"]["median_length"], per["sa"]["median_length"]
            out["median_comparison"] = {
                "en_median": en,
                "sa_median": sa,
                "en_over_sa": en / sa,
                "better": "en" if en < sa - TIE_TOL else ("sa" if sa < en - TIE_TOL else "tie"),
            }
        return out

    def to_csv(self, timing: bool = False) -> str:
        buf = io.StringIO()
        fields = ROW_FIELDS + (("wall_time",) if timing else ())
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(fields)
        for r in self.rows:
            w.writerow([_fmt(getattr(r, f)) for f in fields])
        return buf.getvalue()

    def to_json(self, timing: bool = False) -> str:
        fields = ROW_FIELDS + (("wall_time",) if timing else ())
        rows = [{f: getattr(r, f) for f in fields} for r in self.rows]
        return json.dumps({"rows": rows, "summary": self.summary()}, indent=2, sort_keys=True)


def _fmt(v):
    if v is None:
        return ""
    return repr(v) if isinstance(v, float) else v


def derived_seed(seed: int, *keys: int) -> int:
    return int(np.random.SeedSequence([seed, *keys]).generate_state(1)[0])


def _span(inst: TspInstance) -> float:
    return float((inst.coords.max(axis=0) - inst.coords.min(axis=0)).max())


def run_method(inst: TspInstance, method: str, cfg: RunConfig, budget: int, seed: int):
    """One solver run; returns ``(tour, evaluations, tau_total)``."""
    base, _, refine = method.partition("+")
    land = TourLandscape(inst)
    if base == "en":
        params = replace(cfg.en, max_iters=min(cfg.en.max_iters, budget))
        tour, trace = elastic_net.solve(inst, params, seed)
        evals = trace.iters[-1]
        state = canonical(tour.order)
    else:
        steps = max(budget - 1, 1)  # the start state costs one evaluation
        state, _ = run_sa(land, cfg.sa.build(_span(inst), steps), steps, seed)
        evals = land.evaluations
    tau = 0.0
    if refine:
        res = tunnel_refine(land, state, replace(cfg.refiner, seed=seed))
        state = res.state
        evals += res.trial_evaluations + res.descent_evaluations
        tau = res.total_tau
    return make_tour(inst, state), evals, tau


def bench_compare(instances, methods, budget: int, seed: int, cfg: RunConfig = RunConfig()) -> BenchReport:
    """Run every method on every instance with derived seeds.

    Gaps against the exhaustive optimum are filled in when n <= 11.
    """
    rows = []
    for i, inst in enumerate(instances):
        opt = brute_force_optimal(inst).length if inst.n <= BRUTE_FORCE_MAX_N else None
        for method in methods:
            # refined variants share their base's seed, so they refine that exact tour
            s = derived_seed(seed, i, BASES.index(method.partition("+")[0]))
            t0 = time.perf_counter()
            tour, evals, tau = run_method(inst, method, cfg, budget, s)
            wall = time.perf_counter() - t0
            gap = None if opt is None else max(0.0, (tour.length - opt) / opt)
            rows.append(BenchRow(inst.name, inst.n, s, method, tour.length, gap, evals, tau, wall))
    return BenchReport(rows)


def bench_instances(cfg: RunConfig):
    if cfg.bench.tsp_files:
        return [parse_tsplib(Path(p).read_text()) for p in cfg.bench.tsp_files]
    return [random_euclidean(cfg.bench.n, cfg.seed + i) for i in range(cfg.bench.instances)]
