"""Scan seeds for 8-city instances where a short annealing run stalls above the optimum.

A seed qualifies when greedy 2-opt descent from the annealing result ends
at a local minimum strictly longer than the exhaustive optimum. The first
20 such seeds are written to tests/fixtures/refiner_fixtures.json.

    python scripts/mine_refiner_fixtures.py [--count 20] [--out PATH]
"""

import argparse
import json
from pathlib import Path

from qenet.annealing import run_sa
from qenet.config import SaSettings
from qenet.instances import brute_force_optimal, random_euclidean
from qenet.landscapes import TourLandscape, greedy_descent

N = 8
SA = SaSettings(schedule="geometric", t0=0.1, t_final_ratio=0.05, steps=150)


def stalled(seed):
    inst = random_euclidean(N, seed)
    land = TourLandscape(inst)
    span = float((inst.coords.max(axis=0) - inst.coords.min(axis=0)).max())
    best, _ = run_sa(land, SA.build(span), SA.steps, seed)
    local = greedy_descent(land, best)
    opt = brute_force_optimal(inst)
    if land._energy(local) <= opt.length + 1e-9:
        return None
    return {
        "seed": seed,
        "n": N,
        "sa_tour": list(best),
        "sa_length": land._energy(best),
        "local_min": list(local),
        "local_min_length": land._energy(local),
        "optimum": list(opt.order),
        "optimum_length": opt.length,
    }


def mine(count):
    found, seed = [], 0
    while len(found) < count:
        rec = stalled(seed)
        if rec:
            found.append(rec)
        seed += 1
    return found


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--count", type=int, default=20)
    ap.add_argument("--out", default=str(Path(__file__).parent.parent / "tests" / "fixtures" / "refiner_fixtures.json"))
    args = ap.parse_args()
    payload = {"sa": SA.__dict__, "fixtures": mine(args.count)}
    Path(args.out).write_text(json.dumps(payload, indent=1) + "\n")
    print(f"wrote {len(payload['fixtures'])} fixtures to {args.out}")
