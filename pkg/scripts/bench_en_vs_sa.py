"""Elastic Net against annealing (optionally with refinement) at a matched evaluation budget.

    python scripts/bench_en_vs_sa.py [--config cfg.json] [--methods en sa en+refine] [--out-dir bench_out]
"""

import argparse
import json
from pathlib import Path

from qenet.bench import bench_compare, bench_instances
from qenet.config import METHODS, RunConfig, load_config, override


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--config")
    ap.add_argument("--methods", nargs="+", choices=METHODS)
    ap.add_argument("--n", type=int)
    ap.add_argument("--instances", type=int)
    ap.add_argument("--budget", type=int)
    ap.add_argument("--out-dir", default="bench_out")
    args = ap.parse_args()

    cfg = load_config(args.config) if args.config else RunConfig()
    cfg = override(cfg, "bench", methods=args.methods, n=args.n, instances=args.instances, budget=args.budget)
    b = cfg.bench
    report = bench_compare(bench_instances(cfg), b.methods, b.budget, cfg.seed, cfg)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "bench.csv").write_text(report.to_csv())
    (out / "bench.json").write_text(report.to_json() + "\n")
    print(json.dumps(report.summary(), indent=1))


if __name__ == "__main__":
    main()
