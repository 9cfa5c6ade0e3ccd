"""Local-minimum counts of Hopfield nets and spin glasses against n.

Brute force up to --brute-max, sampled descent beyond. Output is CSV.

    python scripts/census_vs_n.py [--ns 6 8 10 12 14] [--patterns 3] [--seeds 5]
"""

import argparse
import csv
import sys

from qenet.cli import CENSUS_CLAIMS
from qenet.landscapes import SpinGlass, census_brute_force, census_sampled, hopfield_from_patterns, random_patterns


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--ns", type=int, nargs="+", default=[6, 8, 10, 12, 14])
    ap.add_argument("--patterns", type=int, default=3)
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--brute-max", type=int, default=16)
    ap.add_argument("--starts", type=int, default=20000)
    args = ap.parse_args()

    for claim in CENSUS_CLAIMS:
        print(f"# reference: {claim}")
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["landscape", "n", "seed", "method", "minima", "coverage"])
    for n in args.ns:
        for seed in range(args.seeds):
            for name, land in (
                ("hopfield", hopfield_from_patterns(random_patterns(n, args.patterns, seed))),
                ("spinglass", SpinGlass(n, seed)),
            ):
                if n <= args.brute_max:
                    c = census_brute_force(land)
                else:
                    c = census_sampled(land, args.starts, seed)
                w.writerow([name, n, seed, c.method, c.count, f"{c.coverage:.4f}"])


if __name__ == "__main__":
    main()
