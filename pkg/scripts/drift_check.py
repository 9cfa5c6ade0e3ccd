"""KMC drift on a uniform washboard chain next to both drift formulas.

    python scripts/drift_check.py [--beta 2.0] [--sigma 0.5] [--trajectories 2000]
"""

import argparse
import math

from qenet.tunneling import MinimaChain, TunnelParams, drift_velocity, rate_backward, rate_forward, simulate_kmc


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--beta", type=float, default=2.0)
    ap.add_argument("--sigma", type=float, default=0.5)
    ap.add_argument("--alpha", type=float, default=0.5)
    ap.add_argument("--tmax", type=float, default=20.0)
    ap.add_argument("--trajectories", type=int, default=2000)
    ap.add_argument("--minima", type=int, default=400)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    p = TunnelParams(sigma=args.sigma, beta=args.beta).with_alpha(args.alpha)
    gf, gb = rate_forward(p), rate_backward(p)
    chain = MinimaChain.uniform(args.minima, p.d, gf, gb)
    st = simulate_kmc(chain, args.tmax, args.trajectories, args.seed, start=args.minima // 2)
    expected = p.d * (gf - gb)
    print(f"gamma+ {gf:.6f}  gamma- {gb:.6f}")
    print(f"KMC slope        {st.slope:.6f} +- {st.slope_stderr:.6f}")
    print(f"d (g+ - g-)      {expected:.6f}  ({(st.slope - expected) / st.slope_stderr:+.2f} standard errors)")
    print(f"corrected drift  {drift_velocity(p, 'corrected'):.6f}")
    print(f"literal drift    {drift_velocity(p, 'literal'):.6f}  (units length*time)")
    print(f"slope / corrected = {st.slope / drift_velocity(p, 'corrected'):.4f}; "
          f"expected 1 + e^-bhs = {1 + math.exp(-p.beta * p.hbar * p.sigma):.4f}")


if __name__ == "__main__":
    main()
