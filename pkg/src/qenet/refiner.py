"""Zero-temperature escape from local minima through wide moves.

From a local minimum, trial states ``k = 2, 3, ..., W`` elementary moves
away are examined, narrowest width first. The first width that offers a
strictly lower state wins; the walker jumps there, descends to the next
local minimum, and never goes back. This is a classical simulation of
barrier penetration: the cost a real tunneling device would pay for a hop
is charged as ``tau = hbar / gamma`` with the rate evaluated at tunneling
length ``d = k``. Mapping barrier width to move count is a modelling
choice, not something derived.

Nothing here solves NP-hard problems in polynomial time; the trial budget
per width makes the classical search cost explicit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InvalidArgument, PreconditionViolation
from .landscapes import Landscape, best_improving, greedy_descent, is_local_minimum
from .tunneling import MinimaChain, TunnelParams, rate_forward, transition_time


@dataclass(frozen=True)
class RefinerConfig:
    max_width: int = 4
    samples_per_width: int = 500
    rate_params: TunnelParams = field(default_factory=TunnelParams)
    seed: int = 0
    max_hops: int = 1000

    def __post_init__(self):
        if self.max_width < 2:
            raise InvalidArgument("max_width must be >= 2")
        if self.samples_per_width < 1 or self.max_hops < 0:
            raise InvalidArgument("samples_per_width must be >= 1 and max_hops >= 0")
        p = self.rate_params
        if p.sigma < p.omega:
            taus = [hop_time_cost(k, self) for k in range(1, self.max_width + 1)]
            if any(b <= a for a, b in zip(taus, taus[1:]) if math.isfinite(a)):
                raise InvalidArgument(
                    "rate_params give a hop time that is not increasing in width; raise eta"
                )


@dataclass(frozen=True)
class HopRecord:
    e_from: float
    e_to: float
    width: int
    tau: float
    trials: int


@dataclass
class RefineResult:
    state: tuple
    energy: float
    start_energy: float
    hops: list[HopRecord]
    trial_evaluations: int
    descent_evaluations: int

    @property
    def total_tau(self) -> float:
        return math.fsum(h.tau for h in self.hops)

    def rate_chain(self, hbar: float = 1.0) -> MinimaChain:
        """Forward-only chain of the visited minima with rates ``hbar / tau``."""
        return MinimaChain.from_rates([hbar / h.tau for h in self.hops])


def hop_time_cost(k: int, config: RefinerConfig) -> float:
    """``hbar / gamma`` at tunneling length ``d = k``; infinite once the rate underflows."""
    if k < 1:
        raise InvalidArgument("width must be >= 1")
    p = replace(config.rate_params, d=float(k))
    gamma = rate_forward(p)
    if gamma == 0.0:
        return math.inf
    return transition_time(gamma, p.hbar)


def find_improving_at_width(landscape: Landscape, s, k: int, samples: int, rng: np.random.Generator):
    """Best strictly lower state ``k`` moves from local minimum ``s``.

    Width 2 is enumerated when the ball fits in ``samples`` evaluations;
    otherwise ``samples`` random width-``k`` walks are drawn (duplicates are
    evaluated once). Returns ``(state or None, energy, evaluations)``.
    """
    if k < 2:
        raise InvalidArgument("width must be >= 2")
    if not is_local_minimum(landscape, s):
        raise PreconditionViolation("refinement must start from a local minimum")
    e_s = landscape._energy(s)
    if k <= 2 and landscape.degree(s) ** k <= samples:
        cands = sorted(landscape.ball(s, k))
    else:
        cands = list(dict.fromkeys(landscape.random_neighbor_at_width(s, k, rng) for _ in range(samples)))
    before = landscape.evaluations
    best, e = best_improving(landscape, e_s, cands)
    return best, e, landscape.evaluations - before


def tunnel_refine(landscape: Landscape, start, config: RefinerConfig = RefinerConfig()) -> RefineResult:
    """Descend, then hop downhill between local minima until no width up to ``max_width`` helps."""
    rng = np.random.default_rng(config.seed)
    ev0 = landscape.evaluations
    start_energy = landscape._energy(tuple(start))
    s = greedy_descent(landscape, start)
    e = landscape._energy(s)
    trial_evals = 0
    hops: list[HopRecord] = []
    widths = range(2, min(config.max_width, landscape.max_width) + 1)
    while len(hops) < config.max_hops:
        for k in widths:
            cand, _, used = find_improving_at_width(landscape, s, k, config.samples_per_width, rng)
            trial_evals += used
            if cand is not None:
                break
        else:
            break
        nxt = greedy_descent(landscape, cand)
        ne = landscape._energy(nxt)
        if not ne < e:
            raise RuntimeError(f"refiner hop did not lower the energy ({e!r} -> {ne!r})")
        hops.append(HopRecord(e, ne, k, hop_time_cost(k, config), used))
        s, e = nxt, ne
    if e > start_energy:
        raise RuntimeError(f"refiner returned a worse state ({start_energy!r} -> {e!r})")
    descent_evals = landscape.evaluations - ev0 - trial_evals
    return RefineResult(s, e, start_energy, hops, trial_evals, descent_evals)
