"""Incoherent (dissipative) tunneling rates and a kinetic Monte Carlo hopper.

Units: hbar = k_B = 1 unless set otherwise. ``delta``, ``omega`` and
``sigma`` are frequencies, ``eta`` is a friction coefficient
(action / length^2), ``d`` a length and ``beta`` an inverse temperature.

Near zero temperature the forward rate between two biased wells is

    gamma = (pi / 2) (delta^2 / omega) (sigma / omega)^(2 alpha - 1) / Gamma(2 alpha)

with damping ``alpha = eta d^2 / (2 pi hbar)``, and reverse hops vanish.
At finite temperature the backward rate used here is the detailed-balance
value ``gamma exp(-beta hbar sigma)``. That is an extension, needed so
the drift can be checked against simulation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DivergentRate, InvalidArgument, StuckState, UnreachableMinimum


@dataclass(frozen=True)
class TunnelParams:
    delta: float = 1.0
    omega: float = 1.0
    sigma: float = 0.5
    eta: float = math.pi  # gives alpha = 1/2 at d = 1, hbar = 1
    d: float = 1.0
    hbar: float = 1.0
    beta: float = math.inf

    def __post_init__(self):
        for name in ("delta", "omega", "d", "hbar"):
            if not getattr(self, name) > 0:
                raise InvalidArgument(f"{name} must be positive")
        if self.sigma < 0 or self.eta < 0:
            raise InvalidArgument("sigma and eta must be non-negative")
        if not self.beta > 0:
            raise InvalidArgument("beta must be positive (use math.inf for T = 0)")

    @property
    def alpha(self) -> float:
        return self.eta * self.d**2 / (2.0 * math.pi * self.hbar)

    def with_alpha(self, alpha: float) -> "TunnelParams":
        """Copy with ``eta`` chosen so that the damping equals ``alpha``."""
        return replace(self, eta=2.0 * math.pi * self.hbar * alpha / self.d**2)


def rate_forward(p: TunnelParams) -> float:
    a = p.alpha
    if not a > 0:
        raise InvalidArgument("damping alpha must be positive (eta > 0)")
    expo = 2.0 * a - 1.0
    if p.sigma == 0:
        if expo < 0:
            raise DivergentRate("sigma = 0 with 2*alpha < 1 gives an infinite rate")
        bias = 1.0 if expo == 0 else 0.0
        return 0.5 * math.pi * p.delta**2 / p.omega * bias / math.gamma(2.0 * a)
    prefactor = 0.5 * math.pi * p.delta**2 / p.omega
    try:
        return prefactor * (p.sigma / p.omega) ** expo / math.gamma(2.0 * a)
    except OverflowError:
        # wide barriers: Gamma(2 alpha) overflows a double, work in logs
        log_rate = math.log(prefactor) + expo * math.log(p.sigma / p.omega) - math.lgamma(2.0 * a)
        return math.exp(log_rate)


def rate_backward(p: TunnelParams) -> float:
    fwd = rate_forward(p)
    if math.isinf(p.beta):
        return 0.0
    return fwd * math.exp(-p.beta * p.hbar * p.sigma)


def transition_time(gamma: float, hbar: float = 1.0) -> float:
    """``hbar / gamma``; the proportionality constant is taken to be one."""
    if not gamma > 0:
        raise InvalidArgument("rate must be positive")
    return hbar / gamma


def drift_velocity(p: TunnelParams, variant: str = "corrected") -> float:
    """Mean drift on a tilted periodic potential.

    ``literal`` evaluates ``(d hbar / gamma) tanh(beta hbar sigma / 2)``,
    which has units of length * time. ``corrected`` evaluates the
    dimensionally consistent ``d gamma tanh(beta hbar sigma / 2)``.
    """
    if math.isinf(p.beta):
        raise InvalidArgument("drift_velocity needs a finite beta")
    gamma = rate_forward(p)
    th = math.tanh(p.beta * p.hbar * p.sigma / 2.0)
    if variant == "literal":
        return p.d * p.hbar / gamma * th
    if variant == "corrected":
        return p.d * gamma * th
    raise InvalidArgument(f"unknown variant {variant!r}")


@dataclass(frozen=True, eq=False)
class MinimaChain:
    """Local minima on a line with per-barrier hop rates.

    ``forward_rates[i]`` is the rate from minimum ``i`` to ``i + 1`` and
    ``backward_rates[i]`` the rate from ``i + 1`` back to ``i``.
    """

    positions: np.ndarray
    forward_rates: np.ndarray
    backward_rates: np.ndarray

    def __post_init__(self):
        q = np.array(self.positions, dtype=float)
        f = np.array(self.forward_rates, dtype=float)
        b = np.array(self.backward_rates, dtype=float)
        if q.ndim != 1 or q.size < 2:
            raise InvalidArgument("need at least two minima")
        if f.shape != (q.size - 1,) or b.shape != (q.size - 1,):
            raise InvalidArgument("need one forward and one backward rate per barrier")
        if np.any(np.diff(q) <= 0):
            raise InvalidArgument("positions must be strictly increasing")
        if np.any(f < 0) or np.any(b < 0) or not np.all(np.isfinite(f)) or not np.all(np.isfinite(b)):
            raise InvalidArgument("rates must be finite and non-negative")
        for name, arr in (("positions", q), ("forward_rates", f), ("backward_rates", b)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def from_rates(cls, forward, backward=None, spacing: float = 1.0):
        forward = np.asarray(forward, dtype=float)
        backward = np.zeros_like(forward) if backward is None else backward
        return cls(spacing * np.arange(forward.size + 1), forward, backward)

    @classmethod
    def uniform(cls, n_minima: int, spacing: float, forward: float, backward: float = 0.0):
        return cls(spacing * np.arange(n_minima), np.full(n_minima - 1, forward),
                   np.full(n_minima - 1, backward))

    @classmethod
    def from_params(cls, p: TunnelParams, n_minima: int):
        """Uniform washboard chain with spacing ``d`` and the model's two rates."""
        return cls.uniform(n_minima, p.d, rate_forward(p), rate_backward(p))

    @property
    def size(self) -> int:
        return self.positions.size

    def exit_rates(self, i: int) -> tuple[float, float]:
        up = self.forward_rates[i] if i < self.size - 1 else 0.0
        down = self.backward_rates[i - 1] if i > 0 else 0.0
        return float(up), float(down)


@dataclass
class KmcStats:
    times: np.ndarray
    mean_q: np.ndarray
    stderr_q: np.ndarray
    slopes: np.ndarray  # per-trajectory least-squares slope of q(t)
    first_passage: np.ndarray  # time to reach the last minimum, inf if never

    def rows(self):
        return list(zip(self.times.tolist(), self.mean_q.tolist(), self.stderr_q.tolist()))

    @property
    def slope(self) -> float:
        return float(self.slopes.mean())

    @property
    def slope_stderr(self) -> float:
        return float(self.slopes.std(ddof=1) / math.sqrt(self.slopes.size))

    def mean_first_passage(self) -> tuple[float, float]:
        fp = self.first_passage
        if not np.all(np.isfinite(fp)):
            raise UnreachableMinimum("some trajectories never reached the last minimum")
        return float(fp.mean()), float(fp.std(ddof=1) / math.sqrt(fp.size))


def _trajectory(chain: MinimaChain, start: int, t_max: float, rng, to_end: bool):
    """Jump times and visited indices of one trajectory, plus its first-passage time."""
    last = chain.size - 1
    times, states = [0.0], [start]
    t, i = 0.0, start
    first_passage = 0.0 if start == last else math.inf
    while True:
        done = not to_end or math.isfinite(first_passage)
        if t >= t_max and done:
            break
        up, down = chain.exit_rates(i)
        total = up + down
        if total == 0:
            break
        t += rng.exponential(1.0 / total)
        if t > t_max and done:
            break
        i = i + 1 if rng.random() * total < up else i - 1
        times.append(t)
        states.append(i)
        if i == last and math.isinf(first_passage):
            first_passage = t
    return np.array(times), np.array(states), first_passage


def simulate_kmc(chain: MinimaChain, t_max: float, trajectories: int, seed: int,
                 start: int = 0, grid_points: int = 101, first_passage: bool = False) -> KmcStats:
    """Gillespie simulation of hops along the chain.

    Each trajectory gets its own generator spawned from ``seed``. Positions
    are sampled on a uniform grid over ``[0, t_max]``. With
    ``first_passage=True`` trajectories run past ``t_max`` until they reach
    the last minimum, so ``KmcStats.first_passage`` is complete.
    """
    if not t_max > 0 or trajectories < 2:
        raise InvalidArgument("need t_max > 0 and at least 2 trajectories")
    if not 0 <= start < chain.size:
        raise InvalidArgument("start index out of range")
    if sum(chain.exit_rates(start)) == 0:
        raise StuckState(f"all rates out of minimum {start} are zero")
    if first_passage and np.any(chain.forward_rates[start:] == 0):
        raise UnreachableMinimum("a zero forward rate blocks the last minimum")
    grid = np.linspace(0.0, t_max, grid_points)
    q = np.empty((trajectories, grid_points))
    fp = np.empty(trajectories)
    children = np.random.SeedSequence(seed).spawn(trajectories)
    for n, ss in enumerate(children):
        times, states, fp[n] = _trajectory(chain, start, t_max, np.random.default_rng(ss), first_passage)
        idx = np.searchsorted(times, grid, side="right") - 1
        q[n] = chain.positions[states[idx]]
    q -= chain.positions[start]
    tc = grid - grid.mean()
    slopes = (q @ tc) / (tc @ tc)
    se = q.std(axis=0, ddof=1) / math.sqrt(trajectories)
    return KmcStats(grid, q.mean(axis=0), se, slopes, fp)


def mean_first_passage_analytic(chain: MinimaChain) -> float:
    """Sum of ``1 / gamma_i`` over barriers, valid when no backward hops occur."""
    if np.any(chain.backward_rates != 0):
        raise InvalidArgument("analytic first passage requires zero backward rates")
    if np.any(chain.forward_rates <= 0):
        raise UnreachableMinimum("a zero forward rate blocks the last minimum")
    return math.fsum(1.0 / g for g in chain.forward_rates)
