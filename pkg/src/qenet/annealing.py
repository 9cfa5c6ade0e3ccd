"""Metropolis simulated annealing, cooling schedules and exact hitting times.

The 1-D grid chain here is the smallest system that shows why annealing
gets expensive: escaping a metastable well takes a number of steps that
grows like ``exp(A / T)``. :func:`exact_hitting_time` computes that number
exactly from the Markov chain rather than by sampling.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument, NumericFailure
from .landscapes import Landscape

# long geometric runs would otherwise underflow to T = 0
T_FLOOR = sys.float_info.min


@dataclass(frozen=True)
class Schedule:
    kind: str
    T0: float = 1.0
    ratio: float = 0.999
    D: float = 1.0
    offset: int = 1
    T: float = 1.0

    def __post_init__(self):
        if self.kind == "geometric":
            if not self.T0 > 0 or not 0 < self.ratio < 1:
                raise InvalidArgument("geometric schedule needs T0 > 0 and 0 < ratio < 1")
        elif self.kind == "logarithmic":
            if not self.D > 0 or self.offset < 1:
                raise InvalidArgument("logarithmic schedule needs D > 0 and offset >= 1")
        elif self.kind == "constant":
            if not self.T > 0:
                raise InvalidArgument("constant schedule needs T > 0")
        else:
            raise InvalidArgument(f"unknown schedule kind {self.kind!r}")


def make_schedule(kind: str, **params) -> Schedule:
    return Schedule(kind, **params)


def temperature_at(s: Schedule, step: int) -> float:
    if step < 1:
        raise InvalidArgument("step must be >= 1")
    if s.kind == "geometric":
        return max(s.T0 * s.ratio ** (step - 1), T_FLOOR)
    if s.kind == "logarithmic":
        return max(s.D / math.log(step + s.offset), T_FLOOR)
    return s.T


class DiscreteChain(Landscape):
    """Grid points of a 1-D potential with a +-1 proposal.

    A proposal that would leave the grid keeps the walker in place, so each
    direction always has probability 1/2.
    """

    def __init__(self, energies, temperature: float = 1.0, wells=None, grid=None):
        super().__init__()
        e = np.array(energies, dtype=float)
        if e.ndim != 1 or e.size < 2:
            raise InvalidArgument("need at least 2 grid energies")
        if not np.all(np.isfinite(e)):
            raise InvalidArgument("energies must be finite")
        e.setflags(write=False)
        self.energies = e
        self.temperature = temperature
        # (left minimum, barrier top, right minimum) for double wells
        self.wells = wells
        self.grid = grid

    @property
    def m(self) -> int:
        return self.energies.size

    def _energy(self, state):
        return float(self.energies[state])

    def elementary_neighbors(self, state):
        return [j for j in (state - 1, state + 1) if 0 <= j < self.m]

    def random_neighbor(self, state, rng):
        j = state + (1 if rng.random() < 0.5 else -1)
        return j if 0 <= j < self.m else state

    def random_state(self, rng):
        return int(rng.integers(self.m))

    def states(self):
        return iter(range(self.m))

    def size(self):
        return self.m

    def with_temperature(self, T: float) -> "DiscreteChain":
        return DiscreteChain(self.energies, T, self.wells, self.grid)

    def transition_matrix(self, T: float | None = None) -> np.ndarray:
        T = self.temperature if T is None else T
        if not T > 0:
            raise InvalidArgument("temperature must be positive")
        E = self.energies
        P = np.zeros((self.m, self.m))
        for i in range(self.m):
            for j in (i - 1, i + 1):
                if 0 <= j < self.m:
                    P[i, j] = 0.5 * min(1.0, math.exp(-(E[j] - E[i]) / T))
            P[i, i] = 1.0 - P[i].sum()
        return P

    def boltzmann(self, T: float | None = None) -> np.ndarray:
        T = self.temperature if T is None else T
        w = np.exp(-(self.energies - self.energies.min()) / T)
        return w / w.sum()


def metropolis_step(landscape: Landscape, state, T: float, rng: np.random.Generator, energy=None):
    """One Metropolis move at temperature ``T``; returns ``(state, energy)``."""
    if energy is None:
        energy = landscape.energy(state)
    cand = landscape.random_neighbor(state, rng)
    e = landscape.energy(cand)
    dE = e - energy
    if dE <= 0 or rng.random() < math.exp(-dE / T):
        return cand, e
    return state, energy


@dataclass
class SaTrace:
    step: list[int] = field(default_factory=list)
    temperature: list[float] = field(default_factory=list)
    energy_current: list[float] = field(default_factory=list)
    energy_best: list[float] = field(default_factory=list)

    def rows(self):
        return list(zip(self.step, self.temperature, self.energy_current, self.energy_best))


def run_sa(landscape: Landscape, schedule: Schedule, steps: int, seed: int, start=None):
    """Anneal for ``steps`` Metropolis moves; returns ``(best_state, trace)``."""
    if steps < 1:
        raise InvalidArgument("steps must be >= 1")
    rng = np.random.default_rng(seed)
    state = landscape.random_state(rng) if start is None else start
    energy = landscape.energy(state)
    best, best_e = state, energy
    trace = SaTrace()
    for step in range(1, steps + 1):
        T = temperature_at(schedule, step)
        state, energy = metropolis_step(landscape, state, T, rng, energy)
        if energy < best_e:
            best, best_e = state, energy
        trace.step.append(step)
        trace.temperature.append(T)
        trace.energy_current.append(energy)
        trace.energy_best.append(best_e)
    return best, trace


def double_well_energy(q, h: float, s: float):
    return h * (q**2 - 1.0) ** 2 + s * q


def build_double_well_chain(h: float = 1.0, s: float = -0.25, half_width: float = 1.8, m: int = 121,
                            temperature: float = 1.0) -> DiscreteChain:
    """Grid chain for ``V(q) = h (q^2 - 1)^2 + s q`` on ``[-L, L]``.

    With ``s < 0`` the right well is the global minimum. ``chain.wells``
    holds (left minimum, barrier top, right minimum) indices.
    """
    if m < 5 or not h > 0:
        raise InvalidArgument("need m >= 5 and h > 0")
    q = np.linspace(-half_width, half_width, m)
    E = double_well_energy(q, h, s)
    interior = np.arange(1, m - 1)
    is_min = (E[interior] < E[interior - 1]) & (E[interior] < E[interior + 1])
    mins = interior[is_min]
    if mins.size != 2:
        raise InvalidArgument(f"expected two interior minima, found {mins.size}")
    left, right = int(mins[0]), int(mins[1])
    top = left + int(np.argmax(E[left : right + 1]))
    return DiscreteChain(E, temperature, wells=(left, top, right), grid=q)


def exact_hitting_time(chain: DiscreteChain, start: int, target: int, T: float | None = None) -> float:
    """Expected number of Metropolis steps to first reach ``target`` from ``start``.

    Solves ``(I - Q) h = 1`` over the non-target states with a dense solver.
    """
    T = chain.temperature if T is None else T
    if not T > 0:
        raise InvalidArgument("temperature must be positive")
    if start == target:
        return 0.0
    P = chain.transition_matrix(T)
    keep = np.array([i for i in range(chain.m) if i != target])
    A = np.eye(keep.size) - P[np.ix_(keep, keep)]
    try:
        h = np.linalg.solve(A, np.ones(keep.size))
    except np.linalg.LinAlgError as exc:
        raise NumericFailure(f"hitting-time system is singular: {exc}") from None
    resid = np.abs(A @ h - 1.0).max()
    if not np.all(np.isfinite(h)) or resid > 1e-10 * max(1.0, np.abs(h).max()):
        raise NumericFailure(f"hitting-time solve inaccurate (residual {resid:.3g})")
    return float(h[np.searchsorted(keep, start)])


def simulate_hitting_times(chain: DiscreteChain, start: int, target: int, runs: int, seed: int,
                           T: float | None = None, max_steps: int = 10_000_000) -> np.ndarray:
    """Sampled first-passage step counts, all runs advanced in lockstep."""
    T = chain.temperature if T is None else T
    rng = np.random.default_rng(seed)
    E = chain.energies
    pos = np.full(runs, start)
    hit = np.zeros(runs, dtype=np.int64)
    alive = pos != target
    steps = 0
    while alive.any():
        steps += 1
        if steps > max_steps:
            raise NumericFailure("hitting-time simulation exceeded max_steps")
        idx = np.flatnonzero(alive)
        cur = pos[idx]
        prop = cur + np.where(rng.random(idx.size) < 0.5, 1, -1)
        inside = (prop >= 0) & (prop < chain.m)
        prop = np.where(inside, prop, cur)
        dE = E[prop] - E[cur]
        acc = (dE <= 0) | (rng.random(idx.size) < np.exp(-np.maximum(dE, 0) / T))
        pos[idx] = np.where(acc, prop, cur)
        done = pos[idx] == target
        hit[idx[done]] = steps
        alive[idx[done]] = False
    return hit


def arrhenius_fit(temperatures, times):
    """Least-squares line of ``log(time)`` against ``1/T``; returns (slope, intercept, r2)."""
    x = 1.0 / np.asarray(temperatures, dtype=float)
    y = np.log(np.asarray(times, dtype=float))
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    r2 = 1.0 - (resid**2).sum() / ((y - y.mean()) ** 2).sum()
    return float(slope), float(intercept), float(r2)


def barrier_height(chain: DiscreteChain) -> float:
    left, top, _ = chain.wells
    return float(chain.energies[top] - chain.energies[left])


def hitting_time_scaling(chain: DiscreteChain | None = None, fractions=(0.4, 0.3, 0.2, 0.15, 0.1)):
    """Exact escape times from the metastable well at ``T = f * barrier``.

    Returns ``(temperatures, times, (slope, intercept, r2))``.
    """
    chain = build_double_well_chain() if chain is None else chain
    left, _, right = chain.wells
    dV = barrier_height(chain)
    temps = [f * dV for f in fractions]
    times = [exact_hitting_time(chain, left, right, T) for T in temps]
    return temps, times, arrhenius_fit(temps, times)
