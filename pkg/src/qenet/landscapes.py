"""Discrete energy landscapes and local-minimum censuses.

A landscape exposes an energy, a symmetric set of elementary (width-1)
moves, and random walks of ``k`` elementary moves. States are tuples, so
they are hashable and totally ordered; ties are always broken towards
the smallest state.

Local minima are defined with strict improvement: a state is a minimum
if no elementary neighbour is lower by more than ``ENERGY_TOL``. Plateau
states therefore count as minima.

For tours the elementary move is 2-opt (reverse a contiguous segment).
That choice of "step" is an interpretation; nothing more specific is
available for tour spaces.
"""

from __future__ import annotations

import itertools
from abc import ABC, abstractmethod
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np

from .errors import InstanceTooLarge, InvalidArgument
from .instances import TspInstance, canonical, canonical_tours, tour_count

ENERGY_TOL = 1e-12
BITSTRING_MAX_N = 20
TOUR_CENSUS_MAX_N = 9


class Landscape(ABC):
    """Energy function over a finite state space with width-1 moves.

    ``evaluations`` counts calls to :meth:`energy` and is the budget unit
    used when comparing methods.
    """

    # widest walk that random_neighbor_at_width accepts
    max_width = 1 << 30

    def __init__(self):
        self.evaluations = 0

    def energy(self, state) -> float:
        self.evaluations += 1
        return self._energy(state)

    @abstractmethod
    def _energy(self, state) -> float: ...

    @abstractmethod
    def elementary_neighbors(self, state) -> list: ...

    @abstractmethod
    def random_state(self, rng: np.random.Generator): ...

    def random_neighbor(self, state, rng: np.random.Generator):
        nbrs = self.elementary_neighbors(state)
        return nbrs[rng.integers(len(nbrs))]

    def random_neighbor_at_width(self, state, k: int, rng: np.random.Generator):
        """Walk ``k`` elementary moves, never immediately undoing the previous one."""
        prev, cur = None, state
        for _ in range(k):
            nxt = self.random_neighbor(cur, rng)
            while nxt == prev or nxt == cur:
                nxt = self.random_neighbor(cur, rng)
            prev, cur = cur, nxt
        return cur

    def ball(self, state, k: int) -> set:
        """All states reached by exactly ``k`` non-undoing elementary moves, minus ``state``."""
        frontier = {(None, state)}
        for _ in range(k):
            frontier = {
                (cur, nxt)
                for prev, cur in frontier
                for nxt in self.elementary_neighbors(cur)
                if nxt != prev
            }
        return {s for _, s in frontier} - {state}

    def degree(self, state) -> int:
        return len(self.elementary_neighbors(state))

    def states(self) -> Iterator:
        raise InstanceTooLarge(f"{type(self).__name__} does not enumerate its states")

    def size(self) -> int:
        raise InstanceTooLarge(f"{type(self).__name__} has no enumerable size")


class TourLandscape(Landscape):
    """Symmetric tours in canonical form; energy is tour length, moves are 2-opt."""

    def __init__(self, inst: TspInstance):
        super().__init__()
        self.inst = inst
        self.n = inst.n
        self._d = inst.distances
        # segment reversals over positions 1..n-1, minus the full reversal
        self._moves = [
            (i, j) for i in range(1, self.n) for j in range(i + 1, self.n) if (i, j) != (1, self.n - 1)
        ]

    def _energy(self, state):
        idx = np.fromiter(state, dtype=np.intp, count=self.n)
        return float(self._d[idx, np.roll(idx, -1)].sum())

    def apply(self, state, move):
        i, j = move
        return canonical(state[:i] + state[i : j + 1][::-1] + state[j + 1 :])

    def elementary_neighbors(self, state):
        return [self.apply(state, m) for m in self._moves]

    def random_neighbor(self, state, rng):
        return self.apply(state, self._moves[rng.integers(len(self._moves))])

    def random_state(self, rng):
        return canonical((0,) + tuple(int(c) for c in rng.permutation(np.arange(1, self.n))))

    def degree(self, state):
        return len(self._moves)

    def states(self):
        return canonical_tours(self.n)

    def size(self):
        return tour_count(self.n)


class BitstringLandscape(Landscape):
    """Ising-type energy ``-1/2 x^T W x - h . x`` over ``x`` in {-1, +1}^n with single-flip moves.

    The external field ``h`` defaults to zero, which makes the energy even in ``x``.
    """

    def __init__(self, weights: np.ndarray, field=None):
        super().__init__()
        w = np.array(weights, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1] or w.shape[0] < 2:
            raise InvalidArgument("weights must be a square matrix of size >= 2")
        if not np.allclose(w, w.T, atol=0, rtol=0) or np.any(np.diag(w) != 0):
            raise InvalidArgument("weights must be symmetric with zero diagonal")
        w.setflags(write=False)
        self.weights = w
        self.n = self.max_width = w.shape[0]
        h = np.zeros(self.n) if field is None else np.array(field, dtype=float) * np.ones(self.n)
        h.setflags(write=False)
        self.field = h

    def _energy(self, state):
        x = np.asarray(state, dtype=float)
        return float(-0.5 * x @ self.weights @ x - self.field @ x)

    def flip(self, state, i):
        return state[:i] + (-state[i],) + state[i + 1 :]

    def elementary_neighbors(self, state):
        return [self.flip(state, i) for i in range(self.n)]

    def random_neighbor(self, state, rng):
        return self.flip(state, int(rng.integers(self.n)))

    def random_neighbor_at_width(self, state, k, rng):
        """Flip ``k`` distinct spins, so the result is exactly Hamming distance ``k`` away."""
        if k > self.n:
            raise InvalidArgument(f"width {k} exceeds n={self.n}")
        x = list(state)
        for i in rng.choice(self.n, size=k, replace=False):
            x[i] = -x[i]
        return tuple(x)

    def ball(self, state, k):
        out = set()
        for idx in itertools.combinations(range(self.n), k):
            x = list(state)
            for i in idx:
                x[i] = -x[i]
            out.add(tuple(x))
        return out

    def degree(self, state):
        return self.n

    def random_state(self, rng):
        return tuple(int(v) for v in rng.choice((-1, 1), size=self.n))

    def states(self):
        return itertools.product((-1, 1), repeat=self.n)

    def size(self):
        return 2**self.n

    def all_states(self) -> np.ndarray:
        """Every state as rows, in the same (lexicographic) order as :meth:`states`."""
        if self.n > BITSTRING_MAX_N:
            raise InstanceTooLarge(f"2^{self.n} states exceeds the 2^{BITSTRING_MAX_N} cap")
        codes = np.arange(2**self.n)
        bits = (codes[:, None] >> np.arange(self.n - 1, -1, -1)) & 1
        return (2 * bits - 1).astype(np.int8)


class HopfieldNet(BitstringLandscape):
    """Hebbian associative memory ``w_ij = (1/n) sum_mu xi_i xi_j`` with zero diagonal."""

    def __init__(self, patterns):
        p = np.array(patterns, dtype=float)
        if p.ndim == 1:
            p = p[None, :]
        if p.ndim != 2 or p.shape[1] < 2:
            raise InvalidArgument("patterns must be a (p, n) array with n >= 2")
        if not np.all(np.abs(p) == 1):
            raise InvalidArgument("pattern entries must be +1 or -1")
        n = p.shape[1]
        w = p.T @ p / n
        np.fill_diagonal(w, 0.0)
        super().__init__(w)
        p.setflags(write=False)
        self.patterns = p

    @property
    def stored(self) -> list[tuple[int, ...]]:
        return [tuple(int(v) for v in row) for row in self.patterns]


class SpinGlass(BitstringLandscape):
    """Sherrington-Kirkpatrick-style couplings: symmetric i.i.d. standard normal, zero diagonal."""

    def __init__(self, n: int, seed: int):
        if n < 2:
            raise InvalidArgument("n must be >= 2")
        rng = np.random.default_rng(seed)
        upper = np.triu(rng.standard_normal((n, n)), 1)
        super().__init__(upper + upper.T)
        self.seed = seed


def tour_landscape(inst: TspInstance) -> TourLandscape:
    return TourLandscape(inst)


def hopfield_from_patterns(patterns) -> HopfieldNet:
    return HopfieldNet(patterns)


def hopfield_energy(net: BitstringLandscape, x) -> float:
    return net._energy(tuple(x))


def random_patterns(n: int, p: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.choice((-1, 1), size=(p, n))


# --- descent -----------------------------------------------------------------


def best_improving(landscape: Landscape, energy: float, candidates: Iterable):
    """Lowest strictly-improving candidate (ties to the smallest state) or ``(None, energy)``."""
    improving = [(e, c) for c in candidates if (e := landscape.energy(c)) < energy - ENERGY_TOL]
    if not improving:
        return None, energy
    low = min(e for e, _ in improving)
    e, c = min(((e, c) for e, c in improving if e <= low + ENERGY_TOL), key=lambda ec: ec[1])
    return c, e


def greedy_descent(landscape: Landscape, start, tie_rule: str = "min_state"):
    """Steepest descent over elementary moves until no neighbour is strictly lower.

    Only the ``"min_state"`` tie rule is implemented: among equally low
    neighbours the smallest state wins.
    """
    if tie_rule != "min_state":
        raise InvalidArgument(f"unknown tie rule {tie_rule!r}")
    state = tuple(start)
    energy = landscape.energy(state)
    while True:
        nxt, e = best_improving(landscape, energy, landscape.elementary_neighbors(state))
        if nxt is None:
            return state
        state, energy = nxt, e


def is_local_minimum(landscape: Landscape, state) -> bool:
    e = landscape._energy(state)
    return all(landscape._energy(s) >= e - ENERGY_TOL for s in landscape.elementary_neighbors(state))


def descend_batch(landscape: BitstringLandscape, starts: np.ndarray) -> np.ndarray:
    """Vectorised :func:`greedy_descent` for many bitstring starts at once.

    Reproduces the scalar tie rule: among tied flips the resulting smallest
    tuple is the lowest index holding +1 if there is one, else the highest
    index.
    """
    X = np.array(starts, dtype=float)
    W = landscape.weights
    n = landscape.n
    active = np.arange(len(X))
    cols = np.arange(n)
    while active.size:
        xa = X[active]
        dE = 2.0 * xa * (xa @ W + landscape.field)
        m = dE.min(axis=1)
        moving = m < -ENERGY_TOL
        active, xa, dE, m = active[moving], xa[moving], dE[moving], m[moving]
        if not active.size:
            break
        tied = dE <= (m + ENERGY_TOL)[:, None]
        plus = tied & (xa > 0)
        first_plus = np.where(plus, cols, n).min(axis=1)
        last_tied = np.where(tied, cols, -1).max(axis=1)
        pick = np.where(first_plus < n, first_plus, last_tied)
        X[active, pick] *= -1
    return X.astype(np.int8)


# --- censuses ----------------------------------------------------------------


@dataclass
class Census:
    """Local minima found by a census, with energies and (sampled) hit counts."""

    minima: dict = field(default_factory=dict)
    hits: Counter = field(default_factory=Counter)
    starts: int = 0
    method: str = "brute"

    @property
    def count(self) -> int:
        return len(self.minima)

    @property
    def coverage(self) -> float:
        """Good-Turing estimate of the covered hit mass, 1 - (singletons / starts)."""
        if self.method == "brute":
            return 1.0
        singletons = sum(1 for v in self.hits.values() if v == 1)
        return 1.0 - singletons / self.starts

    def energies(self) -> np.ndarray:
        return np.array(sorted(self.minima.values()))


def _bitstring_minima(landscape: BitstringLandscape, chunk: int = 1 << 16):
    X = landscape.all_states().astype(float)
    W = landscape.weights
    found = {}
    for lo in range(0, len(X), chunk):
        x = X[lo : lo + chunk]
        h = x @ W
        ok = (2.0 * x * (h + landscape.field)).min(axis=1) >= -ENERGY_TOL
        e = -0.5 * (x * h).sum(axis=1) - x @ landscape.field
        for row, en in zip(x[ok], e[ok]):
            found[tuple(int(v) for v in row)] = float(en)
    return found


def _tour_minima(landscape: TourLandscape):
    n = landscape.n
    if n > TOUR_CENSUS_MAX_N:
        raise InstanceTooLarge(f"tour census capped at n={TOUR_CENSUS_MAX_N}, got {n}")
    d = landscape._d
    T = np.array(list(canonical_tours(n)), dtype=np.intp)
    length = d[T, np.roll(T, -1, axis=1)].sum(axis=1)
    ok = np.ones(len(T), dtype=bool)
    for i, j in landscape._moves:
        a, b, c, e = T[:, i - 1], T[:, i], T[:, j], T[:, (j + 1) % n]
        delta = d[a, c] + d[b, e] - d[a, b] - d[c, e]
        ok &= delta >= -ENERGY_TOL
    return {tuple(int(v) for v in row): float(L) for row, L in zip(T[ok], length[ok])}


def census_brute_force(landscape: Landscape) -> Census:
    """Exact set of local minima by exhaustive enumeration."""
    if isinstance(landscape, BitstringLandscape):
        minima = _bitstring_minima(landscape)
    elif isinstance(landscape, TourLandscape):
        minima = _tour_minima(landscape)
    else:
        minima = {s: landscape._energy(s) for s in landscape.states() if is_local_minimum(landscape, s)}
    return Census(minima=minima, starts=landscape.size(), method="brute")


def census_sampled(landscape: Landscape, starts: int, seed: int) -> Census:
    """Greedy descent from ``starts`` seeded random states."""
    if starts < 1:
        raise InvalidArgument("starts must be >= 1")
    rng = np.random.default_rng(seed)
    hits = Counter()
    if isinstance(landscape, BitstringLandscape):
        X = rng.choice(np.array([-1, 1], dtype=np.int8), size=(starts, landscape.n))
        for row in descend_batch(landscape, X):
            hits[tuple(int(v) for v in row)] += 1
    else:
        for _ in range(starts):
            hits[greedy_descent(landscape, landscape.random_state(rng))] += 1
    minima = {s: landscape._energy(s) for s in sorted(hits)}
    return Census(minima=minima, hits=hits, starts=starts, method="sampled")


def energy_histogram(census: Census, bins: int = 10) -> dict:
    e = census.energies()
    if e.size == 0:
        return {"edges": [], "counts": []}
    counts, edges = np.histogram(e, bins=bins)
    return {"edges": [float(v) for v in edges], "counts": [int(v) for v in counts]}
