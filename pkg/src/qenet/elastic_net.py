"""Durbin-Willshaw Elastic Net for the planar TSP.

A closed ring of beads is pulled towards the cities by Gaussian
attraction of range ``k`` and held together by a quadratic tension. The
scale ``k`` is lowered geometrically until every city has a bead sitting
on it, and the ring order is read off as a tour.

All computations use the instance's unit-square coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument, NumericFailure
from .instances import TspInstance, Tour, make_tour


@dataclass(frozen=True)
class EnParams:
    alpha: float = 0.2
    beta: float = 2.0
    m_ratio: float = 2.5
    k0: float = 0.2
    k_decay: float = 0.99
    k_period: int = 25
    k_min: float = 0.01
    max_iters: int = 100_000
    # False switches to the unsquared |x - y| / 2k^2 exponent, for comparison only
    squared_exponent: bool = True

    def __post_init__(self):
        for name in ("alpha", "beta", "m_ratio", "k0", "k_min"):
            if not getattr(self, name) > 0:
                raise InvalidArgument(f"{name} must be positive")
        if not 0 < self.k_decay < 1:
            raise InvalidArgument("k_decay must lie in (0, 1)")
        if self.m_ratio < 2:
            raise InvalidArgument("m_ratio must be >= 2")
        if self.k_period < 1 or self.max_iters < 0:
            raise InvalidArgument("k_period must be >= 1 and max_iters >= 0")


@dataclass(frozen=True, eq=False)
class ElasticString:
    beads: np.ndarray
    k: float

    def __post_init__(self):
        b = np.array(self.beads, dtype=float)
        if b.ndim != 2 or b.shape[1] != 2 or b.shape[0] < 3:
            raise InvalidArgument(f"beads must have shape (M>=3, 2), got {b.shape}")
        if not self.k > 0:
            raise InvalidArgument(f"k must be positive, got {self.k}")
        b.setflags(write=False)
        object.__setattr__(self, "beads", b)

    @property
    def m(self) -> int:
        return self.beads.shape[0]


@dataclass
class EnTrace:
    """Per-iteration record; ``free_energy`` is evaluated at the ``k`` used for that step."""

    iters: list[int] = field(default_factory=list)
    k: list[float] = field(default_factory=list)
    free_energy: list[float] = field(default_factory=list)
    max_city_dist: list[float] = field(default_factory=list)

    def append(self, it, k, f, d):
        self.iters.append(it)
        self.k.append(k)
        self.free_energy.append(f)
        self.max_city_dist.append(d)

    def rows(self):
        return list(zip(self.iters, self.k, self.free_energy, self.max_city_dist))

    def descent_violations(self, tol: float = 1e-9) -> int:
        """Count steps where F rose at unchanged ``k``."""
        f = np.asarray(self.free_energy)
        k = np.asarray(self.k)
        same_k = k[1:] == k[:-1]
        return int(np.sum(same_k & (f[1:] > f[:-1] + tol)))


def _sq_dists(cities, beads):
    diff = cities[:, None, :] - beads[None, :, :]
    return (diff**2).sum(axis=-1)


def _exponents(cities, beads, k, squared):
    d2 = _sq_dists(cities, beads)
    dist = d2 if squared else np.sqrt(d2)
    return -dist / (2.0 * k * k)


def _weights(expo):
    # row-wise softmax with max subtraction; rows are cities
    shifted = expo - expo.max(axis=1, keepdims=True)
    w = np.exp(shifted)
    return w / w.sum(axis=1, keepdims=True)


def attraction_weights(inst: TspInstance, string: ElasticString, params: EnParams = EnParams()):
    """``w[i, j]``: share of city ``i`` pulling on bead ``j``; rows sum to one."""
    return _weights(_exponents(inst.unit_coords, string.beads, string.k, params.squared_exponent))


def _free_energy_from(d2, y, k, params):
    dist = d2 if params.squared_exponent else np.sqrt(d2)
    expo = -dist / (2.0 * k * k)
    top = expo.max(axis=1)
    lse = top + np.log(np.exp(expo - top[:, None]).sum(axis=1))
    tension = ((np.roll(y, -1, axis=0) - y) ** 2).sum()
    return float(-params.alpha * k * k * lse.sum() + 0.5 * params.beta * k * tension)


def _step_from(d2, x, y, k, params):
    dist = d2 if params.squared_exponent else np.sqrt(d2)
    w = _weights(-dist / (2.0 * k * k))
    with np.errstate(invalid="ignore", over="ignore"):
        # sum_i w_ij (x_i - y_j)
        pull = w.T @ x - w.sum(axis=0)[:, None] * y
        lap = np.roll(y, -1, axis=0) - 2.0 * y + np.roll(y, 1, axis=0)
        new = y + params.alpha * pull + params.beta * k * lap
    bad = ~np.all(np.isfinite(new), axis=1)
    if bad.any():
        raise NumericFailure(f"non-finite bead at index {int(np.flatnonzero(bad)[0])}")
    return new


def free_energy(inst: TspInstance, string: ElasticString, params: EnParams = EnParams(), k=None) -> float:
    """Energy whose negative gradient is exactly the :func:`en_step` displacement.

    F = -alpha k^2 sum_i log sum_j exp(-|x_i - y_j|^2 / 2k^2)
        + (beta / 2) k sum_j |y_{j+1} - y_j|^2

    The tension coefficient carries ``beta / 2`` because the update uses
    ``beta k`` for the discrete Laplacian (the derivative's factor 2 is
    folded into ``beta``).
    """
    k = string.k if k is None else k
    if not k > 0:
        raise InvalidArgument(f"k must be positive, got {k}")
    d2 = _sq_dists(inst.unit_coords, string.beads)
    return _free_energy_from(d2, string.beads, k, params)


def en_step(inst: TspInstance, string: ElasticString, params: EnParams = EnParams()) -> ElasticString:
    """One synchronous gradient step of every bead at fixed ``k``."""
    x = inst.unit_coords
    d2 = _sq_dists(x, string.beads)
    return ElasticString(_step_from(d2, x, string.beads, string.k, params), string.k)


def initial_string(inst: TspInstance, params: EnParams, seed: int) -> ElasticString:
    """Beads on a circle of radius 0.1 around the city centroid, seeded angular offset."""
    m = max(3, int(round(params.m_ratio * inst.n)))
    rng = np.random.default_rng(seed)
    phase = rng.uniform(0.0, 2.0 * np.pi)
    theta = phase + 2.0 * np.pi * np.arange(m) / m
    centre = inst.unit_coords.mean(axis=0)
    beads = centre + 0.1 * np.column_stack([np.cos(theta), np.sin(theta)])
    return ElasticString(beads, params.k0)


def max_city_distance(inst: TspInstance, string: ElasticString) -> float:
    """Largest distance from a city to its nearest bead."""
    return float(np.sqrt(_sq_dists(inst.unit_coords, string.beads).min(axis=1).max()))


def run_elastic_net(inst: TspInstance, params: EnParams = EnParams(), seed: int = 0):
    """Anneal the ring from the initial circle; returns ``(string, trace)``.

    ``k`` is multiplied by ``k_decay`` every ``k_period`` iterations; the run
    stops once ``k <= k_min`` or after ``max_iters`` steps.
    """
    s = initial_string(inst, params, seed)
    x = inst.unit_coords
    y, k = s.beads, s.k
    d2 = _sq_dists(x, y)
    trace = EnTrace()
    trace.append(0, k, _free_energy_from(d2, y, k, params), float(np.sqrt(d2.min(axis=1).max())))
    it = 0
    while it < params.max_iters and k > params.k_min:
        it += 1
        y = _step_from(d2, x, y, k, params)
        d2 = _sq_dists(x, y)
        trace.append(it, k, _free_energy_from(d2, y, k, params), float(np.sqrt(d2.min(axis=1).max())))
        if it % params.k_period == 0:
            k *= params.k_decay
    if it == 0:
        return s, trace
    return ElasticString(y, k), trace


def extract_tour(inst: TspInstance, string: ElasticString) -> Tour:
    """Read a tour off the ring.

    Each city goes to its nearest bead (lowest index on ties); cities are
    ordered by bead index and, within a bead, by their projection onto the
    local ring tangent.
    """
    x = inst.unit_coords
    y = string.beads
    nearest = np.argmin(_sq_dists(x, y), axis=1)
    tangent = np.roll(y, -1, axis=0) - np.roll(y, 1, axis=0)
    proj = np.einsum("ij,ij->i", x - y[nearest], tangent[nearest])
    order = np.lexsort((np.arange(inst.n), proj, nearest))
    return make_tour(inst, order.tolist())


def solve(inst: TspInstance, params: EnParams = EnParams(), seed: int = 0):
    """Run the net and extract a tour; returns ``(tour, trace)``."""
    s, trace = run_elastic_net(inst, params, seed)
    return extract_tour(inst, s), trace
