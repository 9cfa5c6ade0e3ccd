"""TSP instances, tours, an exhaustive oracle and TSPLIB-subset IO.

Distances are exact Euclidean doubles. TSPLIB's convention of rounding
EUC_2D distances to the nearest integer is deliberately not applied.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import InstanceTooLarge, InvalidArgument, InvalidTour, ParseError

BRUTE_FORCE_MAX_N = 11
TIE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class TspInstance:
    """A set of cities in the plane.

    ``coords`` holds the raw coordinates exactly as given or read from
    file; ``unit_coords`` is the aspect-preserving affine map into the
    unit square that the solvers work in.
    """

    name: str
    coords: np.ndarray

    def __post_init__(self):
        pts = np.array(self.coords, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise InvalidArgument(f"coords must have shape (n, 2), got {pts.shape}")
        if pts.shape[0] < 3:
            raise InvalidArgument(f"need at least 3 cities, got {pts.shape[0]}")
        if not np.all(np.isfinite(pts)):
            raise InvalidArgument("city coordinates must be finite")
        if len(np.unique(pts, axis=0)) != len(pts):
            raise InvalidArgument("duplicate city coordinates")
        pts.setflags(write=False)
        object.__setattr__(self, "coords", pts)

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    @cached_property
    def unit_coords(self) -> np.ndarray:
        lo = self.coords.min(axis=0)
        span = float((self.coords.max(axis=0) - lo).max())
        out = (self.coords - lo) / span
        out.setflags(write=False)
        return out

    @cached_property
    def distances(self) -> np.ndarray:
        diff = self.coords[:, None, :] - self.coords[None, :, :]
        d = np.sqrt((diff**2).sum(axis=-1))
        d.setflags(write=False)
        return d

    def __eq__(self, other):
        if not isinstance(other, TspInstance):
            return NotImplemented
        return self.name == other.name and np.array_equal(self.coords, other.coords)

    def __hash__(self):
        return hash((self.name, self.coords.tobytes()))

    def __repr__(self):
        return f"TspInstance(name={self.name!r}, n={self.n})"


@dataclass(frozen=True)
class Tour:
    order: tuple[int, ...]
    length: float = field(compare=False)

    @property
    def n(self) -> int:
        return len(self.order)


def random_euclidean(n: int, seed: int) -> TspInstance:
    """``n`` cities drawn i.i.d. uniform in the unit square.

    Uses numpy's default PCG64 generator seeded with ``seed``, so the
    same seed gives a bitwise-identical instance.
    """
    if n < 3:
        raise InvalidArgument(f"n must be >= 3, got {n}")
    rng = np.random.default_rng(seed)
    pts = rng.random((n, 2))
    while len(np.unique(pts, axis=0)) != n:  # practically unreachable
        pts = rng.random((n, 2))
    return TspInstance(name=f"rand{n}_s{seed}", coords=pts)


def unit_square() -> TspInstance:
    return TspInstance("square4", np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]))


def validate_tour(inst: TspInstance, order: Sequence[int]) -> bool:
    try:
        idx = [int(i) for i in order]
    except (TypeError, ValueError):
        return False
    return len(idx) == inst.n and sorted(idx) == list(range(inst.n))


def tour_length(inst: TspInstance, order: Sequence[int]) -> float:
    if not validate_tour(inst, order):
        raise InvalidTour(f"not a permutation of 0..{inst.n - 1}: {list(order)}")
    idx = np.asarray(order, dtype=int)
    return float(inst.distances[idx, np.roll(idx, -1)].sum())


def make_tour(inst: TspInstance, order: Sequence[int]) -> Tour:
    return Tour(tuple(int(i) for i in order), tour_length(inst, order))


def canonical(order: Sequence[int]) -> tuple[int, ...]:
    """Rotate so city 0 comes first, then orient so the second city is smaller than the last."""
    order = list(order)
    i = order.index(0)
    rot = order[i:] + order[:i]
    if len(rot) > 2 and rot[1] > rot[-1]:
        rot = [rot[0]] + rot[:0:-1]
    return tuple(rot)


def canonical_tours(n: int) -> Iterator[tuple[int, ...]]:
    """Every symmetric tour on ``n`` cities exactly once, in lexicographic order."""
    for rest in itertools.permutations(range(1, n)):
        if rest[0] < rest[-1]:
            yield (0,) + rest


def tour_count(n: int) -> int:
    if not 3 <= n <= 20:
        raise InvalidArgument(f"tour_count defined for 3 <= n <= 20, got {n}")
    return math.factorial(n - 1) // 2


def brute_force_optimal(inst: TspInstance, chunk: int = 200_000) -> Tour:
    """Exhaustive search over all (n-1)!/2 tours.

    Ties within 1e-12 go to the lexicographically smallest canonical order.
    """
    n = inst.n
    if n > BRUTE_FORCE_MAX_N:
        raise InstanceTooLarge(f"brute force capped at n={BRUTE_FORCE_MAX_N}, got {n}")
    d = inst.distances
    gen = canonical_tours(n)
    best_len = math.inf
    best = None
    while True:
        block = np.array(list(itertools.islice(gen, chunk)), dtype=np.intp)
        if block.size == 0:
            break
        lengths = d[block, np.roll(block, -1, axis=1)].sum(axis=1)
        m = lengths.min()
        if m < best_len - TIE_TOL:
            j = int(np.flatnonzero(lengths <= m + TIE_TOL)[0])
            best_len, best = float(lengths[j]), block[j]
    return make_tour(inst, best)


# --- TSPLIB subset -----------------------------------------------------------


def _header(line: str) -> tuple[str, str] | None:
    if ":" not in line:
        return None
    key, _, value = line.partition(":")
    return key.strip().upper(), value.strip()


def parse_tsplib(text: str) -> TspInstance:
    lines = text.splitlines()
    name, dim = "unnamed", None
    i = 0
    while i < len(lines):
        raw = lines[i].strip()
        i += 1
        if not raw:
            continue
        if raw.upper() == "NODE_COORD_SECTION":
            break
        if raw.upper() == "EOF":
            raise ParseError("EOF before NODE_COORD_SECTION", i)
        kv = _header(raw)
        if kv is None:
            raise ParseError(f"unrecognised header line {raw!r}", i)
        key, value = kv
        if key == "NAME":
            name = value
        elif key == "TYPE":
            if value.upper() != "TSP":
                raise ParseError(f"unsupported TYPE {value!r}", i)
        elif key == "DIMENSION":
            try:
                dim = int(value)
            except ValueError:
                raise ParseError(f"bad DIMENSION {value!r}", i) from None
        elif key == "EDGE_WEIGHT_TYPE":
            if value.upper() != "EUC_2D":
                raise ParseError(f"unsupported EDGE_WEIGHT_TYPE {value!r}", i)
        elif key == "COMMENT":
            pass
        else:
            raise ParseError(f"unsupported header {key!r}", i)
    else:
        raise ParseError("missing NODE_COORD_SECTION", len(lines))
    if dim is None:
        raise ParseError("missing DIMENSION", i)

    coords = {}
    while i < len(lines):
        raw = lines[i].strip()
        i += 1
        if not raw:
            continue
        if raw.upper() == "EOF":
            break
        parts = raw.split()
        try:
            if len(parts) != 3:
                raise ValueError
            idx, x, y = int(parts[0]), float(parts[1]), float(parts[2])
        except ValueError:
            raise ParseError(f"malformed coordinate line {raw!r}", i) from None
        if not 1 <= idx <= dim or idx in coords:
            raise ParseError(f"bad node index {idx}", i)
        coords[idx] = (x, y)
    if len(coords) != dim:
        raise ParseError(f"expected {dim} nodes, found {len(coords)}", i)
    try:
        return TspInstance(name, np.array([coords[k] for k in range(1, dim + 1)]))
    except InvalidArgument as exc:
        raise ParseError(str(exc)) from None


def write_tsplib(inst: TspInstance) -> str:
    out = [
        f"NAME : {inst.name}",
        "TYPE : TSP",
        f"DIMENSION : {inst.n}",
        "EDGE_WEIGHT_TYPE : EUC_2D",
        "NODE_COORD_SECTION",
    ]
    # repr() round-trips doubles exactly
    out += [f"{i + 1} {x!r} {y!r}" for i, (x, y) in enumerate(inst.coords.tolist())]
    out.append("EOF")
    return "\n".join(out) + "\n"


def write_tour(tour: Tour | Iterable[int], name: str | None = None) -> str:
    order = tour.order if isinstance(tour, Tour) else tuple(tour)
    out = []
    if name:
        out.append(f"NAME : {name}")
    out += ["TYPE : TOUR", f"DIMENSION : {len(order)}", "TOUR_SECTION"]
    out += [str(i + 1) for i in order]
    out += ["-1", "EOF"]
    return "\n".join(out) + "\n"


def parse_tour(text: str) -> tuple[int, ...]:
    """Read a tour file and return 0-based city indices."""
    lines = text.splitlines()
    dim = None
    i = 0
    while i < len(lines):
        raw = lines[i].strip()
        i += 1
        if not raw:
            continue
        if raw.upper() == "TOUR_SECTION":
            break
        kv = _header(raw)
        if kv is None:
            raise ParseError(f"unrecognised header line {raw!r}", i)
        key, value = kv
        if key == "TYPE" and value.upper() != "TOUR":
            raise ParseError(f"unsupported TYPE {value!r}", i)
        if key == "DIMENSION":
            try:
                dim = int(value)
            except ValueError:
                raise ParseError(f"bad DIMENSION {value!r}", i) from None
    else:
        raise ParseError("missing TOUR_SECTION", len(lines))
    order = []
    while i < len(lines):
        raw = lines[i].strip()
        i += 1
        if not raw:
            continue
        try:
            v = int(raw)
        except ValueError:
            raise ParseError(f"malformed tour line {raw!r}", i) from None
        if v == -1:
            break
        if v < 1:
            raise ParseError(f"bad city index {v}", i)
        order.append(v - 1)
    else:
        raise ParseError("TOUR_SECTION not terminated by -1", len(lines))
    if dim is not None and len(order) != dim:
        raise ParseError(f"expected {dim} cities, found {len(order)}", i)
    if sorted(order) != list(range(len(order))):
        raise ParseError("tour is not a permutation", i)
    return tuple(order)
