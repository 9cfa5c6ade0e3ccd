import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from qenet.elastic_net import (
    ElasticString,
    EnParams,
    _sq_dists,
    _step_from,
    attraction_weights,
    en_step,
    extract_tour,
    free_energy,
    initial_string,
    max_city_distance,
    run_elastic_net,
    solve,
)
from qenet.errors import InvalidArgument, NumericFailure
from qenet.instances import TspInstance, brute_force_optimal, random_euclidean, unit_square, validate_tour


def mp_free_energy(x, y, k, alpha, beta):
    """Plain double loop in 50-digit arithmetic."""
    with mpmath.workdps(50):
        k = mpmath.mpf(k)
        att = mpmath.mpf(0)
        for xi in x:
            s = mpmath.fsum(
                mpmath.exp(-((mpmath.mpf(xi[0]) - yj[0]) ** 2 + (mpmath.mpf(xi[1]) - yj[1]) ** 2) / (2 * k * k))
                for yj in y
            )
            att += mpmath.log(s)
        ten = mpmath.fsum(
            (mpmath.mpf(y[(j + 1) % len(y)][0]) - y[j][0]) ** 2 + (mpmath.mpf(y[(j + 1) % len(y)][1]) - y[j][1]) ** 2
            for j in range(len(y))
        )
        return float(-alpha * k * k * att + mpmath.mpf(beta) / 2 * k * ten)


def five_city_config(seed=3):
    inst = random_euclidean(5, seed)
    rng = np.random.default_rng(seed)
    beads = rng.uniform(0.2, 0.8, size=(12, 2))
    return inst, ElasticString(beads, 0.15)


def test_params_validation():
    with pytest.raises(InvalidArgument):
        EnParams(k_decay=1.0)
    with pytest.raises(InvalidArgument):
        EnParams(m_ratio=1.5)
    with pytest.raises(InvalidArgument):
        EnParams(alpha=0.0)


def test_string_validation():
    with pytest.raises(InvalidArgument):
        ElasticString(np.zeros((2, 2)), 0.1)
    with pytest.raises(InvalidArgument):
        ElasticString(np.zeros((3, 2)), 0.0)


def test_free_energy_degenerate_ring():
    # one city and three beads at the origin: exponents 0, tension 0
    d2 = np.zeros((1, 3))
    from qenet.elastic_net import _free_energy_from

    f = _free_energy_from(d2, np.zeros((3, 2)), 1.0, EnParams(alpha=1.0, beta=1.0))
    assert f == pytest.approx(-math.log(3), abs=1e-15)


def test_free_energy_matches_extended_precision():
    inst, s = five_city_config()
    p = EnParams()
    expected = mp_free_energy(inst.unit_coords.tolist(), s.beads.tolist(), s.k, p.alpha, p.beta)
    assert free_energy(inst, s, p) == pytest.approx(expected, rel=1e-12, abs=1e-14)


def test_free_energy_rejects_bad_k():
    inst, s = five_city_config()
    with pytest.raises(InvalidArgument):
        free_energy(inst, s, k=0.0)


def test_step_is_negative_gradient():
    inst, s = five_city_config(11)
    p = EnParams()
    y = s.beads.copy()
    step = en_step(inst, s, p).beads - y
    grad = np.zeros_like(y)
    h = 1e-6
    for j in range(y.shape[0]):
        for c in range(2):
            up, dn = y.copy(), y.copy()
            up[j, c] += h
            dn[j, c] -= h
            grad[j, c] = (free_energy(inst, ElasticString(up, s.k), p) - free_energy(inst, ElasticString(dn, s.k), p)) / (2 * h)
    np.testing.assert_allclose(step, -grad, atol=1e-8)


def test_step_pure_attraction():
    # neighbours placed symmetrically far away: zero Laplacian, negligible weight
    x = np.array([[0.0, 0.0]])
    y = np.array([[1.0, -10.0], [1.0, 0.0], [1.0, 10.0]])
    new = _step_from(_sq_dists(x, y), x, y, 0.1, EnParams(alpha=0.2))
    np.testing.assert_allclose(new[1], [0.8, 0.0], atol=1e-12)


def test_step_preserves_centroid_of_regular_polygon():
    x = np.array([[0.0, 0.0]])
    th = 2 * np.pi * np.arange(8) / 8
    y = np.column_stack([np.cos(th), np.sin(th)]) * 0.3
    new = _step_from(_sq_dists(x, y), x, y, 0.2, EnParams())
    np.testing.assert_allclose(new.mean(axis=0), [0.0, 0.0], atol=1e-15)


def test_step_reports_bad_bead():
    x = np.array([[0.0, 0.0]])
    y = np.array([[0.0, 0.0], [np.inf, 0.0], [1.0, 1.0]])
    with pytest.raises(NumericFailure, match="index"):
        _step_from(_sq_dists(x, y), x, y, 0.1, EnParams())


def test_step_lowers_free_energy():
    inst, s = five_city_config()
    f0 = free_energy(inst, s)
    f1 = free_energy(inst, en_step(inst, s))
    assert f1 <= f0 + 1e-9


def test_weights_stay_finite_at_tiny_k():
    inst, s = five_city_config()
    w = attraction_weights(inst, ElasticString(s.beads, 1e-6))
    assert np.all(np.isfinite(w))
    np.testing.assert_allclose(w.sum(axis=1), 1.0, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(
    seed=st.integers(0, 10_000),
    m=st.integers(3, 40),
    k=st.floats(1e-3, 2.0),
    squared=st.booleans(),
)
def test_weight_rows_sum_to_one(seed, m, k, squared):
    inst = random_euclidean(6, seed)
    beads = np.random.default_rng(seed).uniform(-0.5, 1.5, size=(m, 2))
    w = attraction_weights(inst, ElasticString(beads, k), EnParams(squared_exponent=squared))
    np.testing.assert_allclose(w.sum(axis=1), 1.0, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000), shift=st.integers(1, 20))
def test_step_commutes_with_ring_rotation(seed, shift):
    inst = random_euclidean(7, seed)
    beads = np.random.default_rng(seed).uniform(0, 1, size=(18, 2))
    a = en_step(inst, ElasticString(np.roll(beads, shift, axis=0), 0.1)).beads
    b = np.roll(en_step(inst, ElasticString(beads, 0.1)).beads, shift, axis=0)
    np.testing.assert_allclose(a, b, atol=1e-14)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000), k=st.floats(0.01, 0.5))
def test_fixed_k_descent_property(seed, k):
    inst = random_euclidean(8, seed)
    s = ElasticString(initial_string(inst, EnParams(), seed).beads, k)
    f = free_energy(inst, s)
    for _ in range(20):
        s = en_step(inst, s)
        nf = free_energy(inst, s)
        assert nf <= f + 1e-9
        f = nf


def test_initial_string_geometry():
    inst = random_euclidean(10, 4)
    s = initial_string(inst, EnParams(), seed=9)
    assert s.m == 25 and s.k == 0.2
    r = np.linalg.norm(s.beads - inst.unit_coords.mean(axis=0), axis=1)
    np.testing.assert_allclose(r, 0.1, atol=1e-12)


def test_max_iters_zero_returns_initial_circle():
    inst = random_euclidean(6, 1)
    p = EnParams(max_iters=0)
    s, trace = run_elastic_net(inst, p, seed=5)
    np.testing.assert_array_equal(s.beads, initial_string(inst, p, 5).beads)
    assert trace.iters == [0]


def test_run_deterministic():
    inst = random_euclidean(8, 2)
    p = EnParams(max_iters=400)
    _, t1 = run_elastic_net(inst, p, seed=3)
    _, t2 = run_elastic_net(inst, p, seed=3)
    assert t1.rows() == t2.rows()


def test_trace_schedule_and_descent():
    inst = random_euclidean(8, 2)
    _, trace = run_elastic_net(inst, EnParams(max_iters=2000), seed=1)
    assert trace.descent_violations() == 0
    k = np.asarray(trace.k)
    assert np.all(np.diff(k) <= 0)
    # k drops once every 25 steps
    assert k[25] == k[1] and k[26] == pytest.approx(k[1] * 0.99)


@pytest.mark.xfail(strict=True, reason="default k_min=0.01 leaves the corner beads about 0.055 away; see decisions ledger")
def test_square_converges_within_001_defaults():
    s, _ = run_elastic_net(unit_square(), EnParams(), seed=0)
    assert max_city_distance(unit_square(), s) <= 0.01


def test_square_converges_within_001_lower_k_min():
    s, trace = run_elastic_net(unit_square(), EnParams(k_min=0.0015), seed=0)
    assert max_city_distance(unit_square(), s) <= 0.01
    assert trace.descent_violations() == 0


def test_extract_square_perimeter_ring():
    t = np.linspace(0, 4, 16, endpoint=False)
    pts = []
    for u in t:
        side, f = int(u), u - int(u)
        pts.append([(f, 0), (1, f), (1 - f, 1), (0, 1 - f)][side])
    sq = unit_square()
    tour = extract_tour(sq, ElasticString(np.array(pts, dtype=float), 0.01))
    assert tour.length == pytest.approx(brute_force_optimal(sq).length, abs=1e-12)


def test_extract_follows_ring_when_cities_sit_on_beads():
    inst = random_euclidean(7, 8)
    perm = [4, 0, 6, 2, 5, 1, 3]
    beads = inst.unit_coords[perm]
    assert extract_tour(inst, ElasticString(beads, 0.05)).order == tuple(perm)


def test_extract_shared_bead():
    inst = TspInstance("pair", [[0.0, 0.0], [0.01, 0.0], [1.0, 1.0], [0.0, 1.0]])
    beads = np.array([[0.0, 0.0], [1.0, 1.0], [0.5, 0.5]])
    tour = extract_tour(inst, ElasticString(beads, 0.1))
    assert sorted(tour.order) == [0, 1, 2, 3]


@settings(max_examples=60, deadline=None)
@given(
    seed=st.integers(0, 10_000),
    beads=arrays(np.float64, st.tuples(st.integers(3, 30), st.just(2)), elements=st.floats(-2, 3)),
)
def test_extract_always_valid(seed, beads):
    inst = random_euclidean(9, seed)
    tour = extract_tour(inst, ElasticString(beads, 0.1))
    assert validate_tour(inst, tour.order)


def test_unsquared_variant_runs():
    tour, trace = solve(random_euclidean(6, 0), EnParams(squared_exponent=False, max_iters=500), seed=0)
    assert validate_tour(random_euclidean(6, 0), tour.order)
    assert np.all(np.isfinite(trace.free_energy))
