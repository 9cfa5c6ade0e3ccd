import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qenet.annealing import (
    DiscreteChain,
    arrhenius_fit,
    barrier_height,
    build_double_well_chain,
    double_well_energy,
    exact_hitting_time,
    hitting_time_scaling,
    make_schedule,
    metropolis_step,
    run_sa,
    simulate_hitting_times,
    temperature_at,
)
from qenet.errors import InvalidArgument
from qenet.instances import random_euclidean
from qenet.landscapes import TourLandscape


def test_schedule_values():
    assert temperature_at(make_schedule("logarithmic", D=1.0, offset=1), 1) == pytest.approx(1 / math.log(2))
    assert temperature_at(make_schedule("geometric", T0=2.0, ratio=0.5), 3) == 0.5
    assert temperature_at(make_schedule("constant", T=0.7), 99) == 0.7


@pytest.mark.parametrize(
    "kind,params",
    [("logarithmic", {"D": 0.0}), ("geometric", {"ratio": 1.0}), ("constant", {"T": 0.0}), ("cubic", {})],
)
def test_schedule_rejects(kind, params):
    with pytest.raises(InvalidArgument):
        make_schedule(kind, **params)


def test_temperature_step_must_be_positive():
    with pytest.raises(InvalidArgument):
        temperature_at(make_schedule("constant"), 0)


@settings(max_examples=40, deadline=None)
@given(
    kind=st.sampled_from(["geometric", "logarithmic", "constant"]),
    a=st.floats(0.01, 10),
    r=st.floats(0.5, 0.9999),
    off=st.integers(1, 50),
    step=st.integers(1, 10_000),
)
def test_schedules_positive_non_increasing(kind, a, r, off, step):
    s = make_schedule(kind, T0=a, ratio=r, D=a, offset=off, T=a)
    t1, t2 = temperature_at(s, step), temperature_at(s, step + 1)
    assert t1 > 0 and t2 > 0 and t2 <= t1


def test_downhill_always_accepted():
    chain = DiscreteChain([1.0, 0.0])
    rng = np.random.default_rng(0)
    # from state 0 only the +1 proposal moves, and it is downhill
    moved = [metropolis_step(chain, 0, 1e-9, rng)[0] for _ in range(200)]
    assert set(moved) == {0, 1}
    assert all(m == 1 for m in moved if m != 0)


def test_uphill_rejected_near_zero_temperature():
    chain = DiscreteChain([0.0, 1.0])
    rng = np.random.default_rng(1)
    assert all(metropolis_step(chain, 0, 1e-6, rng)[0] == 0 for _ in range(1000))


def test_two_state_stationary_occupancy():
    chain = DiscreteChain([0.0, 1.0])
    rng = np.random.default_rng(2024)
    steps = 1_000_000
    occ = np.empty(steps, dtype=np.int8)
    s, e = 0, 0.0
    for i in range(steps):
        s, e = metropolis_step(chain, s, 1.0, rng, e)
        occ[i] = s
    batches = occ.reshape(100, -1).mean(axis=1)
    se = batches.std(ddof=1) / math.sqrt(batches.size)
    expected = math.exp(-1) / (1 + math.exp(-1))
    assert abs(occ.mean() - expected) <= 3 * se


@settings(max_examples=50, deadline=None)
@given(
    energies=st.lists(st.floats(-3, 3), min_size=2, max_size=12),
    T=st.floats(0.05, 5.0),
)
def test_detailed_balance(energies, T):
    chain = DiscreteChain(energies)
    P = chain.transition_matrix(T)
    pi = chain.boltzmann(T)
    np.testing.assert_allclose(P.sum(axis=1), 1.0, atol=1e-12)
    flow = pi[:, None] * P
    np.testing.assert_allclose(flow, flow.T, atol=1e-12)


def test_hitting_time_self_is_zero():
    assert exact_hitting_time(DiscreteChain([0.0, 1.0, 2.0]), 1, 1) == 0.0


def test_hitting_time_two_state_closed_form():
    assert exact_hitting_time(DiscreteChain([0.0, 1.0]), 0, 1, T=1.0) == pytest.approx(2 * math.e, rel=1e-12)


def test_hitting_time_rejects_zero_temperature():
    with pytest.raises(InvalidArgument):
        exact_hitting_time(DiscreteChain([0.0, 1.0]), 0, 1, T=0.0)


def test_three_state_monte_carlo_agrees():
    chain = DiscreteChain([0.2, 1.0, 0.0])
    exact = exact_hitting_time(chain, 0, 2, T=0.3)
    hits = simulate_hitting_times(chain, 0, 2, runs=100_000, seed=7, T=0.3)
    se = hits.std(ddof=1) / math.sqrt(hits.size)
    assert abs(hits.mean() - exact) <= 3 * se


@pytest.mark.parametrize("seed", range(5))
def test_random_chain_monte_carlo_agrees(seed):
    rng = np.random.default_rng(seed)
    m = 3 + seed
    chain = DiscreteChain(rng.uniform(0, 1, m))
    T = 0.5
    exact = exact_hitting_time(chain, 0, m - 1, T)
    hits = simulate_hitting_times(chain, 0, m - 1, runs=20_000, seed=seed, T=T)
    se = hits.std(ddof=1) / math.sqrt(hits.size)
    assert abs(hits.mean() - exact) <= 3 * se


def test_symmetric_double_well():
    chain = build_double_well_chain(h=1.0, s=0.0, half_width=1.5, m=121)
    left, _, right = chain.wells
    assert chain.energies[left] == pytest.approx(chain.energies[right], abs=1e-12)


def test_biased_double_well_right_is_global():
    chain = build_double_well_chain(h=1.0, s=-0.25, half_width=1.8, m=121)
    left, top, right = chain.wells
    assert chain.energies[right] < chain.energies[left]
    assert left < top < right


def test_double_well_rejects_degenerate():
    with pytest.raises(InvalidArgument):
        build_double_well_chain(h=1.0, s=-5.0)
    with pytest.raises(InvalidArgument):
        build_double_well_chain(m=4)


def test_barrier_matches_dense_grid():
    h, s = 1.0, -0.25
    chain = build_double_well_chain(h, s, 1.8, 121)
    q = np.linspace(-1.8, 0.0, 2_000_001)
    v = double_well_energy(q, h, s)
    continuum = double_well_energy(0.0, h, s) - v.min()
    left, top, right = chain.wells
    dv_grid = np.abs(np.diff(chain.energies[left : right + 1])).max()
    assert abs(barrier_height(chain) - continuum) <= 2 * dv_grid


def test_arrhenius_fit_exact_line():
    T = np.array([0.5, 0.4, 0.3])
    slope, intercept, r2 = arrhenius_fit(T, 3.0 * np.exp(2.0 / T))
    assert slope == pytest.approx(2.0) and intercept == pytest.approx(math.log(3.0))
    assert r2 == pytest.approx(1.0)


def test_hitting_time_grows_as_temperature_drops():
    temps, times, (slope, _, r2) = hitting_time_scaling()
    assert all(b > a for a, b in zip(times, times[1:]))
    assert slope > 0 and r2 >= 0.95


def test_run_sa_deterministic_and_best_monotone():
    land = TourLandscape(random_euclidean(8, 0))
    sched = make_schedule("geometric", T0=0.2, ratio=0.999)
    b1, t1 = run_sa(land, sched, 2000, seed=4)
    b2, t2 = run_sa(land, sched, 2000, seed=4)
    assert b1 == b2 and t1.rows() == t2.rows()
    assert np.all(np.diff(t1.energy_best) <= 0)
    assert land.energy(b1) == pytest.approx(t1.energy_best[-1])


def test_run_sa_rejects_zero_steps():
    with pytest.raises(InvalidArgument):
        run_sa(DiscreteChain([0.0, 1.0]), make_schedule("constant"), 0, seed=0)


def test_cold_walker_stays_in_metastable_well():
    chain = build_double_well_chain()
    left, top, _ = chain.wells
    # climbing the ~1.0 barrier at T=1e-3 has probability far below 1e-6
    _, trace = run_sa(chain, make_schedule("constant", T=1e-3), 20_000, seed=3, start=left)
    assert max(trace.energy_current) < chain.energies[top] - 0.5
