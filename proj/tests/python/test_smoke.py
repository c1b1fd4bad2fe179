"""End-to-end smoke tests for the python bindings."""

import math

import numpy as np
import pytest

import simcache


@pytest.fixture(scope="module")
def grid():
    catalog = simcache.grid_catalog(10)
    index = simcache.build_neighborhood_index(catalog, d=1.0, tie_break="ccw")
    rates = simcache.synthetic_popularity(catalog, [np.array([5.0, 5.0])], alpha=2.0)
    return catalog, index, rates


def test_catalog_and_index(grid):
    catalog, index, rates = grid
    assert catalog.size == 100
    assert index.size == 100
    # interior item has the 4-neighborhood, ordered right, up, left, down
    center = 5 * 10 + 5
    assert index.neighbors(center) == [6 * 10 + 5, 5 * 10 + 6, 4 * 10 + 5, 5 * 10 + 4]
    assert rates.shape == (100,)
    assert rates.sum() == pytest.approx(1.0)


def test_occupancy_function():
    assert simcache.occupancy_g(1.0, 1.0, math.log(2.0)) == pytest.approx(0.5)
    d1, d2, d3 = simcache.occupancy_g_partials(0.0, 1.0, 1.0)
    assert d2 == pytest.approx(0.25)


def test_solver_reduces_to_lru_on_isolated_items():
    rates = simcache.zipf_popularity(50, 1.0)
    catalog = simcache.Catalog(np.arange(50, dtype=float).reshape(-1, 1) * 100.0)
    index = simcache.build_neighborhood_index(catalog, d=1.0)
    result = simcache.solve(index, simcache.accept_always(), rates, 5.0)
    h, t_c, hit_rate = simcache.lru_ttl_estimate(rates, 5.0)
    assert result["converged"]
    assert result["hit_rate"] == pytest.approx(hit_rate, abs=1e-10)
    assert np.max(np.abs(result["hit_probs"] - h)) < 1e-10


def test_prediction_tracks_simulation(grid):
    _, index, rates = grid
    result = simcache.solve(index, simcache.accept_always(), rates, 20.0,
                            max_iterations=200)
    measured = simcache.measure_policy(index, "sim_lru", simcache.accept_always(),
                                       rates, capacity=20, trace_length=40000,
                                       repetitions=5, seed=7)
    # the model slightly underestimates the empirical hit rate on this small,
    # strongly coupled grid
    assert measured["mean_hit_rate"] - 0.08 < result["hit_rate"] <= \
        measured["mean_hit_rate"] + measured["ci95_half_width"]
    assert result["t_c"] > result["t_c0"]


def test_simulators_and_equivalence(grid):
    _, index, rates = grid
    trace = simcache.generate_irm_trace(rates, 5000, seed=3)
    assert len(trace) == 5000
    rnd = simcache.simulate_rnd_lru(index, simcache.accept_exact_only(), trace, 10,
                                    seed=1, track_state_hash=True)
    lru = simcache.simulate_lru(index.size, trace, 10, seed=1, track_state_hash=True)
    assert rnd["state_hash"] == lru["state_hash"]
    sim = simcache.simulate_sim_lru(index, trace, 10)
    assert sim["hit_rate"] >= lru["hit_rate"]


def test_baselines(grid):
    _, index, rates = grid
    chosen, covered = simcache.greedy_coverage(index, rates, 10)
    assert len(chosen) == 10
    assert 0.0 < covered <= 1.0
    h, t_c, hit_rate = simcache.lru_agg_estimate(index, rates, 10.0)
    assert 0.0 < hit_rate < 1.0


def test_renewal_oracle_matches_formula():
    est = simcache.rnd_ttl_renewal_oracle(1.0, 2.0, 1.0, cycles=100000, seed=5)
    expected = simcache.occupancy_g(2.0, 1.0, 1.0)
    assert abs(est["occupancy"] - expected) < max(4 * est["std_error"], 0.01)


def test_jacobian_and_beta(grid):
    _, index, rates = grid
    samples = simcache.sample_capped_simplex(100, 20.0, count=2, seed=11)
    bundle = simcache.jacobian_G(index, simcache.accept_always(), rates, 20.0, samples[0])
    assert bundle["J_G"].shape == (100, 100)
    assert np.abs(bundle["J_G"].sum(axis=0)).max() < 1e-8
    interval = simcache.beta_interval(bundle["J_G"])
    assert interval["discriminant"] == pytest.approx(
        interval["eta"] ** 2 - 4 * interval["eta"] * interval["gamma"] + 4)
    spectral, one, infinity = simcache.operator_norms(np.diag([3.0, -4.0]))
    assert (spectral, one, infinity) == pytest.approx((4.0, 4.0, 4.0))


def test_custom_acceptance_callable(grid):
    _, index, rates = grid
    q = simcache.from_callable(lambda cand, req: 1.0 if cand == req else 0.5)
    result = simcache.solve(index, q, rates, 10.0, max_iterations=200)
    exact_only = simcache.solve(index, simcache.accept_exact_only(), rates, 10.0)
    always = simcache.solve(index, simcache.accept_always(), rates, 10.0,
                            max_iterations=200)
    assert exact_only["hit_rate"] <= result["hit_rate"] <= always["hit_rate"] + 1e-9
