// Acceptance suite: each criterion is a self-contained scenario with pinned
// tolerances, printing one PASS/FAIL line. Run all or --criterion <k>.

#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "simcache/baselines.hpp"
#include "simcache/jacobian.hpp"
#include "simcache/model.hpp"
#include "simcache/simulate.hpp"
#include "simcache/solver.hpp"

using namespace simcache;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool condition, const std::string& label) {
    if (!condition) {
      pass = false;
      detail << " [violated: " << label << "]";
    }
  }
};

AcceptanceFn power_rule(const Catalog& catalog, double exponent) {
  auto coords = std::make_shared<Mat>(catalog.coords);
  return [coords, exponent](ItemId candidate, ItemId requested) {
    if (candidate == requested) return 1.0;
    const double dist = (coords->row(candidate) - coords->row(requested)).norm();
    return std::min(1.0, std::pow(dist, -exponent));
  };
}

// --- 1: exact TTL reduction on an isolated catalog -------------------------
Outcome ttl_reduction() {
  Outcome out;
  const auto index = isolated_index(100);
  const PopularityModel pop = zipf_popularity(100, 1.0);
  const SolveResult result = solve(index, accept_always(), pop.rates, 10.0);
  out.require(result.converged, "solver converged");
  out.require(result.iterations <= 2, "<= 2 iterations");
  out.require(result.final_residual < 1e-12, "residual < 1e-12");
  double worst = 0.0;
  for (int n = 0; n < 100; ++n)
    worst = std::max(worst,
                     std::abs(result.hit_probs[n] - (-std::expm1(-pop.rates[n] * result.t_c))));
  out.require(worst < 1e-10, "h matches 1 - exp(-lambda t_C) to 1e-10");
  out.detail << "iterations=" << result.iterations << " residual=" << result.final_residual
             << " max|h - h_ttl|=" << worst;
  return out;
}

// --- 2: renewal oracle vs the occupancy formula -----------------------------
Outcome occupancy_oracle() {
  Outcome out;
  const RenewalEstimate est = rnd_ttl_renewal_oracle(1.0, 2.0, 1.0, 1000000, 20260809);
  const double expected = occupancy_g(2.0, 1.0, 1.0);
  const double diff = std::abs(est.occupancy - expected);
  out.require(diff <= 3.0 * est.std_error, "within 3 standard errors");
  out.require(diff <= 0.01 * expected, "within 1% relative");
  out.detail << "monte_carlo=" << est.occupancy << " formula=" << expected
             << " diff=" << diff << " se=" << est.std_error;
  return out;
}

// --- 3: analytic occupancy-map Jacobian -------------------------------------
Outcome jacobian_correctness() {
  Outcome out;
  rng::Engine eng(33301);
  double worst_fd = 0.0, worst_col = 0.0, worst_identity = 0.0;
  for (int round = 0; round < 10; ++round) {
    const int n = 20 + static_cast<int>(rng::uniform01(eng) * 11);  // 20..30
    const Catalog catalog = simcache::testing::random_catalog(n, eng, 6.0);
    const double radius = 1.0 + rng::uniform01(eng) * 2.0;
    const auto index = build_neighborhood_index(catalog, {radius});
    const auto q = simcache::testing::random_q_table(n, eng);
    Vec lambda(n);
    for (int i = 0; i < n; ++i) lambda[i] = rng::uniform01(eng) + 0.02;
    lambda /= lambda.sum();
    const double capacity = 2.0 + rng::uniform01(eng) * (n / 3.0);
    const Vec o = simcache::testing::random_occupancy_in_simplex(n, capacity, eng);

    const JacobianBundle bundle = jacobian_G(index, q, lambda, capacity, o, 1e-12);
    const Mat fd = simcache::testing::fd_jacobian(
        [&](const Vec& x) { return map_G(index, q, lambda, capacity, x, 1e-12).occupancy; }, o);
    worst_fd = std::max(worst_fd, (bundle.J_G - fd).cwiseAbs().maxCoeff());
    worst_col = std::max(worst_col, bundle.J_G.colwise().sum().cwiseAbs().maxCoeff());
    const double beta = rng::uniform01(eng) * 0.9;
    const Mat expected = (1.0 - beta) * bundle.J_G + beta * Mat::Identity(n, n);
    worst_identity = std::max(worst_identity,
                              (bundle.damped(beta) - expected).cwiseAbs().maxCoeff());
  }
  out.require(worst_fd < 1e-4, "max entry error vs finite differences < 1e-4");
  out.require(worst_identity == 0.0, "damping identity exact");
  out.require(worst_col < 1e-6, "column sums below 1e-6");
  out.detail << "max|J_G - fd|=" << worst_fd << " max|colsum|=" << worst_col;
  return out;
}

// --- 4: beta interval soundness ---------------------------------------------
Outcome beta_interval_soundness() {
  Outcome out;
  // 50 items on a line, radius 1, acceptance 1/2: moderate coupling
  Catalog catalog;
  catalog.coords.resize(50, 2);
  for (int k = 0; k < 50; ++k) {
    catalog.coords(k, 0) = k;
    catalog.coords(k, 1) = 0;
  }
  const auto index = build_neighborhood_index(catalog, {1.0});
  const auto q = simcache::testing::constant_q(0.5);
  const Vec lambda = Vec::Constant(50, 0.02);
  const double capacity = 10.0;
  const double eps = 1e-6;

  const auto samples = sample_capped_simplex(50, capacity, 20, 404);
  double worst_norm = 0.0;
  int checked = 0;
  for (const Vec& o : samples) {
    const JacobianBundle bundle = jacobian_G(index, q, lambda, capacity, o);
    const BetaInterval interval = beta_interval(bundle.J_G);
    out.require(interval.discriminant >= 0.0, "discriminant nonnegative");
    if (interval.discriminant < 0.0) continue;
    out.require(interval.lo < interval.hi, "interval nonempty");
    for (double beta : {interval.lo + eps, 0.5 * (interval.lo + interval.hi),
                        interval.hi - eps}) {
      const double norm = spectral_norm(bundle.damped(beta));
      worst_norm = std::max(worst_norm, norm);
      out.require(norm < 1.0, "||J_Gbeta||_2 < 1 inside the interval");
      const double bound = (1.0 + interval.gamma) * beta * beta -
                           (2.0 * interval.gamma - interval.eta) * beta + interval.gamma;
      out.require(norm * norm <= bound + 1e-9, "quadratic upper bound");
      ++checked;
    }
  }
  out.detail << "samples=20 checkpoints=" << checked << " worst norm=" << worst_norm;
  return out;
}

// --- 5: desk-scale hit-rate comparison --------------------------------------
Outcome desk_scale_comparison() {
  Outcome out;
  const Catalog catalog = grid_catalog(20);
  const auto index = build_neighborhood_index(catalog, {1.0}, TieBreak::counterclockwise);
  std::vector<Vec> hotspots(2, Vec(2));
  hotspots[0] << 5, 5;
  hotspots[1] << 15, 15;
  const PopularityModel pop = synthetic_popularity(catalog, hotspots, 2.5);
  const auto q = power_rule(catalog, 2.0);  // q == 1 within radius 1

  for (double capacity : {20.0, 50.0, 100.0}) {
    const SolveResult ours = solve(index, q, pop.rates, capacity);
    PolicySpec policy;
    policy.kind = PolicySpec::Kind::sim_lru;
    policy.capacity = static_cast<int>(capacity);
    const MeasuredStats exp_sim =
        measure_policy(index, policy, pop, 40000, 10, 5000 + static_cast<int>(capacity));
    const double lru = lru_ttl_estimate(pop.rates, capacity).hit_rate;
    const double greedy =
        greedy_coverage(index, pop.rates, static_cast<int>(capacity)).covered_weight;

    const std::string at = " at C=" + std::to_string(static_cast<int>(capacity));
    out.require(std::abs(ours.hit_rate - exp_sim.mean_hit_rate) <= 0.05,
                "|ours - simulation| <= 0.05" + at);
    out.require(greedy >= ours.hit_rate, "greedy >= ours" + at);
    out.require(ours.hit_rate >= lru, "ours >= lru" + at);
    out.require(ours.hit_rate <= exp_sim.mean_hit_rate + exp_sim.ci95_half_width,
                "ours underestimates or meets the CI" + at);
    out.detail << " C=" << capacity << ": ours=" << ours.hit_rate
               << " exp=" << exp_sim.mean_hit_rate << "+-" << exp_sim.ci95_half_width
               << " lru=" << lru << " greedy=" << greedy << ";";
  }
  return out;
}

// --- 6: paper-scale convergence (slow) --------------------------------------
Outcome paper_scale_convergence() {
  Outcome out;
  const Catalog catalog = grid_catalog(100);
  const auto index = build_neighborhood_index(catalog, {1.0}, TieBreak::counterclockwise);
  std::vector<Vec> hotspots(2, Vec(2));
  hotspots[0] << 24, 24;
  hotspots[1] << 74, 74;
  const PopularityModel pop = synthetic_popularity(catalog, hotspots, 2.5);
  const auto q = power_rule(catalog, 2.0);

  for (double capacity : {250.0, 500.0, 1000.0}) {
    SolverConfig config;
    config.beta = 0.5;
    config.max_iterations = 25;
    config.occupancy_tol = 0.0;  // run the full 25 iterations
    const SolveResult result = solve(index, q, pop.rates, capacity, config);
    const std::string at = " at C=" + std::to_string(static_cast<int>(capacity));
    out.require(result.iterations == 25, "ran 25 iterations" + at);
    out.require(result.trace.rows.back().step_norm < 1e-4,
                "step norm below 1e-4 by iteration 25" + at);
    out.require(result.t_c > result.t_c0, "final t_C above the LRU t_C" + at);
    for (const auto& row : result.trace.rows)
      out.require(std::abs(row.occupancy_sum - capacity) <= 1e-6,
                  "sum o = C within 1e-6 at every iteration" + at);
    out.detail << " C=" << capacity << ": step25=" << result.trace.rows.back().step_norm
               << " t_C0=" << result.t_c0 << " t_C=" << result.t_c << ";";
  }
  return out;
}

// --- 7: simulator equivalences ----------------------------------------------
Outcome simulator_equivalences() {
  Outcome out;
  const Catalog catalog = grid_catalog(10);
  const auto index = build_neighborhood_index(catalog, {1.0}, TieBreak::counterclockwise);
  std::vector<Vec> hotspots(1, Vec(2));
  hotspots[0] << 5, 5;
  const PopularityModel pop = synthetic_popularity(catalog, hotspots, 1.8);
  const Trace trace = generate_irm_trace(pop, 10000, 777);

  SimOptions options;
  options.track_state_hash = true;
  options.seed = 4242;

  const auto rnd_delta = simulate_rnd_lru(index, accept_exact_only(), trace, 30, options);
  const auto lru = simulate_lru(index.size(), trace, 30, options);
  out.require(rnd_delta.state_hash == lru.state_hash, "Kronecker q is step-identical to LRU");

  const auto rnd_one = simulate_rnd_lru(index, accept_always(), trace, 30, options);
  const auto sim = simulate_sim_lru(index, trace, 30, options);
  out.require(rnd_one.state_hash == sim.state_hash, "q = 1 is step-identical to SIM-LRU");

  out.detail << "lru hash=" << std::hex << lru.state_hash << " sim hash=" << sim.state_hash;
  return out;
}

// --- 8: greedy coverage guarantee -------------------------------------------
Outcome coverage_guarantee() {
  Outcome out;
  rng::Engine eng(88801);
  const double guarantee = 1.0 - std::exp(-1.0);
  double worst_ratio = 1.0;
  for (int round = 0; round < 50; ++round) {
    const int n = 6 + static_cast<int>(rng::uniform01(eng) * 10);  // 6..15
    const Catalog catalog = simcache::testing::random_catalog(n, eng, 4.0);
    const auto index = build_neighborhood_index(catalog, {1.5 + rng::uniform01(eng)});
    Vec w(n);
    for (int i = 0; i < n; ++i) w[i] = rng::uniform01(eng) + 0.01;
    w /= w.sum();
    const int capacity = 1 + static_cast<int>(rng::uniform01(eng) * (n / 2));
    const double greedy = greedy_coverage(index, w, capacity).covered_weight;
    const double optimum = exact_static_optimum(index, w, capacity).covered_weight;
    out.require(greedy >= guarantee * optimum - 1e-12, "greedy >= (1 - 1/e) optimum");
    out.require(greedy <= optimum + 1e-12, "greedy <= optimum");
    if (optimum > 0.0) worst_ratio = std::min(worst_ratio, greedy / optimum);
  }
  out.detail << "instances=50 worst greedy/optimum=" << worst_ratio;
  return out;
}

// --- 9: confidence-interval width at 50 trace repetitions --------------------
Outcome statistical_reproduction() {
  Outcome out;
  const Catalog catalog = grid_catalog(20);
  const auto index = build_neighborhood_index(catalog, {1.0}, TieBreak::counterclockwise);
  std::vector<Vec> hotspots(2, Vec(2));
  hotspots[0] << 5, 5;
  hotspots[1] << 15, 15;
  const PopularityModel pop = synthetic_popularity(catalog, hotspots, 2.5);
  PolicySpec policy;
  policy.kind = PolicySpec::Kind::sim_lru;
  policy.capacity = 50;
  const MeasuredStats stats = measure_policy(index, policy, pop, 200000, 50, 90001);
  out.require(stats.ci95_half_width < 1.2e-3, "95% half-width below 1.2e-3");
  out.detail << "hit rate=" << stats.mean_hit_rate << " half-width=" << stats.ci95_half_width;
  return out;
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

const std::vector<Criterion> kCriteria = {
    {1, "ttl-reduction", ttl_reduction},
    {2, "occupancy-oracle", occupancy_oracle},
    {3, "jacobian-correctness", jacobian_correctness},
    {4, "beta-interval-soundness", beta_interval_soundness},
    {5, "desk-scale-comparison", desk_scale_comparison},
    {6, "paper-scale-convergence", paper_scale_convergence},
    {7, "simulator-equivalences", simulator_equivalences},
    {8, "coverage-guarantee", coverage_guarantee},
    {9, "statistical-reproduction", statistical_reproduction},
};

}  // namespace

int main(int argc, char** argv) {
  int selected = 0;
  for (int i = 1; i < argc; ++i)
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) selected = std::atoi(argv[++i]);

  bool all_pass = true;
  for (const auto& criterion : kCriteria) {
    if (selected != 0 && criterion.id != selected) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criterion.run();
    } catch (const std::exception& err) {
      outcome.pass = false;
      outcome.detail << " [exception: " << err.what() << "]";
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << (outcome.pass ? "PASS" : "FAIL") << " criterion " << criterion.id << " ("
              << criterion.name << ", " << seconds << "s): " << outcome.detail.str() << "\n";
    all_pass = all_pass && outcome.pass;
  }
  return all_pass ? 0 : 1;
}
