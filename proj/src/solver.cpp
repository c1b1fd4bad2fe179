#include "simcache/solver.hpp"

#include <cmath>
#include <stdexcept>

#include "simcache/model.hpp"

namespace simcache {

namespace {

MapResult apply_G(const NeighborhoodIndex& index, const AcceptanceFn& q, const Vec& rates,
                  double capacity, const Vec& occupancy, double hi_guess, double tc_tol) {
  const Vec e = insertion_rates(index, q, rates, occupancy);
  const Vec r = refresh_rates(index, q, rates, occupancy);
  const double t = characteristic_time_from_rates(r, e, capacity, hi_guess, tc_tol);
  Vec next(index.size());
  for (ItemId n = 0; n < index.size(); ++n) next[n] = occupancy_g(r[n], e[n], t);
  return {std::move(next), t};
}

}  // namespace

MapResult map_G(const NeighborhoodIndex& index, const AcceptanceFn& q, const Vec& rates,
                double capacity, const Vec& occupancy, double tc_tol) {
  double guess = 1.0;
  int positive = 0;
  for (Eigen::Index n = 0; n < rates.size(); ++n)
    if (rates[n] > 0.0) ++positive;
  if (capacity > 0.0 && positive > capacity)
    guess = lru_characteristic_time(rates, capacity, 1e-6);
  return apply_G(index, q, rates, capacity, occupancy, guess, tc_tol);
}

Vec map_G_beta(const NeighborhoodIndex& index, const AcceptanceFn& q, const Vec& rates,
               double capacity, const Vec& occupancy, double beta, double tc_tol) {
  if (!(beta >= 0.0 && beta < 1.0)) throw std::invalid_argument("beta must be in [0, 1)");
  const MapResult g = map_G(index, q, rates, capacity, occupancy, tc_tol);
  return (1.0 - beta) * g.occupancy + beta * occupancy;
}

SolveResult solve(const NeighborhoodIndex& index, const AcceptanceFn& q, const Vec& rates,
                  double capacity, const SolverConfig& config) {
  if (!(config.beta >= 0.0 && config.beta < 1.0))
    throw std::invalid_argument("beta must be in [0, 1)");
  if (config.max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
  if (rates.size() != index.size()) throw std::invalid_argument("rate vector size mismatch");
  if (!(capacity > 0.0 && capacity < index.size()))
    throw std::invalid_argument("capacity must satisfy 0 < C < N");

  SolveResult result;
  result.t_c0 = lru_characteristic_time(rates, capacity, config.tc_tol);

  Vec o = Vec::Zero(index.size());
  for (ItemId n = 0; n < index.size(); ++n) o[n] = -std::expm1(-rates[n] * result.t_c0);

  const auto record = [&](int j, const Vec& occ, double t_c, double step) {
    IterationRecord row;
    row.iteration = j;
    row.occupancy = occ;
    row.hit_probs = item_hit_probs(index, q, occ);
    row.t_c = t_c;
    row.hit_rate = aggregate_hit_rate(rates, row.hit_probs);
    row.step_norm = step;
    row.occupancy_sum = occ.sum();
    result.trace.rows.push_back(std::move(row));
  };

  record(0, o, result.t_c0, 0.0);
  result.t_c = result.t_c0;

  bool converged = false;
  int j = 0;
  while (j < config.max_iterations) {
    ++j;
    MapResult g;
    try {
      g = apply_G(index, q, rates, capacity, o, result.t_c, config.tc_tol);
    } catch (const std::runtime_error& err) {
      throw std::runtime_error("iteration " + std::to_string(j) + ": " + err.what());
    }
    result.trace.rows[j - 1].residual = (g.occupancy - o).lpNorm<Eigen::Infinity>();
    const Vec next = (1.0 - config.beta) * g.occupancy + config.beta * o;
    const double step = (next - o).lpNorm<Eigen::Infinity>();
    o = next;
    result.t_c = g.t_c;
    record(j, o, g.t_c, step);
    if (step <= config.occupancy_tol) {
      converged = true;
      break;
    }
  }

  // Residual of the returned iterate needs one more evaluation of G.
  const MapResult last = apply_G(index, q, rates, capacity, o, result.t_c, config.tc_tol);
  result.trace.rows[j].residual = (last.occupancy - o).lpNorm<Eigen::Infinity>();

  result.occupancy = o;
  result.hit_probs = result.trace.rows[j].hit_probs;
  result.hit_rate = result.trace.rows[j].hit_rate;
  result.converged = converged;
  result.iterations = j;
  result.final_residual = result.trace.rows[j].residual;
  result.stop_reason = converged ? "step norm below occupancy_tol" : "max iterations reached";
  return result;
}

}  // namespace simcache
