#pragma once

#include <string>
#include <vector>

#include "simcache/catalog.hpp"
#include "simcache/types.hpp"

namespace simcache {

struct SolverConfig {
  double beta = 0.5;           // damping: o <- (1-beta) G(o) + beta o
  int max_iterations = 100;
  double occupancy_tol = 1e-8; // stop when the inf-norm step falls below this
  double tc_tol = 1e-10;       // tolerance on the capacity residual root
};

struct IterationRecord {
  int iteration = 0;
  Vec occupancy;       // o(j)
  Vec hit_probs;       // h(j)
  double t_c = 0.0;    // characteristic time used to produce o(j); t_c(0) for row 0
  double hit_rate = 0.0;
  double step_norm = 0.0;   // ||o(j) - o(j-1)||_inf, 0 for row 0
  double residual = 0.0;    // ||o(j) - G(o(j))||_inf
  double occupancy_sum = 0.0;
};

struct SolverTrace {
  std::vector<IterationRecord> rows;  // rows[j] describes iterate j
};

struct MapResult {
  Vec occupancy;  // G(o)
  double t_c;     // characteristic time at the input point
};

/// One application of the occupancy map G(o) = g(R(o), E(o), t_C(o)).
MapResult map_G(const NeighborhoodIndex& index, const AcceptanceFn& q, const Vec& rates,
                double capacity, const Vec& occupancy, double tc_tol = 1e-10);

/// Damped map (1-beta) G(o) + beta o; fixed points coincide with G's.
Vec map_G_beta(const NeighborhoodIndex& index, const AcceptanceFn& q, const Vec& rates,
               double capacity, const Vec& occupancy, double beta, double tc_tol = 1e-10);

struct SolveResult {
  Vec occupancy;
  Vec hit_probs;
  double hit_rate = 0.0;
  double t_c = 0.0;       // characteristic time of the last iteration
  double t_c0 = 0.0;      // LRU characteristic time used for initialization
  bool converged = false; // the step-norm criterion fired
  int iterations = 0;
  double final_residual = 0.0;  // ||o - G(o)||_inf at the returned point
  std::string stop_reason;
  SolverTrace trace;
};

/// Damped fixed-point iteration for the occupancy system, started from the
/// LRU occupancies. Non-convergence within max_iterations is reported, not
/// thrown; characteristic-time failures abort with the iteration index.
SolveResult solve(const NeighborhoodIndex& index, const AcceptanceFn& q, const Vec& rates,
                  double capacity, const SolverConfig& config = {});

}  // namespace simcache
