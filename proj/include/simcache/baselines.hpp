#pragma once

#include <vector>

#include "simcache/catalog.hpp"
#include "simcache/types.hpp"

namespace simcache {

struct TtlEstimate {
  Vec hit_probs;
  double t_c = 0.0;
  double hit_rate = 0.0;
};

/// Classic TTL approximation for LRU: h_n = 1 - exp(-lambda_n t_C) with t_C
/// from the capacity constraint.
TtlEstimate lru_ttl_estimate(const Vec& rates, double capacity, double tol = 1e-10);

/// LRU with aggregate requests: each item's rate is replaced by the sum over
/// its closed neighborhood before applying the TTL approximation; the hit
/// rate is still weighted by the original rates.
TtlEstimate lru_agg_estimate(const NeighborhoodIndex& index, const Vec& rates, double capacity,
                             double tol = 1e-10);

struct StaticAllocation {
  std::vector<ItemId> chosen;
  double covered_weight = 0.0;  // popularity mass of the union of closed neighborhoods
};

/// Greedy weighted max coverage over closed neighborhoods; ties broken by
/// smallest id. (1 - 1/e) approximation of the static optimum.
StaticAllocation greedy_coverage(const NeighborhoodIndex& index, const Vec& rates, int capacity);

/// Exhaustive optimum with simple pruning; desk-scale oracle for the greedy
/// guarantee.
StaticAllocation exact_static_optimum(const NeighborhoodIndex& index, const Vec& rates,
                                      int capacity, int budget_items = 25);

}  // namespace simcache
