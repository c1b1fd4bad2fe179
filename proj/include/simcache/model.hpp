#pragma once

#include <vector>

#include "simcache/catalog.hpp"
#include "simcache/types.hpp"

namespace simcache {

/// Stationary occupancy of one item under the decoupled TTL model: renewal
/// cycles alternate an Off period of mean 1/insertion_rate and an On period
/// equal to the busy period of a Poisson(refresh_rate) reset stream, each
/// reset granting `timer` more time. Value in [0, 1); reduces to
/// 1 - exp(-rate * timer) when refresh == insertion == rate.
double occupancy_g(double refresh_rate, double insertion_rate, double timer);

struct GPartials {
  double d_refresh;    // dg / d(refresh rate)
  double d_insertion;  // dg / d(insertion rate)
  double d_timer;      // dg / d(timer)
};

/// Analytic partials of occupancy_g; all nonnegative.
GPartials occupancy_g_partials(double refresh_rate, double insertion_rate, double timer);

/// p_i[n]: probability that a request for a non-cached n misses through its
/// whole neighborhood (and is therefore inserted). Ordered prefix products
/// over the neighbor list; no divisions.
Vec insertion_probs(const NeighborhoodIndex& index, const AcceptanceFn& q, const Vec& occupancy);

/// Per-item insertion rates E(o) = lambda .* insertion_probs(o).
Vec insertion_rates(const NeighborhoodIndex& index, const AcceptanceFn& q, const Vec& rates,
                    const Vec& occupancy);

/// Per-item refresh rates R(o): own requests plus accepted requests of
/// neighbors for which this item is the closest cached candidate.
Vec refresh_rates(const NeighborhoodIndex& index, const AcceptanceFn& q, const Vec& rates,
                  const Vec& occupancy);

/// F(o, T) = sum_n g(R_n, E_n, T) - C. Strictly increasing in T while any
/// insertion rate is positive; F(o, 0) = -C.
double capacity_residual(const NeighborhoodIndex& index, const AcceptanceFn& q, const Vec& rates,
                         const Vec& occupancy, double capacity, double timer);

/// Root of sum_n (1 - exp(-rates[n] * t)) = C: the LRU characteristic time.
double lru_characteristic_time(const Vec& rates, double capacity, double tol = 1e-10);

/// Root T of F(o, T) = 0. Bracketed bisection, expanding the upper bracket
/// geometrically from the LRU characteristic time, run down to a
/// machine-width bracket; tol is verified on |F| afterwards.
double solve_characteristic_time(const NeighborhoodIndex& index, const AcceptanceFn& q,
                                 const Vec& rates, const Vec& occupancy, double capacity,
                                 double tol = 1e-10);

/// Same root with the refresh/insertion rate vectors already in hand.
double characteristic_time_from_rates(const Vec& refresh, const Vec& insertion, double capacity,
                                      double hi_guess, double tol = 1e-10);

/// Per-item hit probabilities h_n = o_n + sum over neighbors of accepted
/// approximate hits. Computed through both the neighbor-sum form and the
/// 1 - p_i form, which must agree to 1e-12.
Vec item_hit_probs(const NeighborhoodIndex& index, const AcceptanceFn& q, const Vec& occupancy);

/// H = sum_n lambda_n h_n.
double aggregate_hit_rate(const Vec& rates, const Vec& hit_probs);

/// Product-form probability of the exact cache content `subset`.
double state_probability(const Vec& occupancy, const std::vector<ItemId>& subset);

/// Full 2^N product-form distribution, indexed by item bitmask. Refused for
/// more than max_items items.
std::vector<double> state_distribution(const Vec& occupancy, int max_items = 20);

}  // namespace simcache
