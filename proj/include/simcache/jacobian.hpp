#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "simcache/catalog.hpp"
#include "simcache/types.hpp"

namespace simcache {

/// d(insertion rate)/d(occupancy): row n holds the partials of E_n.
Mat jacobian_insertion_rates(const NeighborhoodIndex& index, const AcceptanceFn& q,
                             const Vec& rates, const Vec& occupancy);

/// d(refresh rate)/d(occupancy): row n holds the partials of R_n.
Mat jacobian_refresh_rates(const NeighborhoodIndex& index, const AcceptanceFn& q,
                           const Vec& rates, const Vec& occupancy);

struct JacobianBundle {
  Mat J_E;
  Mat J_R;
  Vec dg_refresh;    // dg/dx1 at (R_n, E_n, t_C) per item
  Vec dg_insertion;  // dg/dx2
  Vec dg_timer;      // dg/dx3
  Mat J_G;
  double t_c = 0.0;

  /// J of the damped map: (1-beta) J_G + beta I.
  Mat damped(double beta) const;
};

/// Full Jacobian of the occupancy map: diagonal-weighted J_R and J_E plus the
/// rank-one correction that carries the characteristic-time sensitivity.
JacobianBundle jacobian_G(const NeighborhoodIndex& index, const AcceptanceFn& q, const Vec& rates,
                          double capacity, const Vec& occupancy, double tc_tol = 1e-10);

struct OperatorNorms {
  double spectral = 0.0;
  double one = 0.0;
  double infinity = 0.0;
};

/// Spectral norm by power iteration on M M^T (matrix-free products),
/// randomized start, restart on stagnation.
double spectral_norm(const Mat& m, double tol = 1e-10, std::uint64_t seed = 12345);

/// Spectral radius of a symmetric matrix via shifted power iterations on
/// both ends of the spectrum.
double symmetric_spectral_radius(const Mat& s, double tol = 1e-10, std::uint64_t seed = 12345);

OperatorNorms operator_norms(const Mat& m, double tol = 1e-10, std::uint64_t seed = 12345);

struct BetaInterval {
  double gamma = 0.0;         // ||J_G||_2
  double eta = 0.0;           // spectral radius of J_G + J_G^T
  double discriminant = 0.0;  // eta^2 - 4 eta gamma + 4
  double lo = 0.0;
  double hi = 0.0;

  bool nonempty() const { return discriminant >= 0.0 && lo < hi; }
};

/// Damping interval (a, b): every beta inside keeps ||J_{G_beta}||_2 < 1.
/// Empty (discriminant < 0 or a >= b) is a valid outcome.
BetaInterval beta_interval(const Mat& J_G, double tol = 1e-10, std::uint64_t seed = 12345);

/// Random points of the capped simplex, by symmetric Dirichlet scaling with
/// clip-at-one redistribution.
std::vector<Vec> sample_capped_simplex(int n_items, double capacity, int count,
                                       std::uint64_t seed);

struct BetaChoice {
  double beta = 0.5;
  bool verified = false;
  double intersection_lo = 0.0;
  double intersection_hi = 0.0;
  std::vector<BetaInterval> intervals;  // one per usable sample
  std::vector<std::string> warnings;
};

/// Randomized damping selection: intersect the per-sample intervals and take
/// the midpoint; falls back to beta = 0.5 (unverified) when any sample fails
/// the discriminant test or the intersection is empty.
BetaChoice tune_beta(const NeighborhoodIndex& index, const AcceptanceFn& q, const Vec& rates,
                     double capacity, int d_samples = 8, std::uint64_t seed = 12345);

}  // namespace simcache
