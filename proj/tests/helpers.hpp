#pragma once

#include <functional>
#include <memory>
#include <random>
#include <vector>

#include "simcache/catalog.hpp"
#include "simcache/rng.hpp"
#include "simcache/types.hpp"

namespace simcache::testing {

// Central finite differences of a vector map; the analytic Jacobians are
// checked against this and never the other way around.
inline Mat fd_jacobian(const std::function<Vec(const Vec&)>& map, const Vec& at,
                       double h = 1e-6) {
  const int n = static_cast<int>(at.size());
  Mat J(map(at).size(), n);
  for (int j = 0; j < n; ++j) {
    Vec hi = at, lo = at;
    hi[j] += h;
    lo[j] -= h;
    J.col(j) = (map(hi) - map(lo)) / (2.0 * h);
  }
  return J;
}

inline double fd_partial(const std::function<double(double)>& f, double at, double h = 1e-6) {
  return (f(at + h) - f(at - h)) / (2.0 * h);
}

// Random points in a square, scaled so the threshold yields nonempty
// neighborhoods for most items.
inline Catalog random_catalog(int n_items, rng::Engine& eng, double box = 10.0) {
  Catalog catalog;
  catalog.coords.resize(n_items, 2);
  for (int n = 0; n < n_items; ++n) {
    catalog.coords(n, 0) = rng::uniform01(eng) * box;
    catalog.coords(n, 1) = rng::uniform01(eng) * box;
  }
  return catalog;
}

// Dense symmetric-support acceptance table with q(n, n) = 1 and random
// values on every other pair.
inline AcceptanceFn random_q_table(int n_items, rng::Engine& eng) {
  auto table = std::make_shared<Mat>(n_items, n_items);
  for (int i = 0; i < n_items; ++i)
    for (int j = 0; j < n_items; ++j) (*table)(i, j) = i == j ? 1.0 : rng::uniform01(eng);
  return [table](ItemId candidate, ItemId requested) { return (*table)(candidate, requested); };
}

inline AcceptanceFn constant_q(double value) {
  return [value](ItemId candidate, ItemId requested) {
    return candidate == requested ? 1.0 : value;
  };
}

inline Vec random_occupancy_in_simplex(int n_items, double capacity, rng::Engine& eng) {
  Vec o(n_items);
  for (int i = 0; i < n_items; ++i) o[i] = rng::exponential(eng, 1.0);
  o *= capacity / o.sum();
  // keep strictly inside (0, 1) so finite differences stay in-domain
  for (int i = 0; i < n_items; ++i)
    if (o[i] > 0.95) o[i] = 0.95;
  return o;
}

}  // namespace simcache::testing
