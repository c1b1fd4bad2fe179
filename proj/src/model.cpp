#include "simcache/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace simcache {

namespace {

void check_g_args(double refresh_rate, double insertion_rate, double timer) {
  if (refresh_rate < 0.0 || insertion_rate < 0.0)
    throw std::invalid_argument("rates must be >= 0");
  if (!(timer >= 0.0)) throw std::invalid_argument("timer must be >= 0");
}

// expm1(u)/u, extended continuously by 1 at u = 0. The series branch avoids
// 0/0 noise for tiny u.
double expm1_over(double u) {
  if (u < 1e-8) return 1.0 + u / 2.0 + u * u / 6.0;
  return std::expm1(u) / u;
}

void check_unit_interval(const Vec& occupancy) {
  for (Eigen::Index i = 0; i < occupancy.size(); ++i)
    if (!(occupancy[i] >= -1e-12 && occupancy[i] <= 1.0 + 1e-12))
      throw std::invalid_argument("occupancy out of [0, 1] at item " + std::to_string(i));
}

double checked_q(const AcceptanceFn& q, ItemId candidate, ItemId requested) {
  const double value = q(candidate, requested);
  if (!(value >= 0.0 && value <= 1.0))
    throw std::invalid_argument("acceptance probability out of [0, 1]");
  return value;
}

double clamp01(double x) { return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x); }

// Prefix products pref[k] = prod_{i<k} (1 - o_{list[i]}) for every item's
// neighbor list, flattened; offsets[n] points at item n's block of size
// |N(n)| + 1.
struct PrefixProducts {
  std::vector<double> values;
  std::vector<std::size_t> offsets;

  const double* row(ItemId n) const { return values.data() + offsets[n]; }
};

PrefixProducts neighbor_prefix_products(const NeighborhoodIndex& index, const Vec& occupancy) {
  PrefixProducts out;
  out.offsets.resize(index.size());
  out.values.reserve(index.edge_count() + index.size());
  for (ItemId n = 0; n < index.size(); ++n) {
    out.offsets[n] = out.values.size();
    double acc = 1.0;
    out.values.push_back(acc);
    for (ItemId m : index.neighbors[n]) {
      acc *= 1.0 - clamp01(occupancy[m]);
      out.values.push_back(acc);
    }
  }
  return out;
}

}  // namespace

double occupancy_g(double refresh_rate, double insertion_rate, double timer) {
  check_g_args(refresh_rate, insertion_rate, timer);
  if (insertion_rate == 0.0 || timer == 0.0) return 0.0;
  const double u = refresh_rate * timer;
  const double s = insertion_rate * timer * expm1_over(u);  // E[On] / E[Off]
  if (std::isinf(s)) return 1.0;
  return s <= 1.0 ? s / (1.0 + s) : 1.0 / (1.0 + 1.0 / s);
}

GPartials occupancy_g_partials(double refresh_rate, double insertion_rate, double timer) {
  check_g_args(refresh_rate, insertion_rate, timer);
  const double u = refresh_rate * timer;
  const double eu1 = expm1_over(u);      // expm1(u)/u
  const double busy = timer * eu1;       // expm1(u)/x1, the mean On period
  const double s = insertion_rate * busy;
  if (std::isinf(s) || std::isinf(busy)) return {0.0, 0.0, 0.0};
  const double denom = (1.0 + s) * (1.0 + s);
  // d(busy)/d(refresh): (timer*e^u*x1 - expm1(u)) / x1^2, series near u = 0
  double dbusy;
  if (u < 1e-8)
    dbusy = timer * timer * (0.5 + u / 3.0 + u * u / 8.0);
  else
    dbusy = (timer * std::exp(u) - busy) / refresh_rate;
  GPartials out;
  out.d_refresh = insertion_rate * dbusy / denom;
  out.d_insertion = busy / denom;
  out.d_timer = insertion_rate * std::exp(u) / denom;
  if (std::isnan(out.d_refresh) || std::isnan(out.d_insertion) || std::isnan(out.d_timer))
    return {0.0, 0.0, 0.0};  // deep saturation: all sensitivities vanish
  return out;
}

Vec insertion_probs(const NeighborhoodIndex& index, const AcceptanceFn& q, const Vec& occupancy) {
  if (occupancy.size() != index.size()) throw std::invalid_argument("occupancy size mismatch");
  check_unit_interval(occupancy);
  Vec p(index.size());
  for (ItemId n = 0; n < index.size(); ++n) {
    double miss_all = 1.0;  // prod (1 - o_m) over neighbors seen so far
    double rejected = 0.0;  // sum of closest-candidate-rejects terms
    for (ItemId m : index.neighbors[n]) {
      const double o_m = clamp01(occupancy[m]);
      rejected += (1.0 - checked_q(q, m, n)) * o_m * miss_all;
      miss_all *= 1.0 - o_m;
    }
    p[n] = miss_all + rejected;
  }
  return p;
}

Vec insertion_rates(const NeighborhoodIndex& index, const AcceptanceFn& q, const Vec& rates,
                    const Vec& occupancy) {
  if (rates.size() != index.size()) throw std::invalid_argument("rate vector size mismatch");
  return rates.cwiseProduct(insertion_probs(index, q, occupancy));
}

Vec refresh_rates(const NeighborhoodIndex& index, const AcceptanceFn& q, const Vec& rates,
                  const Vec& occupancy) {
  if (occupancy.size() != index.size() || rates.size() != index.size())
    throw std::invalid_argument("input size mismatch");
  check_unit_interval(occupancy);
  const PrefixProducts pref = neighbor_prefix_products(index, occupancy);
  Vec r(index.size());
  for (ItemId n = 0; n < index.size(); ++n) {
    double extra = 0.0;
    const auto& list = index.neighbors[n];
    const auto& rank = index.rank_in_neighbor[n];
    for (std::size_t k = 0; k < list.size(); ++k) {
      const ItemId m = list[k];
      // n refreshes on m's request only if every item closer to m than n is
      // uncached; that set is m itself plus the prefix of m's list before n.
      const double closer_uncached = (1.0 - clamp01(occupancy[m])) * pref.row(m)[rank[k]];
      extra += checked_q(q, n, m) * rates[m] * closer_uncached;
    }
    r[n] = rates[n] + extra;
  }
  return r;
}

double capacity_residual(const NeighborhoodIndex& index, const AcceptanceFn& q, const Vec& rates,
                         const Vec& occupancy, double capacity, double timer) {
  const Vec e = insertion_rates(index, q, rates, occupancy);
  const Vec r = refresh_rates(index, q, rates, occupancy);
  double total = 0.0;
  for (ItemId n = 0; n < index.size(); ++n) total += occupancy_g(r[n], e[n], timer);
  return total - capacity;
}

namespace {

// Bisection on a monotone increasing f over [0, hi], hi found by doubling
// from the initial guess. Runs the bracket down to machine width so the root
// is a deterministic function of f alone, then verifies |f| <= tol.
double monotone_root(const std::function<double(double)>& f, double hi_guess, double tol,
                     const char* what) {
  double lo = 0.0;
  double hi = hi_guess > 0.0 ? hi_guess : 1.0;
  int expansions = 0;
  while (f(hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
    if (++expansions > 200) throw std::runtime_error(std::string(what) + ": no finite root");
  }
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // bracket at machine width
    if (f(mid) < 0.0) lo = mid; else hi = mid;
  }
  const double root = 0.5 * (lo + hi);
  if (std::abs(f(root)) > tol)
    throw std::runtime_error(std::string(what) + ": residual " + std::to_string(std::abs(f(root))) +
                             " above tolerance");
  return root;
}

}  // namespace

double lru_characteristic_time(const Vec& rates, double capacity, double tol) {
  if (!(capacity > 0.0)) throw std::invalid_argument("capacity must be > 0");
  int positive = 0;
  double max_rate = 0.0;
  for (Eigen::Index n = 0; n < rates.size(); ++n) {
    if (rates[n] > 0.0) ++positive;
    max_rate = std::max(max_rate, rates[n]);
  }
  if (!(positive > capacity))
    throw std::runtime_error("characteristic time undefined: only " + std::to_string(positive) +
                             " items have positive request rate, capacity is " +
                             std::to_string(capacity));
  const auto f = [&](double t) {
    double total = 0.0;
    for (Eigen::Index n = 0; n < rates.size(); ++n) total += -std::expm1(-rates[n] * t);
    return total - capacity;
  };
  return monotone_root(f, 1.0 / max_rate, tol, "lru characteristic time");
}

double characteristic_time_from_rates(const Vec& refresh, const Vec& insertion, double capacity,
                                      double hi_guess, double tol) {
  if (!(capacity > 0.0)) throw std::invalid_argument("capacity must be > 0");
  if (refresh.size() != insertion.size()) throw std::invalid_argument("size mismatch");
  int positive = 0;
  for (Eigen::Index n = 0; n < insertion.size(); ++n)
    if (insertion[n] > 0.0) ++positive;
  if (!(positive > capacity))
    throw std::runtime_error("characteristic time undefined: only " + std::to_string(positive) +
                             " items have positive insertion rate, capacity is " +
                             std::to_string(capacity));
  const auto f = [&](double t) {
    double total = 0.0;
    for (Eigen::Index n = 0; n < insertion.size(); ++n)
      total += occupancy_g(refresh[n], insertion[n], t);
    return total - capacity;
  };
  return monotone_root(f, hi_guess, tol, "characteristic time");
}

double solve_characteristic_time(const NeighborhoodIndex& index, const AcceptanceFn& q,
                                 const Vec& rates, const Vec& occupancy, double capacity,
                                 double tol) {
  const Vec e = insertion_rates(index, q, rates, occupancy);
  const Vec r = refresh_rates(index, q, rates, occupancy);
  // With some E_n > C items positive the LRU time exists too (E <= lambda),
  // so it is a safe starting bracket guess.
  double guess = 1.0;
  int lambda_positive = 0;
  for (Eigen::Index n = 0; n < rates.size(); ++n)
    if (rates[n] > 0.0) ++lambda_positive;
  if (capacity > 0.0 && lambda_positive > capacity)
    guess = lru_characteristic_time(rates, capacity, 1e-6);
  return characteristic_time_from_rates(r, e, capacity, guess, tol);
}

Vec item_hit_probs(const NeighborhoodIndex& index, const AcceptanceFn& q, const Vec& occupancy) {
  if (occupancy.size() != index.size()) throw std::invalid_argument("occupancy size mismatch");
  check_unit_interval(occupancy);
  const Vec p_i = insertion_probs(index, q, occupancy);
  Vec h(index.size());
  for (ItemId n = 0; n < index.size(); ++n) {
    const double o_n = clamp01(occupancy[n]);
    double neighbor_prefix = 1.0;
    double approx = 0.0;
    for (ItemId m : index.neighbors[n]) {
      const double o_m = clamp01(occupancy[m]);
      approx += checked_q(q, m, n) * o_m * (1.0 - o_n) * neighbor_prefix;
      neighbor_prefix *= 1.0 - o_m;
    }
    const double neighbor_form = o_n + approx;
    const double ttl_form = o_n + (1.0 - o_n) * (1.0 - p_i[n]);
    if (std::abs(neighbor_form - ttl_form) > 1e-12)
      throw std::logic_error("hit probability forms disagree at item " + std::to_string(n));
    h[n] = neighbor_form;
  }
  return h;
}

double aggregate_hit_rate(const Vec& rates, const Vec& hit_probs) {
  if (rates.size() != hit_probs.size()) throw std::invalid_argument("size mismatch");
  return rates.dot(hit_probs);
}

double state_probability(const Vec& occupancy, const std::vector<ItemId>& subset) {
  check_unit_interval(occupancy);
  std::vector<bool> in(occupancy.size(), false);
  for (ItemId n : subset) {
    if (n < 0 || n >= occupancy.size()) throw std::invalid_argument("item id out of range");
    in[n] = true;
  }
  double p = 1.0;
  for (Eigen::Index n = 0; n < occupancy.size(); ++n)
    p *= in[n] ? occupancy[n] : 1.0 - occupancy[n];
  return p;
}

std::vector<double> state_distribution(const Vec& occupancy, int max_items) {
  const int n = static_cast<int>(occupancy.size());
  if (n > max_items)
    throw std::invalid_argument("state distribution enumeration refused for N > " +
                                std::to_string(max_items));
  check_unit_interval(occupancy);
  std::vector<double> pi(std::size_t{1} << n, 1.0);
  for (std::size_t mask = 0; mask < pi.size(); ++mask)
    for (int k = 0; k < n; ++k)
      pi[mask] *= (mask >> k) & 1 ? occupancy[k] : 1.0 - occupancy[k];
  return pi;
}

}  // namespace simcache
