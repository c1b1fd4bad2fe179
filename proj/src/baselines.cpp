#include "simcache/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "simcache/model.hpp"

namespace simcache {

TtlEstimate lru_ttl_estimate(const Vec& rates, double capacity, double tol) {
  if (!(capacity < rates.size())) throw std::invalid_argument("capacity must be < N");
  TtlEstimate est;
  est.t_c = lru_characteristic_time(rates, capacity, tol);
  est.hit_probs.resize(rates.size());
  for (Eigen::Index n = 0; n < rates.size(); ++n)
    est.hit_probs[n] = -std::expm1(-rates[n] * est.t_c);
  est.hit_rate = aggregate_hit_rate(rates, est.hit_probs);
  return est;
}

TtlEstimate lru_agg_estimate(const NeighborhoodIndex& index, const Vec& rates, double capacity,
                             double tol) {
  if (rates.size() != index.size()) throw std::invalid_argument("rate vector size mismatch");
  if (!(capacity < rates.size())) throw std::invalid_argument("capacity must be < N");
  Vec aggregated = rates;
  for (ItemId n = 0; n < index.size(); ++n)
    for (ItemId m : index.neighbors[n]) aggregated[n] += rates[m];
  TtlEstimate est;
  est.t_c = lru_characteristic_time(aggregated, capacity, tol);
  est.hit_probs.resize(rates.size());
  for (Eigen::Index n = 0; n < rates.size(); ++n)
    est.hit_probs[n] = -std::expm1(-aggregated[n] * est.t_c);
  est.hit_rate = aggregate_hit_rate(rates, est.hit_probs);
  return est;
}

namespace {

double uncovered_gain(const NeighborhoodIndex& index, const Vec& rates,
                      const std::vector<bool>& covered, ItemId n) {
  double gain = covered[n] ? 0.0 : rates[n];
  for (ItemId m : index.neighbors[n])
    if (!covered[m]) gain += rates[m];
  return gain;
}

void cover_with(const NeighborhoodIndex& index, std::vector<bool>& covered, ItemId n) {
  covered[n] = true;
  for (ItemId m : index.neighbors[n]) covered[m] = true;
}

}  // namespace

StaticAllocation greedy_coverage(const NeighborhoodIndex& index, const Vec& rates, int capacity) {
  if (capacity < 1) throw std::invalid_argument("capacity must be >= 1");
  if (rates.size() != index.size()) throw std::invalid_argument("rate vector size mismatch");
  StaticAllocation alloc;
  std::vector<bool> covered(index.size(), false);
  for (int round = 0; round < capacity && round < index.size(); ++round) {
    ItemId best = -1;
    double best_gain = 0.0;
    for (ItemId n = 0; n < index.size(); ++n) {
      const double gain = uncovered_gain(index, rates, covered, n);
      if (gain > best_gain) {  // strict: ties fall to the smallest id
        best_gain = gain;
        best = n;
      }
    }
    if (best < 0) break;  // everything with mass is covered
    alloc.chosen.push_back(best);
    alloc.covered_weight += best_gain;
    cover_with(index, covered, best);
  }
  return alloc;
}

StaticAllocation exact_static_optimum(const NeighborhoodIndex& index, const Vec& rates,
                                      int capacity, int budget_items) {
  if (capacity < 1) throw std::invalid_argument("capacity must be >= 1");
  if (rates.size() != index.size()) throw std::invalid_argument("rate vector size mismatch");
  if (index.size() > budget_items)
    throw std::invalid_argument("exact optimum refused for N > " + std::to_string(budget_items));

  const int n_items = index.size();
  const int picks = std::min(capacity, n_items);
  StaticAllocation best;
  std::vector<ItemId> current;
  std::vector<bool> covered(n_items, false);

  const std::function<void(int, double)> recurse = [&](int start, double value) {
    if (value > best.covered_weight) {
      best.covered_weight = value;
      best.chosen = current;
    }
    if (static_cast<int>(current.size()) == picks) return;
    std::vector<std::pair<double, ItemId>> gains;
    for (ItemId n = start; n < n_items; ++n) {
      const double gain = uncovered_gain(index, rates, covered, n);
      if (gain > 0.0) gains.emplace_back(gain, n);
    }
    std::sort(gains.begin(), gains.end(), std::greater<>());
    // bound: even taking the best remaining gains without overlap cannot
    // beat the incumbent
    const int remaining = picks - static_cast<int>(current.size());
    double bound = value;
    for (int i = 0; i < remaining && i < static_cast<int>(gains.size()); ++i)
      bound += gains[i].first;
    if (bound <= best.covered_weight) return;
    for (const auto& [gain, n] : gains) {
      std::vector<bool> saved = covered;
      cover_with(index, covered, n);
      current.push_back(n);
      recurse(n + 1, value + gain);
      current.pop_back();
      covered = saved;
    }
  };
  recurse(0, 0.0);
  return best;
}

}  // namespace simcache
