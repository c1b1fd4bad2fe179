#include "simcache/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>

namespace simcache {

Catalog grid_catalog(int side) {
  if (side < 1) throw std::invalid_argument("grid side must be >= 1");
  Catalog catalog;
  catalog.coords.resize(static_cast<Eigen::Index>(side) * side, 2);
  for (int x = 0; x < side; ++x)
    for (int y = 0; y < side; ++y) {
      const Eigen::Index id = static_cast<Eigen::Index>(x) * side + y;
      catalog.coords(id, 0) = x;
      catalog.coords(id, 1) = y;
    }
  catalog.grid_side = side;
  return catalog;
}

double dissimilarity(const Catalog& catalog, ItemId i, ItemId j) {
  return (catalog.coords.row(i) - catalog.coords.row(j)).norm();
}

std::size_t NeighborhoodIndex::edge_count() const {
  std::size_t total = 0;
  for (const auto& list : neighbors) total += list.size();
  return total;
}

namespace {

// Angle in [0, 2pi) from the positive x axis; orders equal-distance grid
// neighbors counterclockwise starting from the item to the right.
double ccw_angle(double dx, double dy) {
  double a = std::atan2(dy, dx);
  if (a < 0.0) a += 2.0 * M_PI;
  return a;
}

struct NeighborEntry {
  ItemId id;
  double distance;
  double order_key;  // secondary key after distance
};

void sort_and_store(NeighborhoodIndex& index, ItemId n, std::vector<NeighborEntry>& entries) {
  std::sort(entries.begin(), entries.end(), [](const NeighborEntry& a, const NeighborEntry& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return a.order_key < b.order_key;
  });
  auto& ids = index.neighbors[n];
  auto& dist = index.distances[n];
  ids.reserve(entries.size());
  dist.reserve(entries.size());
  for (const auto& e : entries) {
    ids.push_back(e.id);
    dist.push_back(e.distance);
  }
}

void fill_ranks(NeighborhoodIndex& index) {
  const int n_items = index.size();
  index.rank_in_neighbor.assign(n_items, {});
  for (ItemId n = 0; n < n_items; ++n) {
    const auto& list = index.neighbors[n];
    auto& ranks = index.rank_in_neighbor[n];
    ranks.resize(list.size());
    for (std::size_t k = 0; k < list.size(); ++k) {
      const auto& mlist = index.neighbors[list[k]];
      const auto it = std::find(mlist.begin(), mlist.end(), n);
      if (it == mlist.end()) throw std::logic_error("neighbor lists are not symmetric");
      ranks[k] = static_cast<std::int32_t>(it - mlist.begin());
    }
  }
}

}  // namespace

NeighborhoodIndex build_neighborhood_index(const Catalog& catalog,
                                           const DissimilaritySpec& spec,
                                           TieBreak tie_break) {
  if (spec.threshold < 0.0) throw std::invalid_argument("similarity radius must be >= 0");
  if (catalog.size() == 0) throw std::invalid_argument("empty catalog");
  if (tie_break == TieBreak::counterclockwise && catalog.dim() != 2)
    throw std::invalid_argument("counterclockwise tie-break requires a 2-D catalog");

  const int n_items = catalog.size();
  NeighborhoodIndex index;
  index.threshold = spec.threshold;
  index.neighbors.assign(n_items, {});
  index.distances.assign(n_items, {});

  const double d = spec.threshold;
  std::vector<NeighborEntry> entries;

  if (catalog.grid_side && d < *catalog.grid_side) {
    // Grid fast path: only integer offsets within the radius can qualify.
    const int side = *catalog.grid_side;
    const int reach = static_cast<int>(std::floor(d));
    for (int x = 0; x < side; ++x)
      for (int y = 0; y < side; ++y) {
        const ItemId n = static_cast<ItemId>(x) * side + y;
        entries.clear();
        for (int dx = -reach; dx <= reach; ++dx)
          for (int dy = -reach; dy <= reach; ++dy) {
            if (dx == 0 && dy == 0) continue;
            const double dist = std::hypot(dx, dy);
            if (dist > d) continue;
            const int mx = x + dx, my = y + dy;
            if (mx < 0 || mx >= side || my < 0 || my >= side) continue;
            const ItemId m = static_cast<ItemId>(mx) * side + my;
            const double key = tie_break == TieBreak::counterclockwise
                                   ? ccw_angle(dx, dy)
                                   : static_cast<double>(m);
            entries.push_back({m, dist, key});
          }
        sort_and_store(index, n, entries);
      }
  } else {
    for (ItemId n = 0; n < n_items; ++n) {
      entries.clear();
      for (ItemId m = 0; m < n_items; ++m) {
        if (m == n) continue;
        const double dist = dissimilarity(catalog, n, m);
        if (dist > d) continue;
        const double key = tie_break == TieBreak::counterclockwise
                               ? ccw_angle(catalog.coords(m, 0) - catalog.coords(n, 0),
                                           catalog.coords(m, 1) - catalog.coords(n, 1))
                               : static_cast<double>(m);
        entries.push_back({m, dist, key});
      }
      sort_and_store(index, n, entries);
    }
  }

  fill_ranks(index);
  return index;
}

NeighborhoodIndex isolated_index(int n_items) {
  NeighborhoodIndex index;
  index.threshold = 0.0;
  index.neighbors.assign(n_items, {});
  index.distances.assign(n_items, {});
  index.rank_in_neighbor.assign(n_items, {});
  return index;
}

PopularityModel popularity_from_weights(Vec weights) {
  if (weights.size() == 0) throw std::invalid_argument("empty weight vector");
  if ((weights.array() < 0.0).any()) throw std::invalid_argument("negative weight");
  const double total = weights.sum();
  if (!(total > 0.0)) throw std::invalid_argument("weights sum to zero");
  return PopularityModel{weights / total};
}

PopularityModel synthetic_popularity(const Catalog& catalog,
                                     const std::vector<Vec>& hotspots, double alpha) {
  if (catalog.size() == 0) throw std::invalid_argument("empty catalog");
  if (hotspots.empty()) throw std::invalid_argument("at least one hotspot required");
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be > 0");
  for (const auto& h : hotspots)
    if (h.size() != catalog.dim()) throw std::invalid_argument("hotspot dimension mismatch");

  Vec weights(catalog.size());
  for (int n = 0; n < catalog.size(); ++n) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& h : hotspots)
      best = std::min(best, (catalog.coords.row(n).transpose() - h).norm());
    weights[n] = std::pow(best + 1.0, -alpha);
  }
  return popularity_from_weights(std::move(weights));
}

PopularityModel zipf_popularity(int n_items, double exponent) {
  if (n_items < 1) throw std::invalid_argument("need at least one item");
  Vec weights(n_items);
  for (int k = 0; k < n_items; ++k) weights[k] = std::pow(k + 1.0, -exponent);
  return popularity_from_weights(std::move(weights));
}

namespace {

using Bitset = std::vector<std::uint64_t>;

Bitset make_bitset(int n_items) { return Bitset((n_items + 63) / 64, 0); }

void set_bit(Bitset& b, ItemId i) { b[i >> 6] |= std::uint64_t{1} << (i & 63); }

std::size_t popcount(const Bitset& b) {
  std::size_t total = 0;
  for (auto word : b) total += static_cast<std::size_t>(__builtin_popcountll(word));
  return total;
}

void unite(Bitset& into, const Bitset& other) {
  for (std::size_t i = 0; i < into.size(); ++i) into[i] |= other[i];
}

}  // namespace

CoverReport check_cover_condition(const NeighborhoodIndex& index, double capacity,
                                  CoverMode mode, CoverBudget budget) {
  const int n_items = index.size();
  if (!(capacity < n_items)) throw std::invalid_argument("capacity must be < N");
  const int set_size = std::min(n_items, static_cast<int>(std::floor(capacity)));
  CoverReport report;
  report.required = static_cast<std::size_t>(std::ceil(n_items - capacity));

  std::vector<Bitset> neighbor_bits(n_items, make_bitset(n_items));
  for (ItemId n = 0; n < n_items; ++n)
    for (ItemId m : index.neighbors[n]) set_bit(neighbor_bits[n], m);

  const auto violates = [&](std::size_t coverage) {
    return !(static_cast<double>(coverage) < n_items - capacity);
  };

  if (mode == CoverMode::exact) {
    if (n_items > budget.max_items || set_size > budget.max_capacity)
      throw std::invalid_argument("exact cover check over budget (N <= " +
                                  std::to_string(budget.max_items) + ", C <= " +
                                  std::to_string(budget.max_capacity) + ")");
    if (set_size == 0) {
      report.status = violates(0) ? CoverStatus::fails : CoverStatus::holds;
      return report;
    }
    // Unions are monotone in M, so only size-C subsets need checking.
    std::vector<int> pick(set_size);
    std::vector<Bitset> partial(set_size + 1, make_bitset(n_items));
    std::size_t best = 0;
    const std::function<bool(int, int)> recurse = [&](int depth, int start) -> bool {
      if (depth == set_size) {
        const std::size_t coverage = popcount(partial[depth]);
        best = std::max(best, coverage);
        return violates(coverage);
      }
      for (int n = start; n <= n_items - (set_size - depth); ++n) {
        pick[depth] = n;
        partial[depth + 1] = partial[depth];
        unite(partial[depth + 1], neighbor_bits[n]);
        if (recurse(depth + 1, n + 1)) return true;
      }
      return false;
    };
    const bool failed = recurse(0, 0);
    report.best_coverage = best;
    if (failed) {
      report.status = CoverStatus::fails;
      report.witness.assign(pick.begin(), pick.end());
    } else {
      report.status = CoverStatus::holds;
    }
    return report;
  }

  // Heuristic: greedy max coverage lower-bounds the worst case, so it can
  // certify failure but never certify the condition.
  Bitset covered = make_bitset(n_items);
  std::vector<ItemId> chosen;
  std::size_t covered_count = 0;
  for (int round = 0; round < set_size; ++round) {
    ItemId best_item = -1;
    std::size_t best_count = covered_count;
    for (ItemId n = 0; n < n_items; ++n) {
      Bitset trial = covered;
      unite(trial, neighbor_bits[n]);
      const std::size_t count = popcount(trial);
      if (count > best_count) {
        best_count = count;
        best_item = n;
      }
    }
    if (best_item < 0) break;
    chosen.push_back(best_item);
    unite(covered, neighbor_bits[best_item]);
    covered_count = best_count;
  }
  report.best_coverage = covered_count;
  report.witness = chosen;
  report.status = violates(covered_count) ? CoverStatus::fails : CoverStatus::unknown;
  return report;
}

}  // namespace simcache
