#pragma once

#include <optional>
#include <string>
#include <vector>

#include "simcache/types.hpp"

namespace simcache {

/// Item universe: one embedding row per item, ids are the row indices.
struct Catalog {
  Mat coords;                    // N x dim
  std::optional<int> grid_side;  // set when built by grid_catalog

  int size() const { return static_cast<int>(coords.rows()); }
  int dim() const { return static_cast<int>(coords.cols()); }
};

/// side x side integer grid, items ordered row-major: id = x * side + y.
Catalog grid_catalog(int side);

/// Euclidean distance between items i and j.
double dissimilarity(const Catalog& catalog, ItemId i, ItemId j);

struct DissimilaritySpec {
  double threshold = 0.0;  // similarity radius d, same units as the metric
};

enum class TieBreak {
  by_id,             // (distance, id) ascending
  counterclockwise,  // 2-D grids: (distance, angle from +x axis) ascending
};

/// Per-item open neighborhoods N(n) = { m != n : dis(n, m) <= d }, each list
/// strictly ordered by the tie-broken distance key. The prefix of a list
/// before position k is exactly the set of items strictly closer to n than
/// the item at position k.
struct NeighborhoodIndex {
  double threshold = 0.0;
  std::vector<std::vector<ItemId>> neighbors;
  std::vector<std::vector<double>> distances;
  // rank_in_neighbor[n][k]: position of n inside neighbors[m] for m = neighbors[n][k]
  std::vector<std::vector<std::int32_t>> rank_in_neighbor;

  int size() const { return static_cast<int>(neighbors.size()); }
  std::size_t edge_count() const;
};

NeighborhoodIndex build_neighborhood_index(const Catalog& catalog,
                                           const DissimilaritySpec& spec,
                                           TieBreak tie_break = TieBreak::by_id);

/// Index with no neighbors at all (every item isolated).
NeighborhoodIndex isolated_index(int n_items);

/// Normalized request probabilities.
struct PopularityModel {
  Vec rates;  // sums to 1
  int size() const { return static_cast<int>(rates.size()); }
};

PopularityModel popularity_from_weights(Vec weights);

/// weight_n = (min_h dis(n, h) + 1)^(-alpha), normalized. Hotspots are points
/// in embedding space.
PopularityModel synthetic_popularity(const Catalog& catalog,
                                     const std::vector<Vec>& hotspots,
                                     double alpha);

/// Zipf(exponent) over item ids: weight of id k proportional to (k+1)^(-exponent).
PopularityModel zipf_popularity(int n_items, double exponent);

enum class CoverStatus { holds, fails, unknown };
enum class CoverMode { exact, heuristic };

struct CoverReport {
  CoverStatus status = CoverStatus::unknown;
  std::vector<ItemId> witness;  // violating set when status == fails
  std::size_t best_coverage = 0;
  std::size_t required = 0;  // coverage must stay strictly below N - C
};

struct CoverBudget {
  int max_items = 30;
  int max_capacity = 10;
};

/// Checks whether every set M of at most C items leaves the union of their
/// open neighborhoods smaller than N - C. Exact mode enumerates all size-C
/// subsets (the worst case, by monotonicity of unions); heuristic mode runs
/// greedy max coverage, which can prove failure but never proves the
/// condition.
CoverReport check_cover_condition(const NeighborhoodIndex& index, double capacity,
                                  CoverMode mode, CoverBudget budget = {});

}  // namespace simcache
