#include <doctest.h>

#include <algorithm>
#include <set>

#include "helpers.hpp"
#include "simcache/catalog.hpp"

using namespace simcache;

TEST_CASE("grid catalogs") {
  CHECK(grid_catalog(1).size() == 1);
  CHECK(grid_catalog(100).size() == 10000);
  const Catalog g2 = grid_catalog(2);
  REQUIRE(g2.size() == 4);
  std::set<std::pair<double, double>> points;
  for (int n = 0; n < 4; ++n) points.insert({g2.coords(n, 0), g2.coords(n, 1)});
  CHECK(points == std::set<std::pair<double, double>>{{0, 0}, {0, 1}, {1, 0}, {1, 1}});
  CHECK_THROWS(grid_catalog(0));
}

TEST_CASE("pair and empty neighborhoods") {
  Catalog two;
  two.coords.resize(2, 2);
  two.coords << 0, 0, 1, 0;
  const auto index = build_neighborhood_index(two, {1.0});
  CHECK(index.neighbors[0] == std::vector<ItemId>{1});
  CHECK(index.neighbors[1] == std::vector<ItemId>{0});

  const auto empty = build_neighborhood_index(two, {0.0});
  CHECK(empty.neighbors[0].empty());
  CHECK(empty.neighbors[1].empty());
}

TEST_CASE("counterclockwise tie-break on the grid") {
  const Catalog g3 = grid_catalog(3);
  const auto index = build_neighborhood_index(g3, {1.0}, TieBreak::counterclockwise);
  const ItemId center = 1 * 3 + 1;
  const ItemId right = 2 * 3 + 1, up = 1 * 3 + 2, left = 0 * 3 + 1, down = 1 * 3 + 0;
  CHECK(index.neighbors[center] == std::vector<ItemId>{right, up, left, down});

  Catalog flat;
  flat.coords.resize(2, 3);
  flat.coords.setZero();
  CHECK_THROWS(build_neighborhood_index(flat, {1.0}, TieBreak::counterclockwise));
}

TEST_CASE("grid fast path matches brute force") {
  const Catalog g = grid_catalog(7);
  Catalog no_hint = g;
  no_hint.grid_side.reset();
  for (double d : {1.0, 2.0, 2.5}) {
    const auto fast = build_neighborhood_index(g, {d}, TieBreak::counterclockwise);
    const auto slow = build_neighborhood_index(no_hint, {d}, TieBreak::counterclockwise);
    CHECK(fast.neighbors == slow.neighbors);
    CHECK(fast.rank_in_neighbor == slow.rank_in_neighbor);
  }
}

TEST_CASE("index invariants on random catalogs") {
  rng::Engine eng(7);
  for (int round = 0; round < 5; ++round) {
    const Catalog catalog = simcache::testing::random_catalog(40, eng);
    const auto index = build_neighborhood_index(catalog, {2.5});
    for (ItemId n = 0; n < index.size(); ++n) {
      const auto& list = index.neighbors[n];
      const auto& dist = index.distances[n];
      for (std::size_t k = 0; k < list.size(); ++k) {
        // symmetry
        const auto& back = index.neighbors[list[k]];
        CHECK(std::find(back.begin(), back.end(), n) != back.end());
        // rank bookkeeping
        CHECK(back[index.rank_in_neighbor[n][k]] == n);
        // strict order (distance, id)
        if (k > 0)
          CHECK((dist[k - 1] < dist[k] ||
                 (dist[k - 1] == dist[k] && list[k - 1] < list[k])));
      }
    }
  }
}

TEST_CASE("synthetic popularity") {
  const Catalog g = grid_catalog(100);
  std::vector<Vec> hotspots(2, Vec(2));
  hotspots[0] << 24, 24;
  hotspots[1] << 74, 74;

  const auto weight_of = [&](int x, int y, double alpha) {
    const PopularityModel pop = synthetic_popularity(g, hotspots, alpha);
    return pop.rates[x * 100 + y];
  };
  // unnormalized weights: 1 at a hotspot, 1/2 one step away (alpha = 1)
  const PopularityModel pop = synthetic_popularity(g, hotspots, 1.0);
  CHECK(pop.rates[24 * 100 + 24] == doctest::Approx(2.0 * pop.rates[24 * 100 + 25]));
  CHECK(pop.rates.sum() == doctest::Approx(1.0));
  CHECK(weight_of(24, 24, 2.5) > weight_of(30, 30, 2.5));

  CHECK_THROWS(synthetic_popularity(g, {}, 1.0));
  CHECK_THROWS(synthetic_popularity(g, hotspots, 0.0));
}

TEST_CASE("zipf popularity") {
  const PopularityModel pop = zipf_popularity(4, 1.0);
  CHECK(pop.rates[0] == doctest::Approx(1.0 / (1 + 0.5 + 1.0 / 3 + 0.25)));
  CHECK(pop.rates.sum() == doctest::Approx(1.0));
}

namespace {

// Reference cover check: enumerate every subset of size <= C.
bool cover_holds_brute_force(const NeighborhoodIndex& index, int capacity) {
  const int n = index.size();
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (__builtin_popcount(mask) > capacity) continue;
    std::set<ItemId> covered;
    for (int i = 0; i < n; ++i)
      if ((mask >> i) & 1)
        for (ItemId m : index.neighbors[i]) covered.insert(m);
    if (!(static_cast<int>(covered.size()) < n - capacity)) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("cover condition examples") {
  // four isolated items, C = 2: every union is empty
  CHECK(check_cover_condition(isolated_index(4), 2, CoverMode::exact).status ==
        CoverStatus::holds);

  // three mutually neighboring items, C = 1: any item covers N - C others
  Catalog tri;
  tri.coords.resize(3, 2);
  tri.coords << 0, 0, 1, 0, 0.5, 0.5;
  const auto triangle = build_neighborhood_index(tri, {2.0});
  const auto fail = check_cover_condition(triangle, 1, CoverMode::exact);
  CHECK(fail.status == CoverStatus::fails);
  CHECK(fail.witness.size() == 1);

  // C = N - 1 with at least one neighboring pair always fails
  Catalog line;
  line.coords.resize(4, 2);
  line.coords << 0, 0, 1, 0, 5, 0, 9, 0;
  const auto pairs = build_neighborhood_index(line, {1.0});
  CHECK(check_cover_condition(pairs, 3, CoverMode::exact).status == CoverStatus::fails);
}

TEST_CASE("cover condition agrees with subset enumeration") {
  rng::Engine eng(11);
  for (int round = 0; round < 20; ++round) {
    const int n = 5 + static_cast<int>(rng::uniform01(eng) * 4);  // 5..8
    const Catalog catalog = simcache::testing::random_catalog(n, eng, 3.0);
    const auto index = build_neighborhood_index(catalog, {1.5});
    const int capacity = 1 + static_cast<int>(rng::uniform01(eng) * (n - 2));
    const auto report = check_cover_condition(index, capacity, CoverMode::exact);
    const bool expected = cover_holds_brute_force(index, capacity);
    CHECK((report.status == CoverStatus::holds) == expected);
  }
}

TEST_CASE("heuristic cover check") {
  Catalog tri;
  tri.coords.resize(3, 2);
  tri.coords << 0, 0, 1, 0, 0.5, 0.5;
  const auto triangle = build_neighborhood_index(tri, {2.0});
  CHECK(check_cover_condition(triangle, 1, CoverMode::heuristic).status == CoverStatus::fails);
  // greedy cannot certify the condition, only report its bound
  const auto open = check_cover_condition(isolated_index(6), 2, CoverMode::heuristic);
  CHECK(open.status == CoverStatus::unknown);
  CHECK(open.best_coverage == 0);

  CHECK_THROWS(check_cover_condition(isolated_index(40), 2, CoverMode::exact));
  CHECK_THROWS(check_cover_condition(isolated_index(4), 4, CoverMode::exact));
}
