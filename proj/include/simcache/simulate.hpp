#pragma once

#include <cstdint>
#include <vector>

#include "simcache/catalog.hpp"
#include "simcache/types.hpp"

namespace simcache {

struct Trace {
  std::vector<ItemId> requests;
  std::vector<double> timestamps;  // empty, or nondecreasing and same length
  std::uint64_t seed = 0;          // provenance

  std::size_t size() const { return requests.size(); }
  bool has_timestamps() const { return !timestamps.empty(); }
};

struct SimOptions {
  std::size_t warmup = 0;        // requests that update state but are not measured
  std::uint64_t seed = 0;        // acceptance-draw stream
  bool track_state_hash = false; // chain a hash of the cache state after every step
};

struct EmpiricalStats {
  double hit_rate = 0.0;  // (exact + approximate) / measured
  std::vector<std::int64_t> exact_hits;
  std::vector<std::int64_t> approx_hits;  // indexed by requested item
  std::vector<double> occupancy;  // fraction of measured epochs the item was cached
  std::size_t measured = 0;
  std::size_t warmup_discarded = 0;
  std::uint64_t state_hash = 0;
};

/// RND-LRU: the closest cached item within the similarity radius serves the
/// request with probability q(candidate, requested); hits move the serving
/// item to the front, misses evict the tail and insert the requested item.
EmpiricalStats simulate_rnd_lru(const NeighborhoodIndex& index, const AcceptanceFn& q,
                                const Trace& trace, int capacity, const SimOptions& options = {});

/// SIM-LRU reference: RND-LRU with every within-radius candidate accepted.
EmpiricalStats simulate_sim_lru(const NeighborhoodIndex& index, const Trace& trace, int capacity,
                                const SimOptions& options = {});

/// Plain LRU reference: only exact hits.
EmpiricalStats simulate_lru(int n_items, const Trace& trace, int capacity,
                            const SimOptions& options = {});

/// TTL-based similarity caching: eviction strictly by timer expiry, a hit
/// resets the serving item's timer, a miss inserts the requested item with
/// its own timer. Requires timestamps. Occupancy is integrated in continuous
/// time over the measured span.
EmpiricalStats simulate_ttl_similarity(const NeighborhoodIndex& index, const AcceptanceFn& q,
                                       const Trace& trace, const Vec& timers,
                                       const SimOptions& options = {});

struct RenewalEstimate {
  double occupancy = 0.0;  // time-average On fraction
  double std_error = 0.0;  // batch-means standard error
  double epoch_occupancy = 0.0;  // fraction of Poisson sampling epochs found On
  double epoch_std_error = 0.0;
  long cycles = 0;
};

/// Monte Carlo single-item renewal process: Off ~ Exp(insertion_rate), On =
/// busy period of Poisson(refresh_rate) resets each granting `timer`.
/// Independent occupancy oracle for occupancy_g(refresh, insertion, timer).
/// sample_rate > 0 additionally samples the state at Poisson epochs.
RenewalEstimate rnd_ttl_renewal_oracle(double insertion_rate, double refresh_rate, double timer,
                                       long cycles, std::uint64_t seed, double sample_rate = 0.0);

/// IRM trace: i.i.d. draws from the popularity model; with timestamps, the
/// aggregate arrivals form a rate-1 Poisson process thinned per item.
Trace generate_irm_trace(const PopularityModel& popularity, std::size_t length,
                         std::uint64_t seed, bool with_timestamps = false);

struct PolicySpec {
  enum class Kind { rnd_lru, sim_lru, lru, ttl_similarity };
  Kind kind = Kind::rnd_lru;
  int capacity = 1;
  AcceptanceFn q;      // rnd_lru and ttl_similarity
  double timer = 0.0;  // ttl_similarity
};

struct MeasuredStats {
  double mean_hit_rate = 0.0;
  double ci95_half_width = 0.0;
  int repetitions = 0;
  std::vector<double> per_rep_hit_rate;
  std::vector<double> mean_occupancy;  // averaged across repetitions
};

/// Regenerates `repetitions` IRM traces (seeds seed0, seed0+1, ...) and
/// aggregates hit rates with a normal-approximation 95% half-width.
MeasuredStats measure_policy(const NeighborhoodIndex& index, const PolicySpec& policy,
                             const PopularityModel& popularity, std::size_t trace_length,
                             int repetitions, std::uint64_t seed0, double warmup_fraction = 0.1);

}  // namespace simcache
