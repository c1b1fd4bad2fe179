#include "simcache/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <list>
#include <stdexcept>
#include <unordered_map>

#include "simcache/rng.hpp"

namespace simcache {

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

void hash_mix(std::uint64_t& h, std::uint64_t value) {
  h ^= value;
  h *= kFnvPrime;
}

void check_trace(const Trace& trace, int n_items) {
  if (trace.requests.empty()) throw std::invalid_argument("empty trace");
  for (ItemId id : trace.requests)
    if (id < 0 || id >= n_items)
      throw std::invalid_argument("trace references unknown item " + std::to_string(id));
  if (trace.has_timestamps()) {
    if (trace.timestamps.size() != trace.requests.size())
      throw std::invalid_argument("timestamp count mismatch");
    for (std::size_t i = 1; i < trace.timestamps.size(); ++i)
      if (trace.timestamps[i] < trace.timestamps[i - 1])
        throw std::invalid_argument("timestamps must be nondecreasing");
  }
}

// LRU list with O(1) membership; front = most recently used.
class LruList {
 public:
  LruList(int n_items, int capacity) : capacity_(capacity), where_(n_items) {}

  bool contains(ItemId id) const { return where_[id].has_value(); }
  int size() const { return static_cast<int>(order_.size()); }

  void move_to_front(ItemId id) {
    order_.splice(order_.begin(), order_, *where_[id]);
  }

  // Evicts the tail when full, then inserts at the front.
  void insert_front(ItemId id) {
    if (static_cast<int>(order_.size()) == capacity_) {
      where_[order_.back()].reset();
      order_.pop_back();
    }
    order_.push_front(id);
    where_[id] = order_.begin();
  }

  std::uint64_t content_hash(std::uint64_t chain) const {
    for (ItemId id : order_) hash_mix(chain, static_cast<std::uint64_t>(id) + 1);
    hash_mix(chain, 0xfeed);
    return chain;
  }

  template <typename Fn>
  void for_each(Fn&& fn) const {
    for (ItemId id : order_) fn(id);
  }

 private:
  int capacity_;
  std::list<ItemId> order_;
  std::vector<std::optional<std::list<ItemId>::iterator>> where_;
};

// First cached entry of the closed neighborhood in similarity order: the
// item itself, then its neighbor list.
template <typename Cached>
ItemId closest_cached(const NeighborhoodIndex& index, ItemId n, const Cached& cached) {
  if (cached(n)) return n;
  for (ItemId m : index.neighbors[n])
    if (cached(m)) return m;
  return -1;
}

struct HitCounters {
  explicit HitCounters(int n_items)
      : exact(n_items, 0), approx(n_items, 0), present(n_items, 0) {}
  std::vector<std::int64_t> exact;
  std::vector<std::int64_t> approx;
  std::vector<std::int64_t> present;  // request epochs at which the item was cached
  std::size_t measured = 0;
};

EmpiricalStats finish_stats(const HitCounters& counters, std::size_t warmup,
                            std::uint64_t state_hash) {
  EmpiricalStats stats;
  stats.exact_hits = counters.exact;
  stats.approx_hits = counters.approx;
  stats.measured = counters.measured;
  stats.warmup_discarded = warmup;
  stats.state_hash = state_hash;
  std::int64_t hits = 0;
  for (std::size_t n = 0; n < counters.exact.size(); ++n)
    hits += counters.exact[n] + counters.approx[n];
  stats.hit_rate = counters.measured ? static_cast<double>(hits) / counters.measured : 0.0;
  stats.occupancy.resize(counters.present.size());
  for (std::size_t n = 0; n < counters.present.size(); ++n)
    stats.occupancy[n] =
        counters.measured ? static_cast<double>(counters.present[n]) / counters.measured : 0.0;
  return stats;
}

EmpiricalStats run_lru_family(const NeighborhoodIndex& index, const AcceptanceFn* q,
                              const Trace& trace, int capacity, const SimOptions& options,
                              bool exact_only) {
  const int n_items = index.size();
  check_trace(trace, n_items);
  if (capacity < 1) throw std::invalid_argument("capacity must be >= 1");

  LruList cache(n_items, capacity);
  HitCounters counters(n_items);
  rng::Engine accept_stream(options.seed);
  std::uint64_t chain = kFnvOffset;

  for (std::size_t t = 0; t < trace.requests.size(); ++t) {
    const ItemId n = trace.requests[t];
    const bool measured = t >= options.warmup;
    if (measured) {
      ++counters.measured;
      cache.for_each([&](ItemId id) { ++counters.present[id]; });
    }
    const auto cached = [&](ItemId id) { return cache.contains(id); };
    const ItemId candidate = exact_only ? (cache.contains(n) ? n : ItemId{-1})
                                        : closest_cached(index, n, cached);
    const double u = rng::uniform01(accept_stream);  // one draw per request
    bool hit = false;
    if (candidate >= 0) {
      const double accept = q ? (*q)(candidate, n) : 1.0;
      if (!(accept >= 0.0 && accept <= 1.0))
        throw std::invalid_argument("acceptance probability out of [0, 1]");
      hit = accept > 0.0 && u <= accept;
    }
    if (hit) {
      cache.move_to_front(candidate);
      if (measured) ++(candidate == n ? counters.exact : counters.approx)[n];
    } else {
      cache.insert_front(n);
    }
    if (options.track_state_hash) chain = cache.content_hash(chain);
  }
  return finish_stats(counters, std::min(options.warmup, trace.requests.size()),
                      options.track_state_hash ? chain : 0);
}

}  // namespace

EmpiricalStats simulate_rnd_lru(const NeighborhoodIndex& index, const AcceptanceFn& q,
                                const Trace& trace, int capacity, const SimOptions& options) {
  return run_lru_family(index, &q, trace, capacity, options, /*exact_only=*/false);
}

EmpiricalStats simulate_sim_lru(const NeighborhoodIndex& index, const Trace& trace, int capacity,
                                const SimOptions& options) {
  return run_lru_family(index, nullptr, trace, capacity, options, /*exact_only=*/false);
}

EmpiricalStats simulate_lru(int n_items, const Trace& trace, int capacity,
                            const SimOptions& options) {
  return run_lru_family(isolated_index(n_items), nullptr, trace, capacity, options,
                        /*exact_only=*/true);
}

EmpiricalStats simulate_ttl_similarity(const NeighborhoodIndex& index, const AcceptanceFn& q,
                                       const Trace& trace, const Vec& timers,
                                       const SimOptions& options) {
  const int n_items = index.size();
  check_trace(trace, n_items);
  if (!trace.has_timestamps()) throw std::invalid_argument("TTL simulation requires timestamps");
  if (timers.size() != n_items) throw std::invalid_argument("timer vector size mismatch");
  if ((timers.array() <= 0.0).any()) throw std::invalid_argument("timers must be > 0");

  // expiry[n] > current time <=> n cached; eviction on expiry is implicit.
  std::vector<double> expiry(n_items, -std::numeric_limits<double>::infinity());
  HitCounters counters(n_items);
  std::vector<double> on_time(n_items, 0.0);
  rng::Engine accept_stream(options.seed);
  std::uint64_t chain = kFnvOffset;
  double measure_start = 0.0;
  double last_time = 0.0;

  for (std::size_t t = 0; t < trace.requests.size(); ++t) {
    const ItemId n = trace.requests[t];
    const double now = trace.timestamps[t];
    const bool measured = t >= options.warmup;
    if (measured) {
      if (counters.measured == 0) measure_start = now;
      // credit cached spans that overlap [max(last_time, start), now)
      const double from = std::max(last_time, measure_start);
      if (now > from)
        for (ItemId m = 0; m < n_items; ++m) {
          const double upto = std::min(expiry[m], now);
          if (upto > from) on_time[m] += upto - from;
        }
      ++counters.measured;
      for (ItemId m = 0; m < n_items; ++m)
        if (expiry[m] > now) ++counters.present[m];
    }
    const auto cached = [&](ItemId id) { return expiry[id] > now; };
    const ItemId candidate = closest_cached(index, n, cached);  // tombstone: -1
    const double u = rng::uniform01(accept_stream);
    bool hit = false;
    if (candidate >= 0) {
      const double accept = q(candidate, n);
      if (!(accept >= 0.0 && accept <= 1.0))
        throw std::invalid_argument("acceptance probability out of [0, 1]");
      hit = accept > 0.0 && u <= accept;
    }
    if (hit) {
      expiry[candidate] = now + timers[candidate];
      if (measured) ++(candidate == n ? counters.exact : counters.approx)[n];
    } else {
      expiry[n] = now + timers[n];
    }
    if (options.track_state_hash) {
      std::uint64_t step = chain;
      for (ItemId m = 0; m < n_items; ++m)
        if (expiry[m] > now) hash_mix(step, static_cast<std::uint64_t>(m) + 1);
      hash_mix(step, 0xfeed);
      chain = step;
    }
    last_time = now;
  }

  EmpiricalStats stats = finish_stats(counters, std::min(options.warmup, trace.requests.size()),
                                      options.track_state_hash ? chain : 0);
  // continuous-time occupancy over the measured span
  const double span = last_time - measure_start;
  if (span > 0.0)
    for (ItemId m = 0; m < n_items; ++m) stats.occupancy[m] = on_time[m] / span;
  return stats;
}

RenewalEstimate rnd_ttl_renewal_oracle(double insertion_rate, double refresh_rate, double timer,
                                       long cycles, std::uint64_t seed, double sample_rate) {
  if (!(insertion_rate > 0.0)) throw std::invalid_argument("insertion rate must be > 0");
  if (refresh_rate < 0.0) throw std::invalid_argument("refresh rate must be >= 0");
  if (!(timer > 0.0)) throw std::invalid_argument("timer must be > 0");
  if (cycles < 1) throw std::invalid_argument("need at least one cycle");

  rng::Engine eng(seed);
  const int n_batches = std::min<long>(cycles, 100);
  std::vector<double> batch_on(n_batches, 0.0), batch_off(n_batches, 0.0);
  std::vector<double> batch_son(n_batches, 0.0), batch_soff(n_batches, 0.0);

  for (long c = 0; c < cycles; ++c) {
    const int b = static_cast<int>(c % n_batches);
    const double off = rng::exponential(eng, insertion_rate);
    double on = timer;
    // busy period: each reset arriving before the current expiry grants T more
    while (true) {
      const double gap = rng::exponential(eng, refresh_rate);
      if (gap >= timer) break;
      on += gap;  // reset happened `gap` into the remaining window; extend
    }
    batch_off[b] += off;
    batch_on[b] += on;
    if (sample_rate > 0.0) {
      batch_soff[b] += rng::poisson_count(eng, sample_rate, off);
      batch_son[b] += rng::poisson_count(eng, sample_rate, on);
    }
  }

  const auto ratio_stats = [&](const std::vector<double>& on_parts,
                               const std::vector<double>& off_parts, double& mean, double& se) {
    double total_on = 0.0, total_off = 0.0;
    for (int b = 0; b < n_batches; ++b) {
      total_on += on_parts[b];
      total_off += off_parts[b];
    }
    const double denom = total_on + total_off;
    mean = denom > 0.0 ? total_on / denom : 0.0;
    double var = 0.0;
    int used = 0;
    for (int b = 0; b < n_batches; ++b) {
      const double d = on_parts[b] + off_parts[b];
      if (d <= 0.0) continue;
      const double r = on_parts[b] / d;
      var += (r - mean) * (r - mean);
      ++used;
    }
    se = used > 1 ? std::sqrt(var / (used * (used - 1.0))) : 0.0;
  };

  RenewalEstimate est;
  est.cycles = cycles;
  ratio_stats(batch_on, batch_off, est.occupancy, est.std_error);
  if (sample_rate > 0.0)
    ratio_stats(batch_son, batch_soff, est.epoch_occupancy, est.epoch_std_error);
  return est;
}

Trace generate_irm_trace(const PopularityModel& popularity, std::size_t length,
                         std::uint64_t seed, bool with_timestamps) {
  if (length < 1) throw std::invalid_argument("trace length must be >= 1");
  rng::Engine eng(seed);
  std::vector<double> weights(popularity.rates.data(),
                              popularity.rates.data() + popularity.rates.size());
  const std::vector<double> cdf = rng::cumulative(weights);
  Trace trace;
  trace.seed = seed;
  trace.requests.reserve(length);
  if (with_timestamps) trace.timestamps.reserve(length);
  double now = 0.0;
  for (std::size_t i = 0; i < length; ++i) {
    trace.requests.push_back(static_cast<ItemId>(rng::discrete(eng, cdf)));
    if (with_timestamps) {
      now += rng::exponential(eng, 1.0);
      trace.timestamps.push_back(now);
    }
  }
  return trace;
}

MeasuredStats measure_policy(const NeighborhoodIndex& index, const PolicySpec& policy,
                             const PopularityModel& popularity, std::size_t trace_length,
                             int repetitions, std::uint64_t seed0, double warmup_fraction) {
  if (repetitions < 1) throw std::invalid_argument("repetitions must be >= 1");
  if (!(warmup_fraction >= 0.0 && warmup_fraction < 1.0))
    throw std::invalid_argument("warmup fraction must be in [0, 1)");

  MeasuredStats out;
  out.repetitions = repetitions;
  out.mean_occupancy.assign(index.size(), 0.0);
  const auto warmup = static_cast<std::size_t>(warmup_fraction * trace_length);
  const bool needs_time = policy.kind == PolicySpec::Kind::ttl_similarity;

  for (int rep = 0; rep < repetitions; ++rep) {
    const std::uint64_t seed = seed0 + static_cast<std::uint64_t>(rep);
    const Trace trace = generate_irm_trace(popularity, trace_length, seed, needs_time);
    SimOptions options;
    options.warmup = warmup;
    options.seed = seed ^ 0x9e3779b97f4a7c15ULL;  // acceptance stream distinct from the trace
    EmpiricalStats stats;
    switch (policy.kind) {
      case PolicySpec::Kind::rnd_lru:
        stats = simulate_rnd_lru(index, policy.q, trace, policy.capacity, options);
        break;
      case PolicySpec::Kind::sim_lru:
        stats = simulate_sim_lru(index, trace, policy.capacity, options);
        break;
      case PolicySpec::Kind::lru:
        stats = simulate_lru(index.size(), trace, policy.capacity, options);
        break;
      case PolicySpec::Kind::ttl_similarity: {
        const Vec timers = Vec::Constant(index.size(), policy.timer);
        stats = simulate_ttl_similarity(index, policy.q, trace, timers, options);
        break;
      }
    }
    out.per_rep_hit_rate.push_back(stats.hit_rate);
    for (int n = 0; n < index.size(); ++n) out.mean_occupancy[n] += stats.occupancy[n];
  }

  for (double& o : out.mean_occupancy) o /= repetitions;
  double mean = 0.0;
  for (double h : out.per_rep_hit_rate) mean += h;
  mean /= repetitions;
  double var = 0.0;
  for (double h : out.per_rep_hit_rate) var += (h - mean) * (h - mean);
  out.mean_hit_rate = mean;
  out.ci95_half_width =
      repetitions > 1 ? 1.96 * std::sqrt(var / (repetitions * (repetitions - 1.0))) : 0.0;
  return out;
}

}  // namespace simcache
