#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "simcache/baselines.hpp"
#include "simcache/io.hpp"
#include "simcache/jacobian.hpp"
#include "simcache/model.hpp"
#include "simcache/simulate.hpp"
#include "simcache/solver.hpp"

namespace py = pybind11;
using namespace simcache;

namespace {

// Opaque acceptance rule so hot loops stay in C++; from_callable crosses the
// GIL on every evaluation and is meant for experimentation only.
struct Acceptance {
  AcceptanceFn fn;
};

Acceptance power_rule(const Catalog& catalog, double exponent) {
  auto coords = std::make_shared<Mat>(catalog.coords);
  return {[coords, exponent](ItemId candidate, ItemId requested) {
    if (candidate == requested) return 1.0;
    const double dist = (coords->row(candidate) - coords->row(requested)).norm();
    return std::min(1.0, std::pow(dist, -exponent));
  }};
}

TieBreak tie_break_from(const std::string& name) {
  if (name == "id") return TieBreak::by_id;
  if (name == "ccw") return TieBreak::counterclockwise;
  throw std::invalid_argument("tie_break must be 'id' or 'ccw'");
}

py::dict solve_to_dict(const SolveResult& result) {
  py::dict out;
  out["occupancy"] = result.occupancy;
  out["hit_probs"] = result.hit_probs;
  out["hit_rate"] = result.hit_rate;
  out["t_c"] = result.t_c;
  out["t_c0"] = result.t_c0;
  out["converged"] = result.converged;
  out["iterations"] = result.iterations;
  out["residual"] = result.final_residual;
  std::vector<double> steps;
  for (std::size_t j = 1; j < result.trace.rows.size(); ++j)
    steps.push_back(result.trace.rows[j].step_norm);
  out["step_norms"] = steps;
  return out;
}

py::dict stats_to_dict(const EmpiricalStats& stats) {
  py::dict out;
  out["hit_rate"] = stats.hit_rate;
  out["exact_hits"] = stats.exact_hits;
  out["approx_hits"] = stats.approx_hits;
  out["occupancy"] = stats.occupancy;
  out["measured"] = stats.measured;
  out["warmup_discarded"] = stats.warmup_discarded;
  out["state_hash"] = stats.state_hash;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "similarity-cache performance model and simulators";

  py::class_<Catalog>(m, "Catalog")
      .def(py::init([](Mat coords) {
             Catalog c;
             c.coords = std::move(coords);
             return c;
           }),
           py::arg("coords"))
      .def_property_readonly("coords", [](const Catalog& c) { return c.coords; })
      .def_property_readonly("size", &Catalog::size)
      .def_property_readonly("dim", &Catalog::dim);

  py::class_<NeighborhoodIndex>(m, "NeighborhoodIndex")
      .def_property_readonly("size", &NeighborhoodIndex::size)
      .def_property_readonly("threshold",
                             [](const NeighborhoodIndex& i) { return i.threshold; })
      .def("neighbors", [](const NeighborhoodIndex& i, ItemId n) { return i.neighbors.at(n); })
      .def("distances", [](const NeighborhoodIndex& i, ItemId n) { return i.distances.at(n); });

  py::class_<Acceptance>(m, "Acceptance");
  m.def("accept_always", [] { return Acceptance{accept_always()}; });
  m.def("accept_exact_only", [] { return Acceptance{accept_exact_only()}; });
  m.def("power_rule", &power_rule, py::arg("catalog"), py::arg("exponent"));
  m.def(
      "from_callable",
      [](std::function<double(ItemId, ItemId)> fn) { return Acceptance{std::move(fn)}; },
      py::arg("fn"));

  m.def("grid_catalog", &grid_catalog, py::arg("side"));
  m.def(
      "build_neighborhood_index",
      [](const Catalog& catalog, double d, const std::string& tie_break) {
        return build_neighborhood_index(catalog, {d}, tie_break_from(tie_break));
      },
      py::arg("catalog"), py::arg("d"), py::arg("tie_break") = "id");
  m.def(
      "synthetic_popularity",
      [](const Catalog& catalog, const std::vector<Vec>& hotspots, double alpha) {
        return synthetic_popularity(catalog, hotspots, alpha).rates;
      },
      py::arg("catalog"), py::arg("hotspots"), py::arg("alpha"));
  m.def(
      "zipf_popularity",
      [](int n, double exponent) { return zipf_popularity(n, exponent).rates; }, py::arg("n"),
      py::arg("exponent"));

  m.def("occupancy_g", &occupancy_g, py::arg("refresh_rate"), py::arg("insertion_rate"),
        py::arg("timer"));
  m.def(
      "occupancy_g_partials",
      [](double r, double i, double t) {
        const GPartials p = occupancy_g_partials(r, i, t);
        return py::make_tuple(p.d_refresh, p.d_insertion, p.d_timer);
      },
      py::arg("refresh_rate"), py::arg("insertion_rate"), py::arg("timer"));
  m.def(
      "insertion_probs",
      [](const NeighborhoodIndex& index, const Acceptance& q, const Vec& o) {
        return insertion_probs(index, q.fn, o);
      },
      py::arg("index"), py::arg("q"), py::arg("occupancy"));
  m.def(
      "refresh_rates",
      [](const NeighborhoodIndex& index, const Acceptance& q, const Vec& rates, const Vec& o) {
        return refresh_rates(index, q.fn, rates, o);
      },
      py::arg("index"), py::arg("q"), py::arg("rates"), py::arg("occupancy"));
  m.def(
      "item_hit_probs",
      [](const NeighborhoodIndex& index, const Acceptance& q, const Vec& o) {
        return item_hit_probs(index, q.fn, o);
      },
      py::arg("index"), py::arg("q"), py::arg("occupancy"));
  m.def(
      "solve_characteristic_time",
      [](const NeighborhoodIndex& index, const Acceptance& q, const Vec& rates, const Vec& o,
         double capacity, double tol) {
        return solve_characteristic_time(index, q.fn, rates, o, capacity, tol);
      },
      py::arg("index"), py::arg("q"), py::arg("rates"), py::arg("occupancy"),
      py::arg("capacity"), py::arg("tol") = 1e-10);

  m.def(
      "solve",
      [](const NeighborhoodIndex& index, const Acceptance& q, const Vec& rates, double capacity,
         double beta, int max_iterations, double occupancy_tol, double tc_tol) {
        SolverConfig config{beta, max_iterations, occupancy_tol, tc_tol};
        return solve_to_dict(solve(index, q.fn, rates, capacity, config));
      },
      py::arg("index"), py::arg("q"), py::arg("rates"), py::arg("capacity"),
      py::arg("beta") = 0.5, py::arg("max_iterations") = 100, py::arg("occupancy_tol") = 1e-8,
      py::arg("tc_tol") = 1e-10);

  m.def(
      "lru_ttl_estimate",
      [](const Vec& rates, double capacity) {
        const TtlEstimate est = lru_ttl_estimate(rates, capacity);
        return py::make_tuple(est.hit_probs, est.t_c, est.hit_rate);
      },
      py::arg("rates"), py::arg("capacity"));
  m.def(
      "lru_agg_estimate",
      [](const NeighborhoodIndex& index, const Vec& rates, double capacity) {
        const TtlEstimate est = lru_agg_estimate(index, rates, capacity);
        return py::make_tuple(est.hit_probs, est.t_c, est.hit_rate);
      },
      py::arg("index"), py::arg("rates"), py::arg("capacity"));
  m.def(
      "greedy_coverage",
      [](const NeighborhoodIndex& index, const Vec& rates, int capacity) {
        const StaticAllocation alloc = greedy_coverage(index, rates, capacity);
        return py::make_tuple(alloc.chosen, alloc.covered_weight);
      },
      py::arg("index"), py::arg("rates"), py::arg("capacity"));
  m.def(
      "exact_static_optimum",
      [](const NeighborhoodIndex& index, const Vec& rates, int capacity, int budget) {
        const StaticAllocation alloc = exact_static_optimum(index, rates, capacity, budget);
        return py::make_tuple(alloc.chosen, alloc.covered_weight);
      },
      py::arg("index"), py::arg("rates"), py::arg("capacity"), py::arg("budget_items") = 25);

  py::class_<Trace>(m, "Trace")
      .def(py::init([](std::vector<ItemId> requests, std::vector<double> timestamps) {
             Trace t;
             t.requests = std::move(requests);
             t.timestamps = std::move(timestamps);
             return t;
           }),
           py::arg("requests"), py::arg("timestamps") = std::vector<double>{})
      .def_property_readonly("requests", [](const Trace& t) { return t.requests; })
      .def_property_readonly("timestamps", [](const Trace& t) { return t.timestamps; })
      .def_property_readonly("seed", [](const Trace& t) { return t.seed; })
      .def("__len__", &Trace::size);

  m.def(
      "generate_irm_trace",
      [](const Vec& rates, std::size_t length, std::uint64_t seed, bool with_timestamps) {
        return generate_irm_trace(PopularityModel{rates / rates.sum()}, length, seed,
                                  with_timestamps);
      },
      py::arg("rates"), py::arg("length"), py::arg("seed"), py::arg("with_timestamps") = false);

  const auto sim_options = [](std::size_t warmup, std::uint64_t seed, bool hash) {
    SimOptions options;
    options.warmup = warmup;
    options.seed = seed;
    options.track_state_hash = hash;
    return options;
  };
  m.def(
      "simulate_rnd_lru",
      [=](const NeighborhoodIndex& index, const Acceptance& q, const Trace& trace, int capacity,
          std::size_t warmup, std::uint64_t seed, bool track_state_hash) {
        return stats_to_dict(
            simulate_rnd_lru(index, q.fn, trace, capacity, sim_options(warmup, seed, track_state_hash)));
      },
      py::arg("index"), py::arg("q"), py::arg("trace"), py::arg("capacity"),
      py::arg("warmup") = 0, py::arg("seed") = 0, py::arg("track_state_hash") = false);
  m.def(
      "simulate_sim_lru",
      [=](const NeighborhoodIndex& index, const Trace& trace, int capacity, std::size_t warmup,
          std::uint64_t seed, bool track_state_hash) {
        return stats_to_dict(
            simulate_sim_lru(index, trace, capacity, sim_options(warmup, seed, track_state_hash)));
      },
      py::arg("index"), py::arg("trace"), py::arg("capacity"), py::arg("warmup") = 0,
      py::arg("seed") = 0, py::arg("track_state_hash") = false);
  m.def(
      "simulate_lru",
      [=](int n_items, const Trace& trace, int capacity, std::size_t warmup, std::uint64_t seed,
          bool track_state_hash) {
        return stats_to_dict(
            simulate_lru(n_items, trace, capacity, sim_options(warmup, seed, track_state_hash)));
      },
      py::arg("n_items"), py::arg("trace"), py::arg("capacity"), py::arg("warmup") = 0,
      py::arg("seed") = 0, py::arg("track_state_hash") = false);
  m.def(
      "simulate_ttl_similarity",
      [=](const NeighborhoodIndex& index, const Acceptance& q, const Trace& trace,
          const Vec& timers, std::size_t warmup, std::uint64_t seed) {
        return stats_to_dict(
            simulate_ttl_similarity(index, q.fn, trace, timers, sim_options(warmup, seed, false)));
      },
      py::arg("index"), py::arg("q"), py::arg("trace"), py::arg("timers"), py::arg("warmup") = 0,
      py::arg("seed") = 0);

  m.def(
      "rnd_ttl_renewal_oracle",
      [](double insertion_rate, double refresh_rate, double timer, long cycles,
         std::uint64_t seed, double sample_rate) {
        const RenewalEstimate est =
            rnd_ttl_renewal_oracle(insertion_rate, refresh_rate, timer, cycles, seed, sample_rate);
        py::dict out;
        out["occupancy"] = est.occupancy;
        out["std_error"] = est.std_error;
        out["epoch_occupancy"] = est.epoch_occupancy;
        out["epoch_std_error"] = est.epoch_std_error;
        out["cycles"] = est.cycles;
        return out;
      },
      py::arg("insertion_rate"), py::arg("refresh_rate"), py::arg("timer"), py::arg("cycles"),
      py::arg("seed"), py::arg("sample_rate") = 0.0);

  m.def(
      "measure_policy",
      [](const NeighborhoodIndex& index, const std::string& policy, const Acceptance& q,
         const Vec& rates, int capacity, std::size_t trace_length, int repetitions,
         std::uint64_t seed, double warmup_fraction, double timer) {
        PolicySpec spec;
        spec.capacity = capacity;
        spec.q = q.fn;
        spec.timer = timer;
        if (policy == "rnd_lru") spec.kind = PolicySpec::Kind::rnd_lru;
        else if (policy == "sim_lru") spec.kind = PolicySpec::Kind::sim_lru;
        else if (policy == "lru") spec.kind = PolicySpec::Kind::lru;
        else if (policy == "ttl") spec.kind = PolicySpec::Kind::ttl_similarity;
        else throw std::invalid_argument("unknown policy " + policy);
        const MeasuredStats stats = measure_policy(index, spec, PopularityModel{rates},
                                                   trace_length, repetitions, seed,
                                                   warmup_fraction);
        py::dict out;
        out["mean_hit_rate"] = stats.mean_hit_rate;
        out["ci95_half_width"] = stats.ci95_half_width;
        out["repetitions"] = stats.repetitions;
        out["per_rep_hit_rate"] = stats.per_rep_hit_rate;
        out["mean_occupancy"] = stats.mean_occupancy;
        return out;
      },
      py::arg("index"), py::arg("policy"), py::arg("q"), py::arg("rates"), py::arg("capacity"),
      py::arg("trace_length"), py::arg("repetitions"), py::arg("seed"),
      py::arg("warmup_fraction") = 0.1, py::arg("timer") = 0.0);

  m.def(
      "jacobian_G",
      [](const NeighborhoodIndex& index, const Acceptance& q, const Vec& rates, double capacity,
         const Vec& o) {
        const JacobianBundle bundle = jacobian_G(index, q.fn, rates, capacity, o);
        py::dict out;
        out["J_G"] = bundle.J_G;
        out["J_E"] = bundle.J_E;
        out["J_R"] = bundle.J_R;
        out["t_c"] = bundle.t_c;
        return out;
      },
      py::arg("index"), py::arg("q"), py::arg("rates"), py::arg("capacity"),
      py::arg("occupancy"));
  m.def(
      "operator_norms",
      [](const Mat& m_in) {
        const OperatorNorms norms = operator_norms(m_in);
        return py::make_tuple(norms.spectral, norms.one, norms.infinity);
      },
      py::arg("matrix"));
  m.def("spectral_norm", &spectral_norm, py::arg("matrix"), py::arg("tol") = 1e-10,
        py::arg("seed") = 12345);
  m.def(
      "beta_interval",
      [](const Mat& J_G) {
        const BetaInterval interval = beta_interval(J_G);
        py::dict out;
        out["gamma"] = interval.gamma;
        out["eta"] = interval.eta;
        out["discriminant"] = interval.discriminant;
        out["lo"] = interval.lo;
        out["hi"] = interval.hi;
        out["nonempty"] = interval.nonempty();
        return out;
      },
      py::arg("J_G"));
  m.def("sample_capped_simplex", &sample_capped_simplex, py::arg("n_items"), py::arg("capacity"),
        py::arg("count"), py::arg("seed"));
  m.def(
      "tune_beta",
      [](const NeighborhoodIndex& index, const Acceptance& q, const Vec& rates, double capacity,
         int d_samples, std::uint64_t seed) {
        const BetaChoice choice = tune_beta(index, q.fn, rates, capacity, d_samples, seed);
        py::dict out;
        out["beta"] = choice.beta;
        out["verified"] = choice.verified;
        out["intersection"] = py::make_tuple(choice.intersection_lo, choice.intersection_hi);
        out["warnings"] = choice.warnings;
        return out;
      },
      py::arg("index"), py::arg("q"), py::arg("rates"), py::arg("capacity"),
      py::arg("d_samples") = 8, py::arg("seed") = 12345);

  m.def(
      "check_cover_condition",
      [](const NeighborhoodIndex& index, double capacity, const std::string& mode) {
        const CoverReport report = check_cover_condition(
            index, capacity, mode == "exact" ? CoverMode::exact : CoverMode::heuristic);
        py::dict out;
        out["status"] = report.status == CoverStatus::holds
                            ? "holds"
                            : (report.status == CoverStatus::fails ? "fails" : "unknown");
        out["witness"] = report.witness;
        out["best_coverage"] = report.best_coverage;
        return out;
      },
      py::arg("index"), py::arg("capacity"), py::arg("mode") = "heuristic");

  m.attr("__version__") = "0.1.0";
}
