// Batch front end: catalog/trace generation, hit-rate prediction, policy
// simulation, estimator comparison sweeps, damping analysis. Machine-readable
// JSON/CSV outputs with a reproducibility block; warnings never change the
// exit code.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "simcache/baselines.hpp"
#include "simcache/io.hpp"
#include "simcache/jacobian.hpp"
#include "simcache/model.hpp"
#include "simcache/simulate.hpp"
#include "simcache/solver.hpp"

using json = nlohmann::ordered_json;
using namespace simcache;

namespace {

constexpr const char* kVersion = "0.1.0";

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  std::ostringstream out;
  out << std::hex << value;
  return out.str();
}

std::vector<double> to_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

// ---------------------------------------------------------------------------
// experiment configuration shared by the analysis subcommands

struct Experiment {
  // catalog
  int grid = 0;
  std::string catalog_file;
  std::string tie_break = "auto";  // auto | id | ccw
  // popularity
  std::string hotspots = "24,24;74,74";
  double alpha = 0.0;
  std::string popularity_file;
  // similarity structure
  double radius = 1.0;
  std::string q_rule = "sim_lru";  // sim_lru | lru | power:<e> | table:<file>
  // solver
  std::vector<double> capacities;
  double beta = 0.5;
  bool tune = false;
  int iterations = 100;
  double occupancy_tol = 1e-8;
  double tc_tol = 1e-10;
  // simulation
  std::size_t requests = 200000;
  int repetitions = 10;
  std::uint64_t seed = 1;
  double warmup = 0.1;
  bool check_cover = false;

  json describe() const {
    json j;
    j["grid"] = grid;
    j["catalog_file"] = catalog_file;
    j["tie_break"] = tie_break;
    j["hotspots"] = hotspots;
    j["alpha"] = alpha;
    j["popularity_file"] = popularity_file;
    j["d"] = radius;
    j["q"] = q_rule;
    j["C"] = capacities;
    j["beta"] = beta;
    j["tune_beta"] = tune;
    j["iterations"] = iterations;
    j["occupancy_tol"] = occupancy_tol;
    j["tc_tol"] = tc_tol;
    j["r"] = requests;
    j["repetitions"] = repetitions;
    j["seed"] = seed;
    j["warmup"] = warmup;
    return j;
  }
};

void add_catalog_options(CLI::App* cmd, Experiment& exp) {
  cmd->add_option("--grid", exp.grid, "square grid side (items at integer coordinates)");
  cmd->add_option("--catalog", exp.catalog_file, "catalog CSV (id,x0,x1,...)");
  cmd->add_option("--tie-break", exp.tie_break, "neighbor tie-break: auto|id|ccw")
      ->check(CLI::IsMember({"auto", "id", "ccw"}));
}

void add_popularity_options(CLI::App* cmd, Experiment& exp) {
  cmd->add_option("--hotspots", exp.hotspots, "popularity hotspots, e.g. \"24,24;74,74\"");
  cmd->add_option("--alpha", exp.alpha, "popularity skew exponent");
  cmd->add_option("--popularity", exp.popularity_file, "popularity CSV (id,weight)");
}

void add_model_options(CLI::App* cmd, Experiment& exp) {
  cmd->add_option("--d", exp.radius, "similarity radius");
  cmd->add_option("--q", exp.q_rule, "acceptance rule: sim_lru|lru|power:<exp>|table:<file>");
  cmd->add_option("--C", exp.capacities, "cache capacities")->expected(-1);
  cmd->add_option("--beta", exp.beta, "damping factor in [0,1)");
  cmd->add_flag("--tune-beta", exp.tune, "pick beta by randomized interval intersection");
  cmd->add_option("--iterations", exp.iterations, "max fixed-point iterations");
  cmd->add_option("--occupancy-tol", exp.occupancy_tol, "stop when the step norm falls below");
  cmd->add_option("--tc-tol", exp.tc_tol, "characteristic-time residual tolerance");
  cmd->add_flag("--check-cover", exp.check_cover, "force the cover-condition check");
}

// JSON config mirrors the long flag names; explicit flags win.
void load_config_into(CLI::App* cmd, Experiment& exp, const std::string& config_path) {
  if (config_path.empty()) return;
  std::ifstream f(config_path);
  const json j = json::parse(f);
  const auto given = [&](const std::string& flag) {
    const auto* option = cmd->get_option_no_throw(flag);
    return option != nullptr && option->count() > 0;
  };
  const auto set_int = [&](const char* key, auto& field) {
    if (j.contains(key) && !given(std::string("--") + key))
      field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  set_int("grid", exp.grid);
  set_int("catalog", exp.catalog_file);
  set_int("tie-break", exp.tie_break);
  set_int("hotspots", exp.hotspots);
  set_int("alpha", exp.alpha);
  set_int("popularity", exp.popularity_file);
  set_int("d", exp.radius);
  set_int("q", exp.q_rule);
  set_int("C", exp.capacities);
  set_int("beta", exp.beta);
  set_int("iterations", exp.iterations);
  set_int("occupancy-tol", exp.occupancy_tol);
  set_int("tc-tol", exp.tc_tol);
  set_int("r", exp.requests);
  set_int("repetitions", exp.repetitions);
  set_int("seed", exp.seed);
  set_int("warmup", exp.warmup);
}

std::vector<Vec> parse_hotspots(const std::string& text) {
  std::vector<Vec> points;
  std::stringstream groups(text);
  std::string group;
  while (std::getline(groups, group, ';')) {
    std::vector<double> coords;
    std::stringstream fields(group);
    std::string field;
    while (std::getline(fields, field, ',')) coords.push_back(std::stod(field));
    Vec p(coords.size());
    for (std::size_t i = 0; i < coords.size(); ++i) p[i] = coords[i];
    points.push_back(std::move(p));
  }
  return points;
}

Catalog load_catalog(const Experiment& exp) {
  if (!exp.catalog_file.empty()) return io::read_catalog_csv(exp.catalog_file);
  if (exp.grid > 0) return grid_catalog(exp.grid);
  throw CLI::ValidationError("need --grid or --catalog");
}

TieBreak pick_tie_break(const Experiment& exp, const Catalog& catalog) {
  if (exp.tie_break == "id") return TieBreak::by_id;
  if (exp.tie_break == "ccw") return TieBreak::counterclockwise;
  return catalog.grid_side ? TieBreak::counterclockwise : TieBreak::by_id;
}

PopularityModel load_popularity(const Experiment& exp, const Catalog& catalog) {
  if (!exp.popularity_file.empty())
    return io::read_popularity_csv(exp.popularity_file, catalog.size());
  if (exp.alpha > 0.0)
    return synthetic_popularity(catalog, parse_hotspots(exp.hotspots), exp.alpha);
  throw CLI::ValidationError("need --alpha (with --hotspots) or --popularity");
}

AcceptanceFn acceptance_rule(const std::string& rule, const Catalog& catalog) {
  if (rule == "sim_lru") return accept_always();
  if (rule == "lru") return accept_exact_only();
  if (rule.rfind("power:", 0) == 0) {
    const double exponent = std::stod(rule.substr(6));
    auto coords = std::make_shared<Mat>(catalog.coords);
    return [coords, exponent](ItemId candidate, ItemId requested) {
      if (candidate == requested) return 1.0;
      const double dist = (coords->row(candidate) - coords->row(requested)).norm();
      return std::min(1.0, std::pow(dist, -exponent));
    };
  }
  if (rule.rfind("table:", 0) == 0) {
    const std::string path = rule.substr(6);
    auto table = std::make_shared<std::map<std::pair<ItemId, ItemId>, double>>();
    std::ifstream f(path);
    if (!f) throw CLI::ValidationError("cannot open q table " + path);
    std::string line;
    std::getline(f, line);  // header: candidate,requested,q
    while (std::getline(f, line)) {
      if (line.empty()) continue;
      std::stringstream ss(line);
      std::string a, b, c;
      std::getline(ss, a, ',');
      std::getline(ss, b, ',');
      std::getline(ss, c, ',');
      (*table)[{std::stoi(a), std::stoi(b)}] = std::stod(c);
    }
    return [table](ItemId candidate, ItemId requested) {
      if (candidate == requested) return 1.0;
      const auto it = table->find({candidate, requested});
      return it == table->end() ? 0.0 : it->second;
    };
  }
  throw CLI::ValidationError("unknown q rule: " + rule);
}

json repro_block(const Experiment& exp) {
  json j;
  j["seeds"] = {exp.seed};
  j["config_hash"] = hex64(fnv1a(exp.describe().dump()));
  j["version"] = kVersion;
  return j;
}

void emit(const json& payload, const std::string& out_path) {
  if (out_path.empty() || out_path == "-") {
    std::cout << payload.dump(2) << "\n";
  } else {
    std::ofstream f(out_path);
    if (!f) throw std::runtime_error("cannot write " + out_path);
    f << payload.dump(2) << "\n";
  }
}

// Advisory only: predictions proceed regardless of the outcome.
std::vector<std::string> cover_warnings(const NeighborhoodIndex& index, double capacity,
                                        bool force) {
  std::vector<std::string> warnings;
  try {
    if (index.size() <= 30 && capacity <= 10) {
      const CoverReport report = check_cover_condition(index, capacity, CoverMode::exact);
      if (report.status == CoverStatus::fails)
        warnings.push_back(
            "cover condition fails (exact check): the capacity equation may lose uniqueness");
    } else if (index.size() <= 2000 || force) {
      const CoverReport report = check_cover_condition(index, capacity, CoverMode::heuristic);
      if (report.status == CoverStatus::fails)
        warnings.push_back("cover condition fails (greedy witness of size " +
                           std::to_string(report.witness.size()) + ")");
      else
        warnings.push_back("cover condition unknown (greedy bound " +
                           std::to_string(report.best_coverage) + " < required " +
                           std::to_string(report.required) + ")");
    } else {
      warnings.push_back("cover condition not checked (catalog too large; use --check-cover)");
    }
  } catch (const std::exception& err) {
    warnings.push_back(std::string("cover condition check skipped: ") + err.what());
  }
  return warnings;
}

json prediction_report(const NeighborhoodIndex& index, const AcceptanceFn& q,
                       const PopularityModel& pop, double capacity, const Experiment& exp,
                       double beta, std::vector<std::string> warnings) {
  SolverConfig config;
  config.beta = beta;
  config.max_iterations = exp.iterations;
  config.occupancy_tol = exp.occupancy_tol;
  config.tc_tol = exp.tc_tol;
  const SolveResult result = solve(index, q, pop.rates, capacity, config);
  if (!result.converged)
    warnings.push_back("fixed point not converged after " + std::to_string(result.iterations) +
                       " iterations");
  json report;
  report["C"] = capacity;
  report["H"] = result.hit_rate;
  report["h"] = to_std(result.hit_probs);
  report["o"] = to_std(result.occupancy);
  report["t_C"] = result.t_c;
  report["t_C0"] = result.t_c0;
  report["iterations"] = result.iterations;
  report["converged"] = result.converged;
  json steps = json::array();
  for (std::size_t j = 1; j < result.trace.rows.size(); ++j)
    steps.push_back(result.trace.rows[j].step_norm);
  report["step_norms"] = steps;
  report["residual"] = result.final_residual;
  report["beta"] = beta;
  report["occupancy_sum"] = result.occupancy.sum();
  report["warnings"] = warnings;
  return report;
}

// ---------------------------------------------------------------------------

int cmd_gen_catalog(const Experiment& exp, const std::string& out) {
  const Catalog catalog = load_catalog(exp);
  io::write_catalog_csv(catalog, out);
  json meta;
  meta["items"] = catalog.size();
  meta["dim"] = catalog.dim();
  meta["out"] = out;
  meta["repro"] = repro_block(exp);
  std::cout << meta.dump(2) << "\n";
  return 0;
}

int cmd_gen_trace(const Experiment& exp, const std::string& out, bool with_timestamps) {
  const Catalog catalog = load_catalog(exp);
  const PopularityModel pop = load_popularity(exp, catalog);
  const Trace trace = generate_irm_trace(pop, exp.requests, exp.seed, with_timestamps);
  io::write_trace(trace, out);
  json meta;
  meta["out"] = out;
  meta["r"] = exp.requests;
  meta["seed"] = exp.seed;
  meta["alpha"] = exp.alpha;
  meta["timestamps"] = with_timestamps;
  meta["repro"] = repro_block(exp);
  std::ofstream side(out + ".meta.json");
  side << meta.dump(2) << "\n";
  std::cout << meta.dump(2) << "\n";
  return 0;
}

int cmd_predict(const Experiment& exp, const std::string& out) {
  const Catalog catalog = load_catalog(exp);
  const auto index =
      build_neighborhood_index(catalog, {exp.radius}, pick_tie_break(exp, catalog));
  const PopularityModel pop = load_popularity(exp, catalog);
  const AcceptanceFn q = acceptance_rule(exp.q_rule, catalog);
  if (exp.capacities.empty()) throw CLI::ValidationError("need at least one --C");

  json reports = json::array();
  for (double capacity : exp.capacities) {
    std::vector<std::string> warnings = cover_warnings(index, capacity, exp.check_cover);
    double beta = exp.beta;
    if (exp.tune) {
      const BetaChoice choice = tune_beta(index, q, pop.rates, capacity, 8, exp.seed);
      beta = choice.beta;
      if (!choice.verified)
        warnings.push_back("beta tuning not certified; using beta = " +
                           std::to_string(choice.beta));
    }
    reports.push_back(prediction_report(index, q, pop, capacity, exp, beta, warnings));
  }
  json payload;
  if (reports.size() == 1)
    payload = reports[0];
  else
    payload["results"] = reports;
  payload["repro"] = repro_block(exp);
  emit(payload, out);
  return 0;
}

int cmd_simulate(const Experiment& exp, const std::string& policy_name,
                 const std::string& trace_file, double ttl, const std::string& out,
                 const std::string& occupancy_out) {
  const Catalog catalog = load_catalog(exp);
  const auto index =
      build_neighborhood_index(catalog, {exp.radius}, pick_tie_break(exp, catalog));
  if (exp.capacities.size() != 1) throw CLI::ValidationError("simulate expects exactly one --C");
  const int capacity = static_cast<int>(exp.capacities[0]);

  PolicySpec policy;
  policy.capacity = capacity;
  if (policy_name == "rnd_lru") {
    policy.kind = PolicySpec::Kind::rnd_lru;
    policy.q = acceptance_rule(exp.q_rule, catalog);
  } else if (policy_name == "sim_lru") {
    policy.kind = PolicySpec::Kind::sim_lru;
  } else if (policy_name == "lru") {
    policy.kind = PolicySpec::Kind::lru;
  } else if (policy_name == "ttl") {
    policy.kind = PolicySpec::Kind::ttl_similarity;
    policy.q = acceptance_rule(exp.q_rule, catalog);
    policy.timer = ttl;
  } else {
    throw CLI::ValidationError("unknown policy " + policy_name);
  }

  json payload;
  std::vector<double> occupancy;
  if (!trace_file.empty()) {
    const Trace trace = io::read_trace(trace_file);
    SimOptions options;
    options.warmup = static_cast<std::size_t>(exp.warmup * trace.size());
    options.seed = exp.seed ^ 0x9e3779b97f4a7c15ULL;
    EmpiricalStats stats;
    switch (policy.kind) {
      case PolicySpec::Kind::rnd_lru:
        stats = simulate_rnd_lru(index, policy.q, trace, capacity, options);
        break;
      case PolicySpec::Kind::sim_lru:
        stats = simulate_sim_lru(index, trace, capacity, options);
        break;
      case PolicySpec::Kind::lru:
        stats = simulate_lru(index.size(), trace, capacity, options);
        break;
      case PolicySpec::Kind::ttl_similarity: {
        const Vec timers = Vec::Constant(index.size(), policy.timer);
        stats = simulate_ttl_similarity(index, policy.q, trace, timers, options);
        break;
      }
    }
    payload["hit_rate"] = stats.hit_rate;
    payload["measured"] = stats.measured;
    payload["warmup_discarded"] = stats.warmup_discarded;
    payload["trace"] = trace_file;
    occupancy = stats.occupancy;
  } else {
    const PopularityModel pop = load_popularity(exp, catalog);
    const MeasuredStats stats = measure_policy(index, policy, pop, exp.requests,
                                               exp.repetitions, exp.seed, exp.warmup);
    payload["hit_rate"] = stats.mean_hit_rate;
    payload["ci95"] = stats.ci95_half_width;
    payload["repetitions"] = stats.repetitions;
    payload["per_rep_hit_rate"] = stats.per_rep_hit_rate;
    occupancy = stats.mean_occupancy;
  }
  payload["policy"] = policy_name;
  payload["C"] = capacity;
  payload["warmup_fraction"] = exp.warmup;  // measurement skips this prefix
  payload["repro"] = repro_block(exp);
  if (!occupancy_out.empty()) {
    std::ofstream f(occupancy_out);
    f << "id,occupancy\n";
    f.precision(17);
    for (std::size_t n = 0; n < occupancy.size(); ++n) f << n << ',' << occupancy[n] << "\n";
    payload["occupancy_dump"] = occupancy_out;
  }
  emit(payload, out);
  return 0;
}

struct CompareRow {
  std::string method;
  double capacity;
  double hit_rate;
  double ci95;
  int seed_count;
};

int cmd_compare(const Experiment& exp, const std::vector<std::string>& methods,
                const std::string& csv_out, const std::string& out,
                const std::string& occupancy_out) {
  const Catalog catalog = load_catalog(exp);
  const auto index =
      build_neighborhood_index(catalog, {exp.radius}, pick_tie_break(exp, catalog));
  const PopularityModel pop = load_popularity(exp, catalog);
  const AcceptanceFn q = acceptance_rule(exp.q_rule, catalog);
  if (exp.capacities.empty()) throw CLI::ValidationError("need at least one --C");

  const auto run_cell = [&](const std::string& method, double capacity) -> CompareRow {
    CompareRow row{method, capacity, 0.0, 0.0, 0};
    const int c_int = static_cast<int>(capacity);
    if (method == "lru") {
      row.hit_rate = lru_ttl_estimate(pop.rates, capacity).hit_rate;
    } else if (method == "lru_agg") {
      row.hit_rate = lru_agg_estimate(index, pop.rates, capacity).hit_rate;
    } else if (method == "greedy") {
      row.hit_rate = greedy_coverage(index, pop.rates, c_int).covered_weight;
    } else if (method == "ours_rnd" || method == "ours_sim") {
      SolverConfig config;
      config.beta = exp.beta;
      config.max_iterations = exp.iterations;
      config.occupancy_tol = exp.occupancy_tol;
      config.tc_tol = exp.tc_tol;
      const AcceptanceFn eff = method == "ours_sim" ? accept_always() : q;
      row.hit_rate = solve(index, eff, pop.rates, capacity, config).hit_rate;
    } else if (method == "exp_rnd" || method == "exp_sim") {
      PolicySpec policy;
      policy.capacity = c_int;
      if (method == "exp_rnd") {
        policy.kind = PolicySpec::Kind::rnd_lru;
        policy.q = q;
      } else {
        policy.kind = PolicySpec::Kind::sim_lru;
      }
      const MeasuredStats stats = measure_policy(index, policy, pop, exp.requests,
                                                 exp.repetitions, exp.seed, exp.warmup);
      row.hit_rate = stats.mean_hit_rate;
      row.ci95 = stats.ci95_half_width;
      row.seed_count = stats.repetitions;
    } else {
      throw CLI::ValidationError("unknown method " + method);
    }
    return row;
  };

  // cells are independent; fan out across (C, method)
  std::vector<std::future<CompareRow>> cells;
  for (double capacity : exp.capacities)
    for (const std::string& method : methods)
      cells.push_back(std::async(std::launch::async | std::launch::deferred, run_cell, method,
                                 capacity));
  std::vector<CompareRow> rows;
  for (auto& cell : cells) rows.push_back(cell.get());

  std::ostringstream csv;
  csv << "method,C,hit_rate,ci95,seed_count\n";
  csv.precision(12);
  for (const auto& row : rows)
    csv << row.method << ',' << row.capacity << ',' << row.hit_rate << ',' << row.ci95 << ','
        << row.seed_count << "\n";
  if (!csv_out.empty()) {
    std::ofstream f(csv_out);
    f << csv.str();
  } else {
    std::cout << csv.str();
  }

  json payload;
  payload["rows"] = json::array();
  for (const auto& row : rows)
    payload["rows"].push_back({{"method", row.method},
                               {"C", row.capacity},
                               {"hit_rate", row.hit_rate},
                               {"ci95", row.ci95},
                               {"seed_count", row.seed_count}});
  payload["warmup_fraction"] = exp.warmup;  // empirical cells skip this prefix
  payload["repro"] = repro_block(exp);

  if (!occupancy_out.empty()) {
    // per-item occupancy at the first capacity: model next to empirical SIM-LRU
    const double capacity = exp.capacities[0];
    SolverConfig config;
    config.beta = exp.beta;
    config.max_iterations = exp.iterations;
    const SolveResult ours = solve(index, accept_always(), pop.rates, capacity, config);
    PolicySpec policy;
    policy.kind = PolicySpec::Kind::sim_lru;
    policy.capacity = static_cast<int>(capacity);
    const MeasuredStats sim = measure_policy(index, policy, pop, exp.requests, exp.repetitions,
                                             exp.seed, exp.warmup);
    std::ofstream f(occupancy_out);
    f << "id,model_occupancy,empirical_occupancy\n";
    f.precision(17);
    for (int n = 0; n < index.size(); ++n)
      f << n << ',' << ours.occupancy[n] << ',' << sim.mean_occupancy[n] << "\n";
    payload["occupancy_dump"] = occupancy_out;
  }
  if (!out.empty()) emit(payload, out);
  return 0;
}

int cmd_tune_beta(const Experiment& exp, int d_samples, const std::string& out) {
  const Catalog catalog = load_catalog(exp);
  const auto index =
      build_neighborhood_index(catalog, {exp.radius}, pick_tie_break(exp, catalog));
  const PopularityModel pop = load_popularity(exp, catalog);
  const AcceptanceFn q = acceptance_rule(exp.q_rule, catalog);
  if (exp.capacities.size() != 1) throw CLI::ValidationError("tune-beta expects exactly one --C");

  const BetaChoice choice =
      tune_beta(index, q, pop.rates, exp.capacities[0], d_samples, exp.seed);
  json payload;
  payload["beta"] = choice.beta;
  payload["verified"] = choice.verified;
  payload["intersection"] = {choice.intersection_lo, choice.intersection_hi};
  payload["samples"] = json::array();
  for (const auto& interval : choice.intervals)
    payload["samples"].push_back({{"gamma", interval.gamma},
                                  {"eta", interval.eta},
                                  {"discriminant", interval.discriminant},
                                  {"lo", interval.lo},
                                  {"hi", interval.hi}});
  payload["warnings"] = choice.warnings;
  payload["repro"] = repro_block(exp);
  emit(payload, out);
  return 0;
}

int cmd_analyze_jacobian(const Experiment& exp, int max_items, const std::string& out) {
  const Catalog catalog = load_catalog(exp);
  if (catalog.size() > max_items)
    throw CLI::ValidationError("dense Jacobian analysis refused for N > " +
                               std::to_string(max_items) + " items (see --max-n)");
  const auto index =
      build_neighborhood_index(catalog, {exp.radius}, pick_tie_break(exp, catalog));
  const PopularityModel pop = load_popularity(exp, catalog);
  const AcceptanceFn q = acceptance_rule(exp.q_rule, catalog);
  if (exp.capacities.empty()) throw CLI::ValidationError("need at least one --C");

  json payload;
  payload["beta"] = exp.beta;
  payload["norms"] = json::array();
  for (double capacity : exp.capacities) {
    // norms of the damped-map Jacobian at the LRU starting point o(0)
    const double t0 = lru_characteristic_time(pop.rates, capacity, exp.tc_tol);
    Vec o0(index.size());
    for (int n = 0; n < index.size(); ++n) o0[n] = -std::expm1(-pop.rates[n] * t0);
    const JacobianBundle bundle = jacobian_G(index, q, pop.rates, capacity, o0, exp.tc_tol);
    const OperatorNorms norms = operator_norms(bundle.damped(exp.beta));
    const BetaInterval interval = beta_interval(bundle.J_G);
    payload["norms"].push_back({{"C", capacity},
                                {"spectral", norms.spectral},
                                {"one", norms.one},
                                {"infinity", norms.infinity},
                                {"gamma", interval.gamma},
                                {"eta", interval.eta},
                                {"discriminant", interval.discriminant}});
  }
  payload["repro"] = repro_block(exp);
  emit(payload, out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"similarity-cache performance laboratory"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  Experiment exp;
  std::string config_path;
  std::string out;
  std::string csv_out;
  std::string occupancy_out;
  std::string trace_file;
  std::string policy_name = "sim_lru";
  std::vector<std::string> methods = {"exp_sim", "ours_sim", "lru", "lru_agg", "greedy"};
  bool with_timestamps = false;
  double ttl = 1.0;
  int d_samples = 8;
  int max_items = 3000;

  auto* gen_catalog = app.add_subcommand("gen-catalog", "write a catalog CSV");
  add_catalog_options(gen_catalog, exp);
  gen_catalog->add_option("--out", out, "output file")->required();

  auto* gen_trace = app.add_subcommand("gen-trace", "write an IRM request trace");
  add_catalog_options(gen_trace, exp);
  add_popularity_options(gen_trace, exp);
  gen_trace->add_option("--r", exp.requests, "number of requests");
  gen_trace->add_option("--seed", exp.seed, "random seed");
  gen_trace->add_flag("--timestamps", with_timestamps, "emit id,timestamp CSV");
  gen_trace->add_option("--out", out, "output file")->required();

  auto* predict = app.add_subcommand("predict", "fixed-point hit-rate prediction");
  add_catalog_options(predict, exp);
  add_popularity_options(predict, exp);
  add_model_options(predict, exp);
  predict->add_option("--seed", exp.seed, "seed for beta tuning");
  predict->add_option("--out", out, "output JSON (default stdout)");
  predict->add_option("--config", config_path, "JSON config mirroring the flags")
      ->check(CLI::ExistingFile);

  auto* simulate = app.add_subcommand("simulate", "trace-driven policy simulation");
  add_catalog_options(simulate, exp);
  add_popularity_options(simulate, exp);
  add_model_options(simulate, exp);
  simulate->add_option("--policy", policy_name, "rnd_lru|sim_lru|lru|ttl");
  simulate->add_option("--trace", trace_file, "existing trace file (else generated inline)");
  simulate->add_option("--ttl", ttl, "timer for the ttl policy");
  simulate->add_option("--r", exp.requests, "requests per generated trace");
  simulate->add_option("--repetitions", exp.repetitions, "generated-trace repetitions");
  simulate->add_option("--seed", exp.seed, "base seed");
  simulate->add_option("--warmup", exp.warmup, "warmup fraction excluded from stats");
  simulate->add_option("--occupancy-out", occupancy_out, "per-item occupancy CSV");
  simulate->add_option("--out", out, "output JSON (default stdout)");
  simulate->add_option("--config", config_path, "JSON config mirroring the flags")
      ->check(CLI::ExistingFile);

  auto* compare = app.add_subcommand("compare", "hit-rate comparison sweep");
  add_catalog_options(compare, exp);
  add_popularity_options(compare, exp);
  add_model_options(compare, exp);
  compare->add_option("--methods", methods,
                      "subset of exp_rnd exp_sim ours_rnd ours_sim lru lru_agg greedy")
      ->expected(-1);
  compare->add_option("--r", exp.requests, "requests per trace");
  compare->add_option("--repetitions", exp.repetitions, "traces per cell");
  compare->add_option("--seed", exp.seed, "base seed");
  compare->add_option("--warmup", exp.warmup, "warmup fraction");
  compare->add_option("--csv", csv_out, "CSV output (default stdout)");
  compare->add_option("--out", out, "JSON output");
  compare->add_option("--occupancy-out", occupancy_out,
                      "per-item model vs empirical occupancy CSV at the first C");
  compare->add_option("--config", config_path, "JSON config mirroring the flags")
      ->check(CLI::ExistingFile);

  auto* tune = app.add_subcommand("tune-beta", "randomized damping-interval selection");
  add_catalog_options(tune, exp);
  add_popularity_options(tune, exp);
  add_model_options(tune, exp);
  tune->add_option("--samples", d_samples, "points sampled from the capped simplex");
  tune->add_option("--seed", exp.seed, "sampling seed");
  tune->add_option("--out", out, "output JSON (default stdout)");

  auto* analyze = app.add_subcommand("analyze-jacobian", "damped-map norms at the LRU start");
  add_catalog_options(analyze, exp);
  add_popularity_options(analyze, exp);
  add_model_options(analyze, exp);
  analyze->add_option("--max-n", max_items, "refuse dense analysis above this many items");
  analyze->add_option("--out", out, "output JSON (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen_catalog->parsed()) return cmd_gen_catalog(exp, out);
    if (gen_trace->parsed()) return cmd_gen_trace(exp, out, with_timestamps);
    if (predict->parsed()) {
      load_config_into(predict, exp, config_path);
      return cmd_predict(exp, out);
    }
    if (simulate->parsed()) {
      load_config_into(simulate, exp, config_path);
      return cmd_simulate(exp, policy_name, trace_file, ttl, out, occupancy_out);
    }
    if (compare->parsed()) {
      load_config_into(compare, exp, config_path);
      return cmd_compare(exp, methods, csv_out, out, occupancy_out);
    }
    if (tune->parsed()) return cmd_tune_beta(exp, d_samples, out);
    if (analyze->parsed()) return cmd_analyze_jacobian(exp, max_items, out);
  } catch (const CLI::ValidationError& err) {
    json error;
    error["error"] = err.what();
    std::cerr << error.dump(2) << "\n";
    return 2;
  } catch (const std::exception& err) {
    json error;
    error["error"] = err.what();
    std::cerr << error.dump(2) << "\n";
    return 1;
  }
  return 0;
}
