#include "simcache/io.hpp"

#include <zlib.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace simcache::io {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  return fields;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// Whole file as text; transparently inflates .gz.
std::string slurp(const std::string& path) {
  if (ends_with(path, ".gz")) {
    gzFile f = gzopen(path.c_str(), "rb");
    if (!f) throw std::runtime_error("cannot open " + path);
    std::string out;
    char buffer[1 << 16];
    int got;
    while ((got = gzread(f, buffer, sizeof buffer)) > 0) out.append(buffer, got);
    const bool bad = got < 0;
    gzclose(f);
    if (bad) throw std::runtime_error("gzip read error in " + path);
    return out;
  }
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  return f;
}

}  // namespace

void write_catalog_csv(const Catalog& catalog, const std::string& path) {
  auto f = open_out(path);
  f << "id";
  for (int k = 0; k < catalog.dim(); ++k) f << ",x" << k;
  f << "\n";
  f.precision(17);
  for (int n = 0; n < catalog.size(); ++n) {
    f << n;
    for (int k = 0; k < catalog.dim(); ++k) f << ',' << catalog.coords(n, k);
    f << "\n";
  }
}

Catalog read_catalog_csv(const std::string& path) {
  std::istringstream in(slurp(path));
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty catalog file " + path);
  const auto header = split_csv(line);
  if (header.size() < 2 || header[0] != "id")
    throw std::runtime_error("catalog header must be id,x0,...: " + path);
  const int dim = static_cast<int>(header.size()) - 1;

  std::vector<std::pair<int, std::vector<double>>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (static_cast<int>(fields.size()) != dim + 1)
      throw std::runtime_error("catalog row with wrong arity: " + line);
    std::vector<double> coords(dim);
    for (int k = 0; k < dim; ++k) coords[k] = std::stod(fields[k + 1]);
    rows.emplace_back(std::stoi(fields[0]), std::move(coords));
  }
  Catalog catalog;
  catalog.coords.resize(static_cast<Eigen::Index>(rows.size()), dim);
  std::vector<bool> seen(rows.size(), false);
  for (const auto& [id, coords] : rows) {
    if (id < 0 || id >= static_cast<int>(rows.size()) || seen[id])
      throw std::runtime_error("catalog ids must be dense and unique");
    seen[id] = true;
    for (int k = 0; k < dim; ++k) catalog.coords(id, k) = coords[k];
  }
  return catalog;
}

void write_popularity_csv(const PopularityModel& popularity, const std::string& path) {
  auto f = open_out(path);
  f << "id,weight\n";
  f.precision(17);
  for (int n = 0; n < popularity.size(); ++n) f << n << ',' << popularity.rates[n] << "\n";
}

PopularityModel read_popularity_csv(const std::string& path, int n_items) {
  std::istringstream in(slurp(path));
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty popularity file " + path);
  if (split_csv(line) != std::vector<std::string>{"id", "weight"})
    throw std::runtime_error("popularity header must be id,weight: " + path);
  Vec weights = Vec::Zero(n_items);
  std::vector<bool> seen(n_items, false);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != 2) throw std::runtime_error("popularity row with wrong arity: " + line);
    const int id = std::stoi(fields[0]);
    if (id < 0 || id >= n_items || seen[id])
      throw std::runtime_error("popularity ids must be unique and in range");
    seen[id] = true;
    weights[id] = std::stod(fields[1]);
  }
  return popularity_from_weights(std::move(weights));
}

void write_trace(const Trace& trace, const std::string& path) {
  auto f = open_out(path);
  f.precision(17);
  if (trace.has_timestamps()) {
    f << "id,timestamp\n";
    for (std::size_t i = 0; i < trace.requests.size(); ++i)
      f << trace.requests[i] << ',' << trace.timestamps[i] << "\n";
  } else {
    for (ItemId id : trace.requests) f << id << "\n";
  }
}

Trace read_trace(const std::string& path) {
  std::istringstream in(slurp(path));
  std::string line;
  Trace trace;
  bool first = true;
  bool with_time = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (first) {
      first = false;
      if (line.rfind("id,timestamp", 0) == 0) {
        with_time = true;
        continue;
      }
    }
    if (with_time) {
      const auto fields = split_csv(line);
      if (fields.size() != 2) throw std::runtime_error("trace row with wrong arity: " + line);
      trace.requests.push_back(std::stoi(fields[0]));
      trace.timestamps.push_back(std::stod(fields[1]));
    } else {
      trace.requests.push_back(std::stoi(line));
    }
  }
  if (trace.requests.empty()) throw std::runtime_error("empty trace file " + path);
  return trace;
}

}  // namespace simcache::io
