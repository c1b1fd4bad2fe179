#pragma once

#include <string>

#include "simcache/catalog.hpp"
#include "simcache/simulate.hpp"

namespace simcache::io {

/// CSV with header id,x0,x1,...; ids must be dense 0..N-1 (any row order).
void write_catalog_csv(const Catalog& catalog, const std::string& path);
Catalog read_catalog_csv(const std::string& path);

/// CSV with header id,weight; weights are normalized on load.
void write_popularity_csv(const PopularityModel& popularity, const std::string& path);
PopularityModel read_popularity_csv(const std::string& path, int n_items);

/// Newline-delimited ids, or CSV id,timestamp when the trace carries
/// timestamps. Reading accepts plain or gzip-compressed files (.gz).
void write_trace(const Trace& trace, const std::string& path);
Trace read_trace(const std::string& path);

}  // namespace simcache::io
