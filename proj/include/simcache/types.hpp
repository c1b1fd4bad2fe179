#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>

namespace simcache {

using ItemId = std::int32_t;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// q(candidate, requested): probability that a cached `candidate` is accepted
/// to serve a request for `requested`, given it is the closest cached item
/// within the similarity radius. Must satisfy q(n, n) = 1.
using AcceptanceFn = std::function<double(ItemId candidate, ItemId requested)>;

inline AcceptanceFn accept_always() {
  return [](ItemId, ItemId) { return 1.0; };
}

inline AcceptanceFn accept_exact_only() {
  return [](ItemId candidate, ItemId requested) {
    return candidate == requested ? 1.0 : 0.0;
  };
}

}  // namespace simcache
