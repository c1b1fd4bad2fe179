#include "simcache/jacobian.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "simcache/model.hpp"
#include "simcache/rng.hpp"

namespace simcache {

namespace {

double clamp01(double x) { return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x); }

double checked_q(const AcceptanceFn& q, ItemId candidate, ItemId requested) {
  const double value = q(candidate, requested);
  if (!(value >= 0.0 && value <= 1.0))
    throw std::invalid_argument("acceptance probability out of [0, 1]");
  return value;
}

}  // namespace

Mat jacobian_insertion_rates(const NeighborhoodIndex& index, const AcceptanceFn& q,
                             const Vec& rates, const Vec& occupancy) {
  const int n_items = index.size();
  if (rates.size() != n_items || occupancy.size() != n_items)
    throw std::invalid_argument("input size mismatch");
  Mat J = Mat::Zero(n_items, n_items);
  std::vector<double> pref, suf, tail;
  for (ItemId n = 0; n < n_items; ++n) {
    const auto& list = index.neighbors[n];
    const std::size_t K = list.size();
    if (K == 0) continue;
    pref.assign(K + 1, 1.0);
    suf.assign(K + 1, 1.0);
    tail.assign(K + 1, 0.0);
    for (std::size_t k = 0; k < K; ++k)
      pref[k + 1] = pref[k] * (1.0 - clamp01(occupancy[list[k]]));
    for (std::size_t k = K; k-- > 0;) {
      const double v = 1.0 - clamp01(occupancy[list[k]]);
      const double w = 1.0 - checked_q(q, list[k], n);
      suf[k] = suf[k + 1] * v;
      tail[k] = w * (1.0 - v) + v * tail[k + 1];
    }
    // d p_i / d o_{m_k} = pref[k] * (w_k - suf[k+1] - tail[k+1])
    for (std::size_t k = 0; k < K; ++k) {
      const double w = 1.0 - checked_q(q, list[k], n);
      J(n, list[k]) = rates[n] * pref[k] * (w - suf[k + 1] - tail[k + 1]);
    }
  }
  return J;
}

Mat jacobian_refresh_rates(const NeighborhoodIndex& index, const AcceptanceFn& q,
                           const Vec& rates, const Vec& occupancy) {
  const int n_items = index.size();
  if (rates.size() != n_items || occupancy.size() != n_items)
    throw std::invalid_argument("input size mismatch");
  Mat J = Mat::Zero(n_items, n_items);
  std::vector<ItemId> block;
  std::vector<double> pref, suf;
  for (ItemId n = 0; n < n_items; ++n) {
    const auto& list = index.neighbors[n];
    const auto& rank = index.rank_in_neighbor[n];
    for (std::size_t k = 0; k < list.size(); ++k) {
      const ItemId m = list[k];
      const double weight = checked_q(q, n, m) * rates[m];
      if (weight == 0.0) continue;
      // R_n picks up the term weight * prod_{j in B} (1 - o_j), with B the set
      // of items strictly closer to m than n: m itself plus the prefix of m's
      // neighbor list before n's position.
      block.clear();
      block.push_back(m);
      for (std::int32_t i = 0; i < rank[k]; ++i) block.push_back(index.neighbors[m][i]);
      const std::size_t B = block.size();
      pref.assign(B + 1, 1.0);
      suf.assign(B + 1, 1.0);
      for (std::size_t i = 0; i < B; ++i)
        pref[i + 1] = pref[i] * (1.0 - clamp01(occupancy[block[i]]));
      for (std::size_t i = B; i-- > 0;)
        suf[i] = suf[i + 1] * (1.0 - clamp01(occupancy[block[i]]));
      for (std::size_t i = 0; i < B; ++i)
        J(n, block[i]) -= weight * pref[i] * suf[i + 1];
    }
  }
  return J;
}

Mat JacobianBundle::damped(double beta) const {
  return (1.0 - beta) * J_G + beta * Mat::Identity(J_G.rows(), J_G.cols());
}

JacobianBundle jacobian_G(const NeighborhoodIndex& index, const AcceptanceFn& q, const Vec& rates,
                          double capacity, const Vec& occupancy, double tc_tol) {
  const int n_items = index.size();
  JacobianBundle bundle;
  const Vec e = insertion_rates(index, q, rates, occupancy);
  const Vec r = refresh_rates(index, q, rates, occupancy);
  bundle.t_c = solve_characteristic_time(index, q, rates, occupancy, capacity, tc_tol);
  bundle.J_E = jacobian_insertion_rates(index, q, rates, occupancy);
  bundle.J_R = jacobian_refresh_rates(index, q, rates, occupancy);
  bundle.dg_refresh.resize(n_items);
  bundle.dg_insertion.resize(n_items);
  bundle.dg_timer.resize(n_items);
  for (ItemId n = 0; n < n_items; ++n) {
    const GPartials p = occupancy_g_partials(r[n], e[n], bundle.t_c);
    bundle.dg_refresh[n] = p.d_refresh;
    bundle.dg_insertion[n] = p.d_insertion;
    bundle.dg_timer[n] = p.d_timer;
  }
  const double timer_sum = bundle.dg_timer.sum();
  if (timer_sum == 0.0)
    throw std::runtime_error("singular capacity sensitivity: all insertion rates are zero");
  // u_j = sum_n (d1_n J_R[n][j] + d2_n J_E[n][j]); the rank-one term carries
  // the characteristic-time dependence d t_C/d o_j = -u_j / timer_sum.
  const Vec u = bundle.J_R.transpose() * bundle.dg_refresh +
                bundle.J_E.transpose() * bundle.dg_insertion;
  bundle.J_G = bundle.dg_refresh.asDiagonal() * bundle.J_R +
               bundle.dg_insertion.asDiagonal() * bundle.J_E -
               (bundle.dg_timer * u.transpose()) / timer_sum;
  return bundle;
}

namespace {

Vec random_unit(int n, rng::Engine& eng) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = rng::uniform01(eng) - 0.5;
  const double norm = v.norm();
  if (norm == 0.0) {
    Vec e = Vec::Zero(n);
    e[0] = 1.0;
    return e;
  }
  return v / norm;
}

// Dominant eigenvalue of a symmetric positive semidefinite operator given as
// a matvec: blocked power iteration with a Rayleigh-Ritz projection each
// step. The block absorbs clustered top eigenvalues that stall the
// single-vector iteration; a sustained-value stop covers clusters wider than
// the block. Throws after exhausting restarts.
template <typename MatVec>
double dominant_psd_eigenvalue(const MatVec& apply, int n, double tol, rng::Engine& eng) {
  const int block = std::min(4, n);
  const int max_iterations = 20000;
  double top = 0.0;
  for (int restart = 0; restart < 3; ++restart) {
    Mat basis(n, block);
    for (int j = 0; j < block; ++j) basis.col(j) = random_unit(n, eng);
    {
      Eigen::HouseholderQR<Mat> qr(basis);
      basis = qr.householderQ() * Mat::Identity(n, block);
    }
    double previous = std::numeric_limits<double>::infinity();
    int stable = 0;
    for (int it = 0; it < max_iterations; ++it) {
      Mat image(n, block);
      for (int j = 0; j < block; ++j) image.col(j) = apply(basis.col(j));
      Mat projected = basis.transpose() * image;
      projected = 0.5 * (projected + projected.transpose().eval());
      const Eigen::SelfAdjointEigenSolver<Mat> ritz(projected);
      int arg = 0;
      top = ritz.eigenvalues().maxCoeff(&arg);
      const double scale = std::max(std::abs(top), 1e-300);
      const Vec direction = ritz.eigenvectors().col(arg);
      const Vec residual = image * direction - top * (basis * direction);
      if (residual.norm() <= tol * scale) return top;
      if (std::abs(top - previous) <= tol * scale) {
        if (++stable >= 10) return top;
      } else {
        stable = 0;
      }
      previous = top;
      Eigen::HouseholderQR<Mat> qr(image);
      basis = qr.householderQ() * Mat::Identity(n, block);
    }
  }
  throw std::runtime_error("power iteration did not converge; last Rayleigh quotient " +
                           std::to_string(top));
}

}  // namespace

double spectral_norm(const Mat& m, double tol, std::uint64_t seed) {
  if (m.rows() == 0) return 0.0;
  rng::Engine eng(seed);
  const auto apply = [&](const Vec& v) -> Vec { return m * (m.transpose() * v); };
  const double top = dominant_psd_eigenvalue(apply, static_cast<int>(m.rows()), tol, eng);
  return std::sqrt(std::max(top, 0.0));
}

double symmetric_spectral_radius(const Mat& s, double tol, std::uint64_t seed) {
  if (s.rows() == 0) return 0.0;
  rng::Engine eng(seed);
  const int n = static_cast<int>(s.rows());
  // Gershgorin shift makes both ends reachable by plain power iteration.
  const double shift = s.cwiseAbs().rowwise().sum().maxCoeff();
  if (shift == 0.0) return 0.0;
  const auto apply_plus = [&](const Vec& v) -> Vec { return s * v + shift * v; };
  const auto apply_minus = [&](const Vec& v) -> Vec { return shift * v - s * v; };
  const double lambda_max = dominant_psd_eigenvalue(apply_plus, n, tol, eng) - shift;
  const double lambda_min = shift - dominant_psd_eigenvalue(apply_minus, n, tol, eng);
  return std::max(std::abs(lambda_max), std::abs(lambda_min));
}

OperatorNorms operator_norms(const Mat& m, double tol, std::uint64_t seed) {
  if (m.rows() != m.cols()) throw std::invalid_argument("operator norms need a square matrix");
  OperatorNorms norms;
  norms.one = m.cwiseAbs().colwise().sum().maxCoeff();
  norms.infinity = m.cwiseAbs().rowwise().sum().maxCoeff();
  norms.spectral = spectral_norm(m, tol, seed);
  return norms;
}

BetaInterval beta_interval(const Mat& J_G, double tol, std::uint64_t seed) {
  BetaInterval out;
  out.gamma = spectral_norm(J_G, tol, seed);
  out.eta = symmetric_spectral_radius(J_G + J_G.transpose(), tol, seed);
  out.discriminant = out.eta * out.eta - 4.0 * out.eta * out.gamma + 4.0;
  if (out.discriminant < 0.0) return out;
  const double root = std::sqrt(out.discriminant);
  const double denom = 2.0 * (out.gamma + 1.0);
  out.lo = std::max(0.0, (2.0 * out.gamma - out.eta - root) / denom);
  out.hi = std::min(1.0, (2.0 * out.gamma - out.eta + root) / denom);
  return out;
}

std::vector<Vec> sample_capped_simplex(int n_items, double capacity, int count,
                                       std::uint64_t seed) {
  if (!(capacity > 0.0 && capacity < n_items))
    throw std::invalid_argument("capacity must satisfy 0 < C < N");
  if (count < 0) throw std::invalid_argument("count must be >= 0");
  rng::Engine eng(seed);
  std::vector<Vec> samples;
  samples.reserve(count);
  for (int s = 0; s < count; ++s) {
    Vec o(n_items);
    for (int i = 0; i < n_items; ++i) o[i] = rng::exponential(eng, 1.0);
    std::vector<bool> pinned(n_items, false);
    double budget = capacity;
    // Scale the free coordinates to the remaining budget; pin anything that
    // overshoots 1 and repeat. Terminates within n_items passes.
    for (int pass = 0; pass < n_items; ++pass) {
      double free_sum = 0.0;
      for (int i = 0; i < n_items; ++i)
        if (!pinned[i]) free_sum += o[i];
      bool clipped = false;
      for (int i = 0; i < n_items; ++i) {
        if (pinned[i]) continue;
        const double v = o[i] * budget / free_sum;
        if (v >= 1.0) {
          pinned[i] = true;
          o[i] = 1.0;
          budget -= 1.0;
          clipped = true;
        }
      }
      if (!clipped) {
        for (int i = 0; i < n_items; ++i)
          if (!pinned[i]) o[i] *= budget / free_sum;
        break;
      }
    }
    // Absorb the rounding slack into the coordinate with most headroom.
    double slack = capacity - o.sum();
    int best = 0;
    double headroom = -1.0;
    for (int i = 0; i < n_items; ++i) {
      const double room = slack >= 0.0 ? 1.0 - o[i] : o[i];
      if (room > headroom) {
        headroom = room;
        best = i;
      }
    }
    o[best] += slack;
    samples.push_back(std::move(o));
  }
  return samples;
}

BetaChoice tune_beta(const NeighborhoodIndex& index, const AcceptanceFn& q, const Vec& rates,
                     double capacity, int d_samples, std::uint64_t seed) {
  if (d_samples < 1) throw std::invalid_argument("d_samples must be >= 1");
  BetaChoice choice;
  const auto samples = sample_capped_simplex(index.size(), capacity, d_samples, seed);
  std::vector<const Vec*> usable;
  bool all_certified = true;
  double lo = 0.0, hi = 1.0;
  for (int s = 0; s < d_samples; ++s) {
    Mat J_G;
    try {
      J_G = jacobian_G(index, q, rates, capacity, samples[s], 1e-10).J_G;
    } catch (const std::runtime_error& err) {
      choice.warnings.push_back("sample " + std::to_string(s) + " skipped: " + err.what());
      continue;
    }
    BetaInterval interval = beta_interval(J_G, 1e-10, seed + 1 + s);
    if (interval.discriminant < 0.0 || !(interval.lo < interval.hi)) all_certified = false;
    lo = std::max(lo, interval.lo);
    hi = std::min(hi, interval.hi);
    choice.intervals.push_back(interval);
    usable.push_back(&samples[s]);
  }
  choice.intersection_lo = lo;
  choice.intersection_hi = hi;
  if (choice.intervals.empty()) {
    all_certified = false;
    choice.warnings.push_back("no usable samples");
  }
  if (!all_certified || !(lo < hi)) {
    choice.beta = 0.5;
    choice.verified = false;
    choice.warnings.push_back("interval certification failed; falling back to beta = 0.5");
    return choice;
  }
  choice.beta = 0.5 * (lo + hi);
  // Post-hoc check of the contraction bound at every sampled point.
  choice.verified = true;
  for (std::size_t s = 0; s < usable.size(); ++s) {
    const JacobianBundle bundle = jacobian_G(index, q, rates, capacity, *usable[s], 1e-10);
    if (!(spectral_norm(bundle.damped(choice.beta)) < 1.0)) {
      choice.verified = false;
      choice.warnings.push_back("post-hoc norm check failed at sample " + std::to_string(s));
      break;
    }
  }
  return choice;
}

}  // namespace simcache
