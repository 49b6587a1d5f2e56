#ifndef CBT_CORRELATION_HPP
#define CBT_CORRELATION_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "cbt/error.hpp"
#include "cbt/random.hpp"

namespace cbt {

struct CorrelationResult {
  double r = 0.0;
  double p_value = 1.0;
  std::size_t n_points = 0;
  std::size_t n_permutations = 0;
  std::uint64_t seed = 0;
};

inline constexpr std::size_t kMinPermutations = 100;

namespace correlation_detail {

inline void check_inputs(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size())
    throw Error(ErrorCode::LengthMismatch,
                std::to_string(xs.size()) + " vs " + std::to_string(ys.size()));
  if (xs.size() < 3) throw Error(ErrorCode::TooFewPoints, std::to_string(xs.size()));
}

inline double mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace correlation_detail

/// Sample Pearson correlation coefficient (two-pass, centered).
inline double pearson_r(std::span<const double> xs, std::span<const double> ys) {
  correlation_detail::check_inputs(xs, ys);
  const double mx = correlation_detail::mean(xs);
  const double my = correlation_detail::mean(ys);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw Error(ErrorCode::ConstantInput, "zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

/// Two-sided permutation p-value: (1 + #{|r_perm| >= |r_obs|}) / (n_perm + 1),
/// with ys reshuffled by a generator seeded from `seed`.
inline double permutation_p(std::span<const double> xs, std::span<const double> ys,
                            std::size_t n_perm, std::uint64_t seed) {
  const double observed = std::abs(pearson_r(xs, ys));
  if (n_perm < kMinPermutations)
    throw Error(ErrorCode::TooFewPermutations, std::to_string(n_perm) + " < 100");
  // Permuted correlations equal to the observed one up to rounding must count.
  constexpr double kTieSlack = 1e-12;
  Rng rng(seed);
  std::vector<double> shuffled(ys.begin(), ys.end());
  std::size_t extreme = 0;
  for (std::size_t i = 0; i < n_perm; ++i) {
    shuffle(std::span<double>(shuffled), rng);
    if (std::abs(pearson_r(xs, shuffled)) >= observed - kTieSlack) ++extreme;
  }
  return static_cast<double>(1 + extreme) / static_cast<double>(n_perm + 1);
}

inline CorrelationResult correlate(std::span<const double> xs, std::span<const double> ys,
                                   std::size_t n_perm, std::uint64_t seed) {
  CorrelationResult result;
  result.r = pearson_r(xs, ys);
  result.p_value = permutation_p(xs, ys, n_perm, seed);
  result.n_points = xs.size();
  result.n_permutations = n_perm;
  result.seed = seed;
  return result;
}

}  // namespace cbt

#endif  // CBT_CORRELATION_HPP
