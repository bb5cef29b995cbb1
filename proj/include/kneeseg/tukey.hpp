#ifndef KNEESEG_TUKEY_HPP
#define KNEESEG_TUKEY_HPP

// Tukey-Kramer all-pairs comparison with p-values from the studentized range
// distribution, evaluated by nested adaptive Gauss-Kronrod quadrature.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "kneeseg/grid.hpp"

namespace kneeseg {

namespace detail {

inline double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// P(range of k iid standard normals <= w).
inline double normal_range_cdf(double w, int k) {
  if (w <= 0.0) return 0.0;
  using Quad = boost::math::quadrature::gauss_kronrod<double, 61>;
  auto f = [&](double x) {
    const double inside = normal_cdf(x + w) - normal_cdf(x);
    return normal_pdf(x) * std::pow(inside, k - 1);
  };
  // The integrand is bounded by the normal density; |x| > 9 is negligible.
  double total = 0.0;
  const double edges[] = {-9.0, -w / 2.0 - 2.0, -w / 2.0, -w / 2.0 + 2.0, 9.0};
  for (int i = 0; i + 1 < 5; ++i) {
    const double a = std::clamp(edges[i], -9.0, 9.0), b = std::clamp(edges[i + 1], -9.0, 9.0);
    if (b > a) total += Quad::integrate(f, a, b, 8, 1e-11);
  }
  return std::clamp(k * total, 0.0, 1.0);
}

/// Density of sqrt(chi^2_df / df).
inline double scaled_chi_pdf(double s, double df) {
  if (s <= 0.0) return 0.0;
  const double h = df / 2.0;
  const double logf = std::log(2.0) + h * std::log(h) - std::lgamma(h) + (df - 1.0) * std::log(s) -
                      h * s * s;
  return std::exp(logf);
}

}  // namespace detail

/// CDF of the studentized range for k groups and df error degrees of freedom;
/// df = +inf gives the range of k standard normals.
inline double studentized_range_cdf(double q, int k, double df) {
  if (k < 2) throw Error("studentized range: need k >= 2");
  if (!(df >= 1.0)) throw Error("studentized range: need df >= 1");
  if (q <= 0.0) return 0.0;
  if (std::isinf(q)) return 1.0;
  if (std::isinf(df)) return detail::normal_range_cdf(q, k);

  using Quad = boost::math::quadrature::gauss_kronrod<double, 31>;
  auto f = [&](double s) { return detail::normal_range_cdf(q * s, k) * detail::scaled_chi_pdf(s, df); };
  const double sigma = 1.0 / std::sqrt(2.0 * df);
  const double lo = std::max(0.0, 1.0 - 8.0 * sigma);
  const double hi = 1.0 + 8.0 * sigma;
  double total = 0.0;
  if (lo > 0.0) total += Quad::integrate(f, 0.0, lo, 8, 1e-10);
  total += Quad::integrate(f, lo, 1.0, 8, 1e-10);
  total += Quad::integrate(f, 1.0, hi, 8, 1e-10);
  total += Quad::integrate(f, hi, std::numeric_limits<double>::infinity(), 8, 1e-10);
  return std::clamp(total, 0.0, 1.0);
}

inline double studentized_range_sf(double q, int k, double df) {
  return std::clamp(1.0 - studentized_range_cdf(q, k, df), 0.0, 1.0);
}

struct PairwiseComparison {
  std::size_t first = 0;
  std::size_t second = 0;
  double mean_difference = 0.0;  // mean[first] - mean[second]
  double q = 0.0;
  double p_value = 1.0;
  bool significant = false;  // p < alpha
};

struct GroupComparison {
  std::vector<std::string> labels;
  std::vector<double> means;
  std::vector<std::size_t> sizes;
  double msw = 0.0;  // pooled within-group variance
  double df = 0.0;
  std::vector<PairwiseComparison> pairs;  // (i, j) with i < j, row-major
};

using NamedSample = std::pair<std::string, std::vector<double>>;

inline GroupComparison tukey_hsd(const std::vector<NamedSample>& groups, double alpha = 0.05) {
  const std::size_t k = groups.size();
  if (k < 2) throw Error("tukey_hsd: need at least two groups");
  GroupComparison r;
  double ss = 0.0;
  std::size_t total = 0;
  for (const auto& [name, values] : groups) {
    if (values.size() < 2) throw Error("tukey_hsd: group '" + name + "' has fewer than 2 values");
    double sum = 0.0;
    for (double v : values) sum += v;
    const double mean = sum / static_cast<double>(values.size());
    for (double v : values) ss += (v - mean) * (v - mean);
    r.labels.push_back(name);
    r.means.push_back(mean);
    r.sizes.push_back(values.size());
    total += values.size();
  }
  r.df = static_cast<double>(total - k);
  if (r.df < 1.0) throw Error("tukey_hsd: fewer than 1 error degree of freedom");
  r.msw = ss / r.df;

  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) {
      PairwiseComparison c;
      c.first = i;
      c.second = j;
      c.mean_difference = r.means[i] - r.means[j];
      const double diff = std::abs(c.mean_difference);
      const double se = std::sqrt(r.msw / 2.0 * (1.0 / r.sizes[i] + 1.0 / r.sizes[j]));
      if (se > 0.0) {
        c.q = diff / se;
        c.p_value = studentized_range_sf(c.q, static_cast<int>(k), r.df);
      } else {
        // No within-group spread: any difference is infinitely significant.
        c.q = diff > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
        c.p_value = diff > 0.0 ? 0.0 : 1.0;
      }
      c.significant = c.p_value < alpha;
      r.pairs.push_back(c);
    }
  return r;
}

}  // namespace kneeseg

#endif  // KNEESEG_TUKEY_HPP
