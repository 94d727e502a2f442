#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include "lrs/errors.hpp"

namespace lrs {

// Chi-square statistic of observed counts against expected counts.
// Cells with expected == 0 must have observed == 0 (else the statistic is
// infinite and we throw instead).
inline double chi_square_statistic(const std::vector<double>& observed,
                                   const std::vector<double>& expected) {
  if (observed.size() != expected.size())
    throw DomainError("observed and expected cell counts differ in length");
  double stat = 0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (expected[i] <= 0) {
      if (observed[i] != 0) throw DomainError("observed mass in a zero-expectation cell");
      continue;
    }
    const double d = observed[i] - expected[i];
    stat += d * d / expected[i];
  }
  return stat;
}

// Chi-square against the uniform distribution over `cells` cells.
inline double chi_square_uniform(const std::vector<std::uint64_t>& observed) {
  if (observed.empty()) throw DomainError("empty histogram");
  double total = 0;
  for (auto c : observed) total += static_cast<double>(c);
  const double expected = total / static_cast<double>(observed.size());
  double stat = 0;
  for (auto c : observed) {
    const double d = static_cast<double>(c) - expected;
    stat += d * d / expected;
  }
  return stat;
}

// Mean and standard deviation of the chi-square distribution with df degrees
// of freedom: mean = df, sd = sqrt(2 df). A statistic within mean + z*sd is
// unsurprising at roughly the z-sigma level (conservative for large df).
inline double chi_square_sigma_level(double statistic, double df) {
  return (statistic - df) / std::sqrt(2.0 * df);
}

struct WilsonInterval {
  double center;
  double half_width;

  double low() const { return std::max(0.0, center - half_width); }
  double high() const { return std::min(1.0, center + half_width); }
};

// Wilson score interval for a binomial proportion, z = confidence quantile
// (1.96 for 95%).
inline WilsonInterval wilson_interval(std::uint64_t successes, std::uint64_t trials,
                                      double z = 1.96) {
  if (trials == 0) throw DomainError("Wilson interval needs at least one trial");
  const double n = static_cast<double>(trials);
  const double phat = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (phat + z2 / (2.0 * n)) / denom;
  const double half =
      (z / denom) * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n));
  return {center, half};
}

// Total-variation distance between two histograms over a shared (merged) key
// space. Each histogram is normalized by its own total mass.
template <typename Key>
inline double tv_distance(const std::map<Key, std::uint64_t>& a,
                          const std::map<Key, std::uint64_t>& b) {
  double total_a = 0, total_b = 0;
  for (const auto& [k, v] : a) total_a += static_cast<double>(v);
  for (const auto& [k, v] : b) total_b += static_cast<double>(v);
  if (total_a == 0 || total_b == 0) throw DomainError("tv_distance needs nonempty histograms");
  double tv = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() || ib != b.end()) {
    if (ib == b.end() || (ia != a.end() && ia->first < ib->first)) {
      tv += static_cast<double>(ia->second) / total_a;
      ++ia;
    } else if (ia == a.end() || ib->first < ia->first) {
      tv += static_cast<double>(ib->second) / total_b;
      ++ib;
    } else {
      tv += std::abs(static_cast<double>(ia->second) / total_a -
                     static_cast<double>(ib->second) / total_b);
      ++ia;
      ++ib;
    }
  }
  return tv / 2.0;
}

// Least-squares fit y = a + b*x with coefficient of determination.
struct LinearFit {
  double intercept;
  double slope;
  double r_squared;
};

inline LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw DomainError("line fit needs at least two matching points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0) throw DomainError("degenerate x values in line fit");
  const double slope = (n * sxy - sx * sy) / denom;
  const double intercept = (sy - slope * sx) / n;
  double ss_res = 0, ss_tot = 0;
  const double mean_y = sy / n;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double pred = intercept + slope * x[i];
    ss_res += (y[i] - pred) * (y[i] - pred);
    ss_tot += (y[i] - mean_y) * (y[i] - mean_y);
  }
  const double r2 = ss_tot == 0 ? 1.0 : 1.0 - ss_res / ss_tot;
  return {intercept, slope, r2};
}

}  // namespace lrs
