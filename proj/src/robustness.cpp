#include "ltcnet/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <stdexcept>

namespace ltcnet {

std::string PerturbationSpec::label() const {
  std::ostringstream os;
  os << (kind == PerturbKind::kNoise ? "noise" : "drift") << ':' << epsilon;
  return os.str();
}

namespace {

double column_range(const std::vector<double>& col) {
  auto [lo, hi] = std::minmax_element(col.begin(), col.end());
  return *hi - *lo;
}

void check_epsilon(double epsilon) {
  if (epsilon < 0.0)
    throw std::invalid_argument("perturbation: epsilon must be >= 0");
}

}  // namespace

void add_noise(std::vector<double>& column, double epsilon, std::uint64_t seed) {
  check_epsilon(epsilon);
  if (epsilon == 0.0 || column.empty()) return;
  double variance = column_range(column) * epsilon;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, std::sqrt(variance));
  for (auto& v : column) v += d(rng);
}

void add_noise(std::vector<std::vector<double>>& rows, double epsilon,
               std::uint64_t seed) {
  check_epsilon(epsilon);
  if (epsilon == 0.0 || rows.empty()) return;
  std::size_t cols = rows[0].size();
  for (std::size_t c = 0; c < cols; ++c) {
    std::vector<double> col(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) col[r] = rows[r][c];
    add_noise(col, epsilon, seed + c);
    for (std::size_t r = 0; r < rows.size(); ++r) rows[r][c] = col[r];
  }
}

void add_drift(std::vector<double>& column, double epsilon) {
  check_epsilon(epsilon);
  if (epsilon == 0.0 || column.empty()) return;
  double shift = column_range(column) * epsilon;
  for (auto& v : column) v -= shift;
}

void add_drift(std::vector<std::vector<double>>& rows, double epsilon) {
  check_epsilon(epsilon);
  if (epsilon == 0.0 || rows.empty()) return;
  std::size_t cols = rows[0].size();
  for (std::size_t c = 0; c < cols; ++c) {
    std::vector<double> col(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) col[r] = rows[r][c];
    add_drift(col, epsilon);
    for (std::size_t r = 0; r < rows.size(); ++r) rows[r][c] = col[r];
  }
}

KsResult ks_2samp(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty())
    throw std::invalid_argument("ks_2samp: samples must be non-empty");
  std::vector<double> sa = a, sb = b;
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  std::size_t n = sa.size(), m = sb.size();
  std::size_t i = 0, j = 0;
  // Track the scaled gap |i*m - j*n| in integers so the statistic is the
  // correctly rounded double of an exact rational p/(n*m).
  std::uint64_t num = 0;
  while (i < n && j < m) {
    double x = std::min(sa[i], sb[j]);
    while (i < n && sa[i] == x) ++i;
    while (j < m && sb[j] == x) ++j;
    std::uint64_t im = static_cast<std::uint64_t>(i) * m;
    std::uint64_t jn = static_cast<std::uint64_t>(j) * n;
    num = std::max(num, im > jn ? im - jn : jn - im);
  }
  // once one sample is exhausted the remaining diff only shrinks toward
  // |1 - j/m| at the first uncovered point, which the loop above already
  // bounded; final CDF values are both 1
  if (i < n || j < m) {
    std::uint64_t im = static_cast<std::uint64_t>(i) * m;
    std::uint64_t jn = static_cast<std::uint64_t>(j) * n;
    num = std::max(num, im > jn ? im - jn : jn - im);
  }
  double d = static_cast<double>(num) /
             (static_cast<double>(n) * static_cast<double>(m));

  KsResult r;
  r.statistic = d;
  r.n = n;
  r.m = m;
  double ne = static_cast<double>(n) * m / static_cast<double>(n + m);
  double t = 2.0 * ne * d * d;
  if (t < 1e-12) {
    r.p_value = 1.0;
    return r;
  }
  double p = 0.0;
  for (int k = 1; k <= 100; ++k) {
    double term = std::exp(-t * k * k);
    p += (k % 2 == 1 ? term : -term);
    if (term < 1e-16) break;
  }
  r.p_value = std::clamp(2.0 * p, 0.0, 1.0);
  return r;
}

}  // namespace ltcnet
