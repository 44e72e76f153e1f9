#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ltcnet {

enum class PerturbKind { kNoise, kDrift };
enum class PerturbTarget { kFeatures, kLabel };

struct PerturbationSpec {
  PerturbKind kind = PerturbKind::kNoise;
  double epsilon = 0.0;
  PerturbTarget target = PerturbTarget::kFeatures;
  std::uint64_t seed = 0;

  std::string label() const;
};

// Gaussian noise with variance (max - min) * epsilon, range taken over the
// given column. Matrix data is perturbed per column.
void add_noise(std::vector<double>& column, double epsilon, std::uint64_t seed);
void add_noise(std::vector<std::vector<double>>& rows, double epsilon,
               std::uint64_t seed);

// Constant downward shift of (max - min) * epsilon.
void add_drift(std::vector<double>& column, double epsilon);
void add_drift(std::vector<std::vector<double>>& rows, double epsilon);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n = 0, m = 0;
};

// Two-sample KS: D = sup |ECDF_a - ECDF_b|, asymptotic p-value with
// effective size n*m/(n+m).
KsResult ks_2samp(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace ltcnet
