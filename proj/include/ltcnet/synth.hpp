#pragma once

#include <cstdint>
#include <string>

#include "ltcnet/dataset.hpp"

namespace ltcnet {

// Synthetic radio-unit counter generator. Features are daily-periodic
// (96-bin period) sinusoids with a slow site-level trend and additive
// noise; the target is a monotone function of a weighted feature sum plus
// (optionally heteroscedastic) noise:
//
//   x_tj = a_j sin(2 pi k_j t / 96 + phi_j) + trend c_j (t/T - 1/2) + fn eta
//   s_t  = standardize(sum_j w_j x_tj)
//   y_t  = standardize(s_t + 0.3 tanh(s_t))
//          + noise_std ((1 - hetero) + hetero |s_t|) eta_t
//
// With hetero = 0 the best achievable R^2 is 1 / (1 + noise_std^2).
struct SynthSpec {
  std::uint64_t seed = 1;
  std::size_t rows = 2000;
  std::size_t features = 6;
  double noise_std = 0.42;   // ceiling ~ 0.85 with hetero = 0
  double hetero = 0.0;
  double trend = 0.3;
  double feature_noise = 0.1;
};

Dataset synth_generate(const SynthSpec& spec);

// The noiseless target component of the same draw (the oracle predictor).
std::vector<double> synth_true_signal(const SynthSpec& spec);

// Multi-site raw CSV emission for exercising the ingestion pipeline: each
// site gets one radio unit with two cells whose counters sum to the
// feature values; sparse missing values are injected for forward-fill.
void synth_emit_csv(const SynthSpec& spec, const std::string& dir,
                    std::size_t n_sites);

}  // namespace ltcnet
