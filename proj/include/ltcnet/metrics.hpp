#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ltcnet {

double mse(const std::vector<double>& pred, const std::vector<double>& actual);

// 1 - SS_res/SS_tot. Throws on constant actual (SS_tot would be zero).
double r2_score(const std::vector<double>& actual,
                const std::vector<double>& pred);

// Type-7 (linear interpolation) quantile of sorted-by-copy data.
double quantile(std::vector<double> data, double percentile);

struct TailMse {
  double value = 0.0;
  std::size_t n_tail = 0;
  double threshold = 0.0;
};

// MSE restricted to samples with actual >= the percentile threshold.
TailMse tail_mse(const std::vector<double>& actual,
                 const std::vector<double>& pred, double percentile = 90.0);

struct EvalReport {
  std::string model_kind;
  std::size_t neurons = 0;
  std::size_t epochs = 0;
  std::uint64_t seed = 0;
  std::string cfg_hash;
  std::string perturbation;  // "none" or kind:epsilon
  double r2 = 0.0;
  double mse = 0.0;
  double tail_mse_p90 = 0.0;
  std::size_t n_test = 0;
  std::size_t n_tail = 0;
  std::size_t param_count = 0;
  std::size_t flops_per_step = 0;
  std::uint64_t flops_total = 0;
  double train_wall_seconds = 0.0;
  double final_train_loss = 0.0;
  std::optional<double> ks_statistic;
  std::optional<double> ks_p;
  std::optional<double> train_energy_joules;

  std::string to_json() const;
  static EvalReport from_json(const std::string& text);
  static std::string csv_header();
  std::string csv_row() const;
};

}  // namespace ltcnet
