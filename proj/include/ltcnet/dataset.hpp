#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ltcnet {

// One 15-minute measurement bin for one logical cell (or, after
// aggregation, one radio unit).
struct RawRecord {
  std::int64_t timestamp = 0;  // unix seconds, aligned to 15-minute grid
  std::string site_id;
  std::string cell_id;  // empty after unit aggregation
  std::string unit_id;
  std::map<std::string, double> counters;  // NaN marks a missing value
  std::optional<double> energy;            // joules per bin; label
};

struct Scaler {
  std::vector<double> feature_mean, feature_std;  // per column
  double target_mean = 0.0, target_std = 1.0;
};

struct Dataset {
  std::vector<std::string> feature_names;
  std::vector<std::vector<double>> features;  // T x F
  std::vector<double> target;                 // length T
  std::vector<std::int64_t> timestamps;
  Scaler scaler;
  bool scaled = false;
  // chronological split: train = [0, train_end), test = [test_begin, T)
  std::size_t train_end = 0, test_begin = 0;
  std::string perturbation = "none";
  std::optional<double> ks_statistic, ks_p;  // shift induced by a perturbation

  std::size_t rows() const { return target.size(); }
  std::size_t feature_count() const {
    return features.empty() ? 0 : features[0].size();
  }
  std::vector<std::vector<double>> train_features() const;
  std::vector<std::vector<double>> test_features() const;
  std::vector<double> train_target() const;
  std::vector<double> test_target() const;

  void save(const std::string& path) const;
  static Dataset load(const std::string& path);
};

// Sum counters over cells sharing (site, unit, timestamp); energy is a
// per-unit measurement and must agree across the group.
std::vector<RawRecord> aggregate_by_unit(const std::vector<RawRecord>& records);

// Replace each NaN with the nearest preceding present value; leading NaNs
// take the first present value. Throws if the whole series is missing.
void forward_fill(std::vector<double>& series);

// Fit per-column mean/std (population, ddof 0) on the first
// floor(train_fraction * T) rows and apply to all rows. Constant columns
// scale with std 1 and are reported back as warnings.
std::vector<std::string> fit_scale(Dataset& ds, double train_fraction);

// train = [0, floor(train_frac*T)), test = [T - floor(test_frac*T), T).
void chrono_split(Dataset& ds, double train_frac = 0.65,
                  double test_frac = 0.30);

// Assemble a Dataset from unit-aggregated records of one (site, unit)
// stream, sorted by timestamp. Counter names become feature columns.
Dataset dataset_from_records(const std::vector<RawRecord>& records);

std::vector<RawRecord> read_records_csv(const std::string& path);
void write_records_csv(const std::string& path,
                       const std::vector<RawRecord>& records);

}  // namespace ltcnet
