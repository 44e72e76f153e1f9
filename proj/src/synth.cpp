#include "ltcnet/synth.hpp"

#include <cmath>
#include <filesystem>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace ltcnet {

namespace {

constexpr std::int64_t kBinSeconds = 900;
constexpr std::int64_t kEpochStart = 1700000000;  // arbitrary aligned origin

const char* kCounterNames[6] = {"prb_util_dl",     "data_volume_dl",
                                "connected_users", "active_sessions",
                                "throughput_dl",   "signaling_load"};

std::string counter_name(std::size_t j) {
  std::string base = kCounterNames[j % 6];
  if (j >= 6) base += "_" + std::to_string(j / 6);
  return base;
}

void standardize(std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  double sd = std::sqrt(var / static_cast<double>(v.size()));
  if (sd == 0.0) sd = 1.0;
  for (double& x : v) x = (x - mean) / sd;
}

struct Core {
  std::vector<std::vector<double>> features;
  std::vector<double> signal;  // standardized noiseless target
  std::vector<double> target;
};

Core generate_core(const SynthSpec& spec) {
  std::size_t t_count = spec.rows, f_count = spec.features;
  if (t_count < 96) throw std::invalid_argument("synth_generate: rows must be >= 96");
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> phase_d(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> amp_d(0.5, 1.5);
  std::uniform_real_distribution<double> w_d(0.3, 1.0);
  std::normal_distribution<double> eta(0.0, 1.0);

  std::vector<double> phase(f_count), amp(f_count), trend_c(f_count), w(f_count);
  std::vector<std::size_t> harmonic(f_count);
  for (std::size_t j = 0; j < f_count; ++j) {
    phase[j] = phase_d(rng);
    amp[j] = amp_d(rng);
    harmonic[j] = j % 3 + 1;
    trend_c[j] = amp_d(rng);
    w[j] = w_d(rng);
  }

  Core core;
  core.features.assign(t_count, std::vector<double>(f_count, 0.0));
  for (std::size_t t = 0; t < t_count; ++t)
    for (std::size_t j = 0; j < f_count; ++j) {
      double phase_t = 2.0 * std::numbers::pi * harmonic[j] *
                           static_cast<double>(t) / 96.0 +
                       phase[j];
      double base = amp[j] * std::sin(phase_t) +
                    spec.trend * trend_c[j] *
                        (static_cast<double>(t) / t_count - 0.5);
      core.features[t][j] = base + spec.feature_noise * eta(rng);
    }

  std::vector<double> s(t_count, 0.0);
  for (std::size_t t = 0; t < t_count; ++t)
    for (std::size_t j = 0; j < f_count; ++j) s[t] += w[j] * core.features[t][j];
  standardize(s);

  core.signal.resize(t_count);
  for (std::size_t t = 0; t < t_count; ++t)
    core.signal[t] = s[t] + 0.3 * std::tanh(s[t]);
  standardize(core.signal);

  core.target.resize(t_count);
  for (std::size_t t = 0; t < t_count; ++t) {
    double h = (1.0 - spec.hetero) + spec.hetero * std::abs(s[t]);
    core.target[t] = core.signal[t] + spec.noise_std * h * eta(rng);
  }
  return core;
}

}  // namespace

Dataset synth_generate(const SynthSpec& spec) {
  Core core = generate_core(spec);
  Dataset d;
  for (std::size_t j = 0; j < spec.features; ++j)
    d.feature_names.push_back(counter_name(j));
  d.features = std::move(core.features);
  d.target = std::move(core.target);
  d.timestamps.resize(spec.rows);
  for (std::size_t t = 0; t < spec.rows; ++t)
    d.timestamps[t] = kEpochStart + kBinSeconds * static_cast<std::int64_t>(t);
  return d;
}

std::vector<double> synth_true_signal(const SynthSpec& spec) {
  return generate_core(spec).signal;
}

void synth_emit_csv(const SynthSpec& spec, const std::string& dir,
                    std::size_t n_sites) {
  std::filesystem::create_directories(dir);
  for (std::size_t s = 0; s < n_sites; ++s) {
    SynthSpec site_spec = spec;
    site_spec.seed = spec.seed + s;
    // two site groups with distinct drift levels, for the clustering stage
    site_spec.trend = (s % 2 == 0) ? 0.1 : 2.0;
    Dataset d = synth_generate(site_spec);
    std::string site_id = "site" + std::to_string(s);
    std::vector<RawRecord> records;
    records.reserve(d.rows() * 2);
    for (std::size_t t = 0; t < d.rows(); ++t) {
      double energy = 5000.0 + 800.0 * d.target[t];
      for (int cell = 0; cell < 2; ++cell) {
        RawRecord r;
        r.timestamp = d.timestamps[t];
        r.site_id = site_id;
        r.cell_id = site_id + "_c" + std::to_string(cell);
        r.unit_id = site_id + "_u0";
        r.energy = energy;
        for (std::size_t j = 0; j < d.feature_count(); ++j) {
          double v = d.features[t][j] / 2.0;
          // paired missing values so the aggregated series has gaps
          if (t > 0 && t % 101 == 0 && j == (t / 101) % d.feature_count())
            v = std::numeric_limits<double>::quiet_NaN();
          r.counters[d.feature_names[j]] = v;
        }
        records.push_back(std::move(r));
      }
    }
    write_records_csv(dir + "/" + site_id + ".csv", records);
  }
}

}  // namespace ltcnet
