#include "ltcnet/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include <json.hpp>

namespace ltcnet {

namespace {

std::vector<std::vector<double>> slice_rows(
    const std::vector<std::vector<double>>& m, std::size_t lo, std::size_t hi) {
  return {m.begin() + lo, m.begin() + hi};
}

}  // namespace

std::vector<std::vector<double>> Dataset::train_features() const {
  return slice_rows(features, 0, train_end);
}
std::vector<std::vector<double>> Dataset::test_features() const {
  return slice_rows(features, test_begin, rows());
}
std::vector<double> Dataset::train_target() const {
  return {target.begin(), target.begin() + train_end};
}
std::vector<double> Dataset::test_target() const {
  return {target.begin() + test_begin, target.end()};
}

void Dataset::save(const std::string& path) const {
  nlohmann::json j;
  j["feature_names"] = feature_names;
  j["features"] = features;
  j["target"] = target;
  j["timestamps"] = timestamps;
  j["scaled"] = scaled;
  j["scaler"] = {{"feature_mean", scaler.feature_mean},
                 {"feature_std", scaler.feature_std},
                 {"target_mean", scaler.target_mean},
                 {"target_std", scaler.target_std}};
  j["train_end"] = train_end;
  j["test_begin"] = test_begin;
  j["perturbation"] = perturbation;
  if (ks_statistic) j["ks_statistic"] = *ks_statistic;
  if (ks_p) j["ks_p"] = *ks_p;
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write dataset file: " + path);
  f << j.dump() << '\n';
}

Dataset Dataset::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read dataset file: " + path);
  nlohmann::json j = nlohmann::json::parse(f);
  Dataset d;
  d.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  d.features = j.at("features").get<std::vector<std::vector<double>>>();
  d.target = j.at("target").get<std::vector<double>>();
  d.timestamps = j.at("timestamps").get<std::vector<std::int64_t>>();
  d.scaled = j.at("scaled").get<bool>();
  d.scaler.feature_mean = j["scaler"]["feature_mean"].get<std::vector<double>>();
  d.scaler.feature_std = j["scaler"]["feature_std"].get<std::vector<double>>();
  d.scaler.target_mean = j["scaler"]["target_mean"].get<double>();
  d.scaler.target_std = j["scaler"]["target_std"].get<double>();
  d.train_end = j.at("train_end").get<std::size_t>();
  d.test_begin = j.at("test_begin").get<std::size_t>();
  d.perturbation = j.value("perturbation", std::string("none"));
  if (j.contains("ks_statistic")) d.ks_statistic = j["ks_statistic"].get<double>();
  if (j.contains("ks_p")) d.ks_p = j["ks_p"].get<double>();
  return d;
}

std::vector<RawRecord> aggregate_by_unit(const std::vector<RawRecord>& records) {
  std::map<std::tuple<std::string, std::string, std::int64_t>, RawRecord> groups;
  for (const RawRecord& r : records) {
    auto key = std::make_tuple(r.site_id, r.unit_id, r.timestamp);
    auto [it, inserted] = groups.try_emplace(key);
    RawRecord& g = it->second;
    if (inserted) {
      g.timestamp = r.timestamp;
      g.site_id = r.site_id;
      g.unit_id = r.unit_id;
      g.energy = r.energy;
    } else if (r.energy && g.energy && *r.energy != *g.energy) {
      throw std::runtime_error(
          "aggregate_by_unit: conflicting energy values for site " + r.site_id +
          " unit " + r.unit_id + " at t=" + std::to_string(r.timestamp));
    } else if (r.energy && !g.energy) {
      g.energy = r.energy;
    }
    for (const auto& [name, v] : r.counters) {
      if (std::isnan(v)) {
        g.counters.try_emplace(name, v);  // keep NaN only if nothing present
      } else {
        auto [cit, fresh] = g.counters.try_emplace(name, 0.0);
        if (!fresh && std::isnan(cit->second)) cit->second = 0.0;
        cit->second += v;
      }
    }
  }
  std::vector<RawRecord> out;
  out.reserve(groups.size());
  for (auto& [k, v] : groups) out.push_back(std::move(v));
  return out;
}

void forward_fill(std::vector<double>& series) {
  std::size_t first = series.size();
  for (std::size_t i = 0; i < series.size(); ++i)
    if (!std::isnan(series[i])) { first = i; break; }
  if (first == series.size())
    throw std::runtime_error("forward_fill: all values missing");
  for (std::size_t i = 0; i < first; ++i) series[i] = series[first];
  for (std::size_t i = first + 1; i < series.size(); ++i)
    if (std::isnan(series[i])) series[i] = series[i - 1];
}

std::vector<std::string> fit_scale(Dataset& ds, double train_fraction) {
  std::size_t t = ds.rows();
  std::size_t n_train = static_cast<std::size_t>(
      std::floor(train_fraction * static_cast<double>(t)));
  if (n_train == 0) throw std::invalid_argument("fit_scale: empty train portion");
  std::vector<std::string> warnings;
  std::size_t f = ds.feature_count();
  ds.scaler.feature_mean.assign(f, 0.0);
  ds.scaler.feature_std.assign(f, 1.0);

  auto fit_apply = [&](auto get, auto set, double& mean_out, double& std_out,
                       const std::string& name) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n_train; ++i) mean += get(i);
    mean /= static_cast<double>(n_train);
    double var = 0.0;
    for (std::size_t i = 0; i < n_train; ++i) {
      double d = get(i) - mean;
      var += d * d;
    }
    double sd = std::sqrt(var / static_cast<double>(n_train));
    if (sd == 0.0) {
      sd = 1.0;
      warnings.push_back("fit_scale: column '" + name +
                         "' is constant on the train portion; std set to 1");
    }
    for (std::size_t i = 0; i < t; ++i) set(i, (get(i) - mean) / sd);
    mean_out = mean;
    std_out = sd;
  };

  for (std::size_t c = 0; c < f; ++c) {
    fit_apply([&](std::size_t i) { return ds.features[i][c]; },
              [&](std::size_t i, double v) { ds.features[i][c] = v; },
              ds.scaler.feature_mean[c], ds.scaler.feature_std[c],
              c < ds.feature_names.size() ? ds.feature_names[c]
                                          : std::to_string(c));
  }
  fit_apply([&](std::size_t i) { return ds.target[i]; },
            [&](std::size_t i, double v) { ds.target[i] = v; },
            ds.scaler.target_mean, ds.scaler.target_std, "target");
  ds.scaled = true;
  return warnings;
}

void chrono_split(Dataset& ds, double train_frac, double test_frac) {
  std::size_t t = ds.rows();
  if (t < 20) throw std::invalid_argument("chrono_split: need at least 20 rows");
  ds.train_end = static_cast<std::size_t>(std::floor(train_frac * t));
  ds.test_begin = t - static_cast<std::size_t>(std::floor(test_frac * t));
}

Dataset dataset_from_records(const std::vector<RawRecord>& records) {
  if (records.empty())
    throw std::invalid_argument("dataset_from_records: no records");
  std::set<std::string> names;
  for (const RawRecord& r : records)
    for (const auto& [name, v] : r.counters) names.insert(name);
  Dataset d;
  d.feature_names.assign(names.begin(), names.end());
  for (const RawRecord& r : records) {
    std::vector<double> row;
    row.reserve(d.feature_names.size());
    for (const std::string& n : d.feature_names) {
      auto it = r.counters.find(n);
      row.push_back(it == r.counters.end()
                        ? std::numeric_limits<double>::quiet_NaN()
                        : it->second);
    }
    d.features.push_back(std::move(row));
    d.target.push_back(r.energy ? *r.energy
                                : std::numeric_limits<double>::quiet_NaN());
    d.timestamps.push_back(r.timestamp);
  }
  // per-column forward fill
  for (std::size_t c = 0; c < d.feature_count(); ++c) {
    std::vector<double> col(d.rows());
    for (std::size_t i = 0; i < d.rows(); ++i) col[i] = d.features[i][c];
    forward_fill(col);
    for (std::size_t i = 0; i < d.rows(); ++i) d.features[i][c] = col[i];
  }
  forward_fill(d.target);
  return d;
}

std::vector<RawRecord> read_records_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read CSV file: " + path);
  std::string line;
  if (!std::getline(f, line))
    throw std::runtime_error("empty CSV file: " + path);
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
    if (!s.empty() && s.back() == ',') out.push_back("");
    return out;
  };
  std::vector<std::string> header = split(line);
  if (header.size() < 5 || header[0] != "timestamp" || header[1] != "site_id" ||
      header[2] != "cell_id" || header[3] != "unit_id")
    throw std::runtime_error(
        "CSV header must start with timestamp,site_id,cell_id,unit_id: " + path);
  bool has_energy = header.back() == "energy_joules";
  std::size_t counter_end = has_energy ? header.size() - 1 : header.size();

  std::vector<RawRecord> out;
  std::size_t lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells = split(line);
    if (cells.size() != header.size())
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": wrong field count");
    RawRecord r;
    r.timestamp = std::stoll(cells[0]);
    r.site_id = cells[1];
    r.cell_id = cells[2];
    r.unit_id = cells[3];
    for (std::size_t i = 4; i < counter_end; ++i)
      r.counters[header[i]] =
          cells[i].empty() ? std::numeric_limits<double>::quiet_NaN()
                           : std::stod(cells[i]);
    if (has_energy && !cells.back().empty())
      r.energy = std::stod(cells.back());
    out.push_back(std::move(r));
  }
  return out;
}

void write_records_csv(const std::string& path,
                       const std::vector<RawRecord>& records) {
  if (records.empty()) throw std::invalid_argument("write_records_csv: no records");
  std::set<std::string> names;
  for (const RawRecord& r : records)
    for (const auto& [n, v] : r.counters) names.insert(n);
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write CSV file: " + path);
  f.precision(17);
  f << "timestamp,site_id,cell_id,unit_id";
  for (const auto& n : names) f << ',' << n;
  f << ",energy_joules\n";
  for (const RawRecord& r : records) {
    f << r.timestamp << ',' << r.site_id << ',' << r.cell_id << ',' << r.unit_id;
    for (const auto& n : names) {
      f << ',';
      auto it = r.counters.find(n);
      if (it != r.counters.end() && !std::isnan(it->second)) f << it->second;
    }
    f << ',';
    if (r.energy) f << *r.energy;
    f << '\n';
  }
}

}  // namespace ltcnet
