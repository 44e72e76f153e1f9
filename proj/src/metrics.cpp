#include "ltcnet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace ltcnet {

double mse(const std::vector<double>& pred, const std::vector<double>& actual) {
  if (pred.empty() || pred.size() != actual.size())
    throw std::invalid_argument("mse: inputs must be non-empty and equal length");
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    double r = pred[i] - actual[i];
    acc += r * r;
  }
  return acc / static_cast<double>(pred.size());
}

double r2_score(const std::vector<double>& actual,
                const std::vector<double>& pred) {
  if (actual.size() < 2 || actual.size() != pred.size())
    throw std::invalid_argument("r2_score: need >= 2 samples of equal length");
  double mean = 0.0;
  for (double a : actual) mean += a;
  mean /= static_cast<double>(actual.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    double r = actual[i] - pred[i];
    double d = actual[i] - mean;
    ss_res += r * r;
    ss_tot += d * d;
  }
  if (ss_tot == 0.0)
    throw std::invalid_argument("r2_score: actual is constant, SS_tot is zero");
  return 1.0 - ss_res / ss_tot;
}

double quantile(std::vector<double> data, double percentile) {
  if (data.empty()) throw std::invalid_argument("quantile: empty data");
  std::sort(data.begin(), data.end());
  double h = (static_cast<double>(data.size()) - 1.0) * percentile / 100.0;
  std::size_t lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= data.size()) return data.back();
  return data[lo] + (h - std::floor(h)) * (data[lo + 1] - data[lo]);
}

TailMse tail_mse(const std::vector<double>& actual,
                 const std::vector<double>& pred, double percentile) {
  if (actual.size() < 10 || actual.size() != pred.size())
    throw std::invalid_argument("tail_mse: need >= 10 samples of equal length");
  TailMse out;
  out.threshold = quantile(actual, percentile);
  double acc = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    if (actual[i] >= out.threshold) {
      double r = pred[i] - actual[i];
      acc += r * r;
      ++out.n_tail;
    }
  }
  out.value = acc / static_cast<double>(out.n_tail);
  return out;
}

std::string EvalReport::to_json() const {
  nlohmann::json j;
  j["model_kind"] = model_kind;
  j["neurons"] = neurons;
  j["epochs"] = epochs;
  j["seed"] = seed;
  j["cfg_hash"] = cfg_hash;
  j["perturbation"] = perturbation;
  j["r2"] = r2;
  j["mse"] = mse;
  j["tail_mse_p90"] = tail_mse_p90;
  j["n_test"] = n_test;
  j["n_tail"] = n_tail;
  j["param_count"] = param_count;
  j["flops_per_step"] = flops_per_step;
  j["flops_total"] = flops_total;
  j["train_wall_seconds"] = train_wall_seconds;
  j["final_train_loss"] = final_train_loss;
  if (ks_statistic) j["ks_statistic"] = *ks_statistic;
  if (ks_p) j["ks_p"] = *ks_p;
  if (train_energy_joules) j["train_energy_joules"] = *train_energy_joules;
  return j.dump(2);
}

EvalReport EvalReport::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  EvalReport r;
  r.model_kind = j.at("model_kind").get<std::string>();
  r.neurons = j.at("neurons").get<std::size_t>();
  r.epochs = j.at("epochs").get<std::size_t>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.cfg_hash = j.at("cfg_hash").get<std::string>();
  r.perturbation = j.value("perturbation", std::string("none"));
  r.r2 = j.at("r2").get<double>();
  r.mse = j.at("mse").get<double>();
  r.tail_mse_p90 = j.at("tail_mse_p90").get<double>();
  r.n_test = j.at("n_test").get<std::size_t>();
  r.n_tail = j.at("n_tail").get<std::size_t>();
  r.param_count = j.at("param_count").get<std::size_t>();
  r.flops_per_step = j.at("flops_per_step").get<std::size_t>();
  r.flops_total = j.at("flops_total").get<std::uint64_t>();
  r.train_wall_seconds = j.at("train_wall_seconds").get<double>();
  r.final_train_loss = j.value("final_train_loss", 0.0);
  if (j.contains("ks_statistic")) r.ks_statistic = j["ks_statistic"].get<double>();
  if (j.contains("ks_p")) r.ks_p = j["ks_p"].get<double>();
  if (j.contains("train_energy_joules"))
    r.train_energy_joules = j["train_energy_joules"].get<double>();
  return r;
}

std::string EvalReport::csv_header() {
  return "model,neurons,epochs,seed,perturbation,r2,mse,tail_mse_p90,"
         "params,flops_total,wall_seconds,ks_statistic,ks_p";
}

std::string EvalReport::csv_row() const {
  std::ostringstream os;
  os.precision(17);
  os << model_kind << ',' << neurons << ',' << epochs << ',' << seed << ','
     << perturbation << ',' << r2 << ',' << mse << ',' << tail_mse_p90 << ','
     << param_count << ',' << flops_total << ',' << train_wall_seconds << ',';
  if (ks_statistic) os << *ks_statistic;
  os << ',';
  if (ks_p) os << *ks_p;
  return os.str();
}

}  // namespace ltcnet
