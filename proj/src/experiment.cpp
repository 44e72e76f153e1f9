#include "ltcnet/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <limits>
#include <tuple>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "ltcnet/accounting.hpp"
#include "ltcnet/checkpoint.hpp"
#include "ltcnet/kmeans.hpp"
#include "ltcnet/wiring.hpp"

namespace fs = std::filesystem;

namespace ltcnet {

namespace {

nlohmann::json perturbation_to_json(const PerturbationSpec& p) {
  return {{"kind", p.kind == PerturbKind::kNoise ? "noise" : "drift"},
          {"epsilon", p.epsilon},
          {"target", p.target == PerturbTarget::kFeatures ? "features" : "label"},
          {"seed", p.seed}};
}

PerturbationSpec perturbation_from_json(const nlohmann::json& j) {
  PerturbationSpec p;
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "noise") p.kind = PerturbKind::kNoise;
  else if (kind == "drift") p.kind = PerturbKind::kDrift;
  else throw std::runtime_error("config: perturbation kind must be noise|drift");
  p.epsilon = j.at("epsilon").get<double>();
  std::string target = j.value("target", kind == "noise" ? "features" : "label");
  if (target == "features") p.target = PerturbTarget::kFeatures;
  else if (target == "label") p.target = PerturbTarget::kLabel;
  else throw std::runtime_error("config: perturbation target must be features|label");
  p.seed = j.value("seed", std::uint64_t{0});
  return p;
}

nlohmann::json synth_to_json(const SynthSpec& s) {
  return {{"seed", s.seed},         {"rows", s.rows},
          {"features", s.features}, {"noise_std", s.noise_std},
          {"hetero", s.hetero},     {"trend", s.trend},
          {"feature_noise", s.feature_noise}};
}

SynthSpec synth_from_json(const nlohmann::json& j) {
  SynthSpec s;
  s.seed = j.value("seed", s.seed);
  s.rows = j.value("rows", s.rows);
  s.features = j.value("features", s.features);
  s.noise_std = j.value("noise_std", s.noise_std);
  s.hetero = j.value("hetero", s.hetero);
  s.trend = j.value("trend", s.trend);
  s.feature_noise = j.value("feature_noise", s.feature_noise);
  return s;
}

nlohmann::json identity_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["dataset_path"] = c.dataset_path;
  if (c.synthetic) j["synthetic"] = synth_to_json(*c.synthetic);
  j["train_frac"] = c.train_frac;
  j["test_frac"] = c.test_frac;
  j["model_kinds"] = c.model_kinds;
  j["neuron_counts"] = c.neuron_counts;
  j["epoch_budgets"] = c.epoch_budgets;
  j["include_overtraining"] = c.include_overtraining;
  j["seeds"] = c.seeds;
  j["learning_rate"] = c.learning_rate;
  j["truncation_len"] = c.truncation_len;
  j["perturbations"] = nlohmann::json::array();
  for (const auto& p : c.perturbations)
    j["perturbations"].push_back(perturbation_to_json(p));
  return j;
}

}  // namespace

std::string ExperimentConfig::to_json() const {
  nlohmann::json j = identity_json(*this);
  j["output_dir"] = output_dir;
  j["workers"] = workers;
  j["save_checkpoints"] = save_checkpoints;
  return j.dump(2);
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(std::string("config: invalid JSON: ") + e.what());
  }
  ExperimentConfig c;
  c.dataset_path = j.value("dataset_path", std::string());
  if (j.contains("synthetic")) c.synthetic = synth_from_json(j["synthetic"]);
  c.train_frac = j.value("train_frac", c.train_frac);
  c.test_frac = j.value("test_frac", c.test_frac);
  if (c.train_frac <= 0.0 || c.test_frac <= 0.0 ||
      c.train_frac + c.test_frac > 1.0)
    throw std::runtime_error(
        "config: train_frac/test_frac must be positive and sum to <= 1");
  if (j.contains("model_kinds"))
    c.model_kinds = j["model_kinds"].get<std::vector<std::string>>();
  for (const auto& k : c.model_kinds)
    if (k != "ncp" && k != "lstm")
      throw std::runtime_error("config: model_kinds entries must be ncp|lstm, got '" + k + "'");
  if (j.contains("neuron_counts"))
    c.neuron_counts = j["neuron_counts"].get<std::vector<std::size_t>>();
  if (j.contains("epoch_budgets"))
    c.epoch_budgets = j["epoch_budgets"].get<std::vector<std::size_t>>();
  c.include_overtraining = j.value("include_overtraining", false);
  if (j.contains("seeds"))
    c.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
  if (c.model_kinds.empty() || c.neuron_counts.empty() ||
      c.epoch_budgets.empty() || c.seeds.empty())
    throw std::runtime_error("config: grid axes must be non-empty");
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  if (c.learning_rate <= 0.0)
    throw std::runtime_error("config: learning_rate must be > 0");
  c.truncation_len = j.value("truncation_len", c.truncation_len);
  if (j.contains("perturbations"))
    for (const auto& p : j["perturbations"])
      c.perturbations.push_back(perturbation_from_json(p));
  c.output_dir = j.value("output_dir", c.output_dir);
  c.workers = j.value("workers", c.workers);
  c.save_checkpoints = j.value("save_checkpoints", c.save_checkpoints);
  if (c.dataset_path.empty() && !c.synthetic)
    throw std::runtime_error(
        "config: one of 'dataset_path' or 'synthetic' is required");
  return c;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("config: cannot read file " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return from_json(ss.str());
}

std::string ExperimentConfig::hash() const {
  return stable_hash(identity_json(*this).dump());
}

std::vector<ExperimentConfig::Cell> ExperimentConfig::grid() const {
  std::vector<Cell> cells;
  for (const auto& kind : model_kinds)
    for (std::size_t n : neuron_counts)
      for (std::size_t e : epoch_budgets)
        for (std::uint64_t s : seeds) cells.push_back({kind, n, e, s});
  if (include_overtraining)
    for (const auto& kind : model_kinds)
      for (std::uint64_t s : seeds) cells.push_back({kind, 16, 800, s});
  return cells;
}

std::string ExperimentConfig::run_key(const Cell& cell,
                                      const std::string& perturbation) const {
  std::ostringstream os;
  os << hash() << '|' << cell.kind << '|' << cell.neurons << '|' << cell.epochs
     << '|' << cell.seed << '|' << perturbation;
  return stable_hash(os.str());
}

Dataset apply_perturbation(const Dataset& ds, const PerturbationSpec& spec) {
  if (spec.epsilon < 0.0)
    throw std::invalid_argument("perturbation: epsilon must be >= 0");
  Dataset out = ds;
  std::size_t lo = ds.test_begin, hi = ds.rows();
  if (lo >= hi) throw std::invalid_argument("perturbation: empty test split");

  if (spec.target == PerturbTarget::kFeatures) {
    std::vector<std::vector<double>> test(out.features.begin() + lo,
                                          out.features.begin() + hi);
    if (spec.kind == PerturbKind::kNoise)
      add_noise(test, spec.epsilon, spec.seed);
    else
      add_drift(test, spec.epsilon);
    for (std::size_t r = 0; r < test.size(); ++r)
      out.features[lo + r] = test[r];
    // pooled feature values quantify the induced shift
    std::vector<double> before, after;
    for (std::size_t r = lo; r < hi; ++r)
      for (std::size_t c = 0; c < ds.feature_count(); ++c) {
        before.push_back(ds.features[r][c]);
        after.push_back(out.features[r][c]);
      }
    KsResult ks = ks_2samp(before, after);
    out.ks_statistic = ks.statistic;
    out.ks_p = ks.p_value;
  } else {
    std::vector<double> test(out.target.begin() + lo, out.target.begin() + hi);
    if (spec.kind == PerturbKind::kNoise)
      add_noise(test, spec.epsilon, spec.seed);
    else
      add_drift(test, spec.epsilon);
    for (std::size_t r = 0; r < test.size(); ++r) out.target[lo + r] = test[r];
    std::vector<double> before(ds.target.begin() + lo, ds.target.begin() + hi);
    KsResult ks = ks_2samp(before, test);
    out.ks_statistic = ks.statistic;
    out.ks_p = ks.p_value;
  }
  out.perturbation = spec.label();
  return out;
}

EvalReport evaluate_model(const Model& model, const Dataset& ds,
                          const ExperimentConfig::Cell& cell,
                          const std::string& cfg_hash, double wall_seconds,
                          std::size_t train_rows, double final_train_loss) {
  auto preds = model.predict(ds.test_features());
  auto actual = ds.test_target();
  EvalReport r;
  r.model_kind = cell.kind;
  r.neurons = cell.neurons;
  r.epochs = cell.epochs;
  r.seed = cell.seed;
  r.cfg_hash = cfg_hash;
  r.perturbation = ds.perturbation;
  r.r2 = r2_score(actual, preds);
  r.mse = mse(preds, actual);
  TailMse tail = tail_mse(actual, preds, 90.0);
  r.tail_mse_p90 = tail.value;
  r.n_test = actual.size();
  r.n_tail = tail.n_tail;
  r.param_count = model.param_scalar_count();
  r.flops_per_step = model.flops_per_step();
  CostLedger ledger = ledger_for(r.param_count, r.flops_per_step, train_rows,
                                 cell.epochs, wall_seconds);
  r.flops_total = ledger.flops_total;
  r.train_wall_seconds = wall_seconds;
  r.final_train_loss = final_train_loss;
  r.ks_statistic = ds.ks_statistic;
  r.ks_p = ds.ks_p;
  return r;
}

EvalReport run_cell(const Dataset& ds, const ExperimentConfig& cfg,
                    const ExperimentConfig::Cell& cell) {
  auto model = make_model(cell.kind, ds.feature_count(), cell.neurons, cell.seed);
  TrainConfig tc;
  tc.model_kind = cell.kind;
  tc.neuron_count = cell.neurons;
  tc.epochs = cell.epochs;
  tc.learning_rate = cfg.learning_rate;
  tc.seed = cell.seed;
  tc.truncation_len = cfg.truncation_len;
  TrainTrace trace = train(*model, ds, tc);
  EvalReport report =
      evaluate_model(*model, ds, cell, cfg.hash(), trace.total_wall_seconds,
                     ds.train_end, trace.epoch_loss.back());

  if (!cfg.output_dir.empty() && cfg.save_checkpoints) {
    fs::create_directories(cfg.output_dir);
    Checkpoint::from_model(*model, cell.seed, cfg.hash())
        .save(cfg.output_dir + "/ckpt_" + cfg.run_key(cell, "none") + ".json");
  }
  return report;
}

namespace {

EvalReport run_cell_cached(const Dataset& ds, const ExperimentConfig& cfg,
                           const ExperimentConfig::Cell& cell,
                           std::vector<EvalReport>& extra_rows) {
  auto report_path = [&cfg](const ExperimentConfig::Cell& c,
                            const std::string& pert) {
    return cfg.output_dir + "/report_" + cfg.run_key(c, pert) + ".json";
  };
  auto read_report = [](const std::string& path) {
    std::ifstream f(path);
    std::stringstream ss;
    ss << f.rdbuf();
    return EvalReport::from_json(ss.str());
  };
  std::string clean_path = report_path(cell, "none");
  std::string ckpt_path =
      cfg.output_dir + "/ckpt_" + cfg.run_key(cell, "none") + ".json";

  EvalReport clean;
  std::unique_ptr<Model> model;
  if (fs::exists(clean_path)) {
    clean = read_report(clean_path);
  } else {
    model = make_model(cell.kind, ds.feature_count(), cell.neurons, cell.seed);
    TrainConfig tc;
    tc.model_kind = cell.kind;
    tc.neuron_count = cell.neurons;
    tc.epochs = cell.epochs;
    tc.learning_rate = cfg.learning_rate;
    tc.seed = cell.seed;
    tc.truncation_len = cfg.truncation_len;
    TrainTrace trace = train(*model, ds, tc);
    clean =
        evaluate_model(*model, ds, cell, cfg.hash(), trace.total_wall_seconds,
                       ds.train_end, trace.epoch_loss.back());
    fs::create_directories(cfg.output_dir);
    std::ofstream(clean_path) << clean.to_json() << '\n';
    if (cfg.save_checkpoints)
      Checkpoint::from_model(*model, cell.seed, cfg.hash()).save(ckpt_path);
  }

  for (const auto& pert : cfg.perturbations) {
    std::string ppath = report_path(cell, pert.label());
    if (fs::exists(ppath)) {
      extra_rows.push_back(read_report(ppath));
      continue;
    }
    if (!model) {
      if (!fs::exists(ckpt_path))
        throw std::runtime_error(
            "sweep: cached report without checkpoint, cannot run perturbation "
            "for " + ppath);
      model = Checkpoint::load(ckpt_path).restore();
    }
    Dataset perturbed = apply_perturbation(ds, pert);
    EvalReport pr =
        evaluate_model(*model, perturbed, cell, cfg.hash(),
                       clean.train_wall_seconds, ds.train_end,
                       clean.final_train_loss);
    std::ofstream(ppath) << pr.to_json() << '\n';
    extra_rows.push_back(std::move(pr));
  }
  return clean;
}

}  // namespace

std::vector<EvalReport> run_sweep(const ExperimentConfig& cfg,
                                  const Dataset& ds) {
  auto cells = cfg.grid();
  fs::create_directories(cfg.output_dir);
  std::vector<EvalReport> reports;
  std::mutex mu;
  std::size_t workers = std::max<std::size_t>(1, cfg.workers);
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr first_error;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= cells.size()) return;
        try {
          std::vector<EvalReport> extra;
          EvalReport clean = run_cell_cached(ds, cfg, cells[i], extra);
          std::lock_guard<std::mutex> lk(mu);
          reports.push_back(std::move(clean));
          for (auto& r : extra) reports.push_back(std::move(r));
        } catch (...) {
          std::lock_guard<std::mutex> lk(mu);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);

  // deterministic ordering regardless of scheduling
  std::sort(reports.begin(), reports.end(), [](const EvalReport& a,
                                               const EvalReport& b) {
    return std::tie(a.model_kind, a.neurons, a.epochs, a.seed, a.perturbation) <
           std::tie(b.model_kind, b.neurons, b.epochs, b.seed, b.perturbation);
  });
  return reports;
}

void write_reports_csv(const std::vector<EvalReport>& reports,
                       const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << EvalReport::csv_header() << '\n';
  for (const auto& r : reports) f << r.csv_row() << '\n';
}

void write_aggregate_csv(const std::vector<EvalReport>& reports,
                         const std::string& path) {
  std::map<std::tuple<std::string, std::size_t, std::size_t, std::string>,
           std::vector<const EvalReport*>>
      groups;
  for (const auto& r : reports)
    groups[{r.model_kind, r.neurons, r.epochs, r.perturbation}].push_back(&r);

  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f.precision(17);
  f << "model,neurons,epochs,perturbation,n_seeds,"
       "r2_mean,r2_p05,r2_p95,mse_mean,tail_mse_mean,tail_mse_p05,tail_mse_p95,"
       "params,flops_total_mean\n";
  for (const auto& [key, rows] : groups) {
    auto pick = [&rows](auto get) {
      std::vector<double> v;
      for (const auto* r : rows) v.push_back(get(*r));
      return v;
    };
    auto mean_of = [](const std::vector<double>& v) {
      double s = 0.0;
      for (double x : v) s += x;
      return s / static_cast<double>(v.size());
    };
    std::vector<double> r2s = pick([](const EvalReport& r) { return r.r2; });
    std::vector<double> mses = pick([](const EvalReport& r) { return r.mse; });
    std::vector<double> tails =
        pick([](const EvalReport& r) { return r.tail_mse_p90; });
    std::vector<double> flops =
        pick([](const EvalReport& r) { return static_cast<double>(r.flops_total); });
    f << std::get<0>(key) << ',' << std::get<1>(key) << ',' << std::get<2>(key)
      << ',' << std::get<3>(key) << ',' << rows.size() << ','
      << mean_of(r2s) << ',' << quantile(r2s, 5.0) << ',' << quantile(r2s, 95.0)
      << ',' << mean_of(mses) << ',' << mean_of(tails) << ','
      << quantile(tails, 5.0) << ',' << quantile(tails, 95.0) << ','
      << rows.front()->param_count << ',' << mean_of(flops) << '\n';
  }
}

PreprocessResult preprocess_csv_dir(const std::string& dir,
                                    const PreprocessOptions& opts) {
  std::vector<std::string> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".csv") files.push_back(e.path().string());
  std::sort(files.begin(), files.end());
  if (files.empty())
    throw std::runtime_error("preprocess: no CSV files in " + dir);

  struct SiteData {
    std::string site;
    Dataset ds;  // unscaled, per largest unit of the site
    std::vector<double> summary;
  };
  std::vector<SiteData> sites;
  for (const auto& file : files) {
    auto records = aggregate_by_unit(read_records_csv(file));
    // keep the unit with the most records, mirroring the single-radio-type
    // filtering of the reference pipeline
    std::map<std::pair<std::string, std::string>, std::vector<RawRecord>> units;
    for (auto& r : records) units[{r.site_id, r.unit_id}].push_back(r);
    auto best = std::max_element(
        units.begin(), units.end(),
        [](const auto& a, const auto& b) { return a.second.size() < b.second.size(); });
    auto unit_records = best->second;
    std::sort(unit_records.begin(), unit_records.end(),
              [](const RawRecord& a, const RawRecord& b) {
                return a.timestamp < b.timestamp;
              });
    SiteData s;
    s.site = best->first.first;
    s.ds = dataset_from_records(unit_records);
    // drift summary: split-half energy level shift and dispersion
    const auto& y = s.ds.target;
    std::size_t half = y.size() / 2;
    auto stats = [](const double* p, std::size_t n) {
      double m = 0.0;
      for (std::size_t i = 0; i < n; ++i) m += p[i];
      m /= static_cast<double>(n);
      double v = 0.0;
      for (std::size_t i = 0; i < n; ++i) v += (p[i] - m) * (p[i] - m);
      return std::pair<double, double>{m, std::sqrt(v / n)};
    };
    auto [m1, s1] = stats(y.data(), half);
    auto [m2, s2] = stats(y.data() + half, y.size() - half);
    double pooled = std::max(1e-12, 0.5 * (s1 + s2));
    s.summary = {std::abs(m2 - m1) / pooled, (s2 - s1) / pooled};
    sites.push_back(std::move(s));
  }

  PreprocessResult out;
  if (sites.size() == 1) {
    out.chosen_site = sites[0].site;
    out.cluster_count = 1;
    out.low_drift_sites = {sites[0].site};
    out.dataset = std::move(sites[0].ds);
  } else {
    std::vector<std::vector<double>> points;
    for (const auto& s : sites) points.push_back(s.summary);
    std::vector<std::size_t> candidates;
    for (std::size_t k : opts.k_candidates)
      if (k <= points.size()) candidates.push_back(k);
    KmeansResult km = opts.forced_k
                          ? kmeans_fixed(points, std::min(*opts.forced_k,
                                                          points.size()),
                                         opts.seed)
                          : kmeans_cluster(points, candidates, opts.seed);
    // lowest mean drift magnitude wins
    std::vector<double> drift(km.k, 0.0);
    std::vector<std::size_t> counts(km.k, 0);
    for (std::size_t i = 0; i < sites.size(); ++i) {
      drift[km.assignment[i]] += sites[i].summary[0];
      ++counts[km.assignment[i]];
    }
    std::size_t best_c = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < km.k; ++c) {
      if (counts[c] == 0) continue;
      double d = drift[c] / static_cast<double>(counts[c]);
      if (d < best_d) { best_d = d; best_c = c; }
    }
    out.cluster_count = km.k;
    std::size_t chosen = sites.size();
    for (std::size_t i = 0; i < sites.size(); ++i) {
      if (km.assignment[i] != best_c) continue;
      out.low_drift_sites.push_back(sites[i].site);
      if (chosen == sites.size() ||
          sites[i].ds.rows() > sites[chosen].ds.rows())
        chosen = i;
    }
    out.chosen_site = sites[chosen].site;
    out.dataset = std::move(sites[chosen].ds);
  }
  chrono_split(out.dataset, opts.train_frac, opts.test_frac);
  out.warnings = fit_scale(out.dataset, opts.train_frac);
  return out;
}

Dataset load_or_synthesize(const ExperimentConfig& cfg) {
  if (!cfg.dataset_path.empty()) return Dataset::load(cfg.dataset_path);
  if (!cfg.synthetic)
    throw std::runtime_error(
        "config: one of 'dataset_path' or 'synthetic' is required");
  Dataset ds = synth_generate(*cfg.synthetic);
  chrono_split(ds, cfg.train_frac, cfg.test_frac);
  fit_scale(ds, cfg.train_frac);
  return ds;
}

}  // namespace ltcnet
