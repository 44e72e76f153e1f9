#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ltcnet/checkpoint.hpp"
#include "ltcnet/experiment.hpp"
#include "ltcnet/trainer.hpp"

using namespace ltcnet;
namespace fs = std::filesystem;

namespace {

// 0 success, 2 config/usage errors, 3 runtime failures, 4 numerical aborts
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;
constexpr int kExitNumerical = 4;

Dataset load_dataset(const std::string& path) {
  if (!fs::exists(path))
    throw std::invalid_argument("dataset file not found: " + path);
  return Dataset::load(path);
}

void require_split(const Dataset& ds) {
  if (!ds.scaled || ds.train_end == 0)
    throw std::invalid_argument(
        "dataset is not preprocessed (run `preprocess` to scale and split it)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse continuous-time vs LSTM energy-model harness"};
  app.require_subcommand(1);

  // ---- synth ----------------------------------------------------------
  auto* synth = app.add_subcommand(
      "synth", "Generate the synthetic counter/energy dataset");
  SynthSpec synth_spec;
  std::string synth_out = "dataset.json";
  std::string synth_csv_dir;
  std::size_t synth_sites = 6;
  synth->add_option("--seed", synth_spec.seed, "RNG seed");
  synth->add_option("--rows", synth_spec.rows, "15-minute bins to generate");
  synth->add_option("--features", synth_spec.features, "counter columns");
  synth->add_option("--noise-std", synth_spec.noise_std,
                    "target noise level (r2 ceiling = 1/(1+s^2))");
  synth->add_option("--hetero", synth_spec.hetero,
                    "heteroscedastic fraction of the noise");
  synth->add_option("--trend", synth_spec.trend, "slow trend amplitude");
  synth->add_option("--feature-noise", synth_spec.feature_noise,
                    "per-feature additive noise");
  synth->add_option("--out", synth_out, "dataset container path");
  synth->add_option("--emit-csv", synth_csv_dir,
                    "also write per-site raw CSVs into this directory");
  synth->add_option("--sites", synth_sites, "site count for --emit-csv");

  // ---- preprocess -----------------------------------------------------
  auto* pre = app.add_subcommand(
      "preprocess", "Ingest raw CSVs (or split/scale a container)");
  std::string pre_csv_dir, pre_dataset, pre_out = "dataset.json";
  PreprocessOptions pre_opts;
  pre->add_option("--csv-dir", pre_csv_dir, "directory of per-site raw CSVs");
  pre->add_option("--dataset", pre_dataset,
                  "dataset container to split and scale instead");
  pre->add_option("--train-frac", pre_opts.train_frac, "train fraction");
  pre->add_option("--test-frac", pre_opts.test_frac, "test fraction");
  pre->add_option("--k-candidates", pre_opts.k_candidates,
                  "cluster counts to try");
  std::size_t pre_forced_k = 0;
  pre->add_option("--forced-k", pre_forced_k, "force this cluster count");
  pre->add_option("--seed", pre_opts.seed, "clustering seed");
  pre->add_option("--out", pre_out, "output dataset container");

  // ---- train ----------------------------------------------------------
  auto* tr = app.add_subcommand("train", "Train one model on a dataset");
  std::string tr_dataset, tr_ckpt = "checkpoint.json";
  TrainConfig tr_cfg;
  tr->add_option("--dataset", tr_dataset, "preprocessed dataset container")
      ->required();
  tr->add_option("--model", tr_cfg.model_kind, "ncp or lstm");
  tr->add_option("--neurons", tr_cfg.neuron_count, "size knob");
  tr->add_option("--epochs", tr_cfg.epochs, "training epochs");
  tr->add_option("--lr", tr_cfg.learning_rate, "Adam learning rate");
  tr->add_option("--seed", tr_cfg.seed, "init/train seed");
  tr->add_option("--truncation", tr_cfg.truncation_len, "BPTT window length");
  double tr_clip = -1.0;
  tr->add_option("--clip-norm", tr_clip,
                 "gradient clip (default: 1.0 for lstm, off for ncp)");
  tr->add_option("--out", tr_ckpt, "checkpoint path");

  // ---- evaluate -------------------------------------------------------
  auto* ev = app.add_subcommand("evaluate",
                                "Evaluate a checkpoint on a dataset's test split");
  std::string ev_dataset, ev_ckpt, ev_out;
  std::size_t ev_epochs = 0;
  ev->add_option("--dataset", ev_dataset, "preprocessed dataset container")
      ->required();
  ev->add_option("--checkpoint", ev_ckpt, "trained checkpoint")->required();
  ev->add_option("--epochs", ev_epochs,
                 "epochs the checkpoint was trained for (flop accounting)");
  ev->add_option("--out", ev_out, "write the report JSON here too");

  // ---- perturb --------------------------------------------------------
  auto* pb = app.add_subcommand("perturb",
                                "Perturb a dataset's test split (noise/drift)");
  std::string pb_dataset, pb_out = "perturbed.json", pb_kind = "noise";
  std::string pb_target;
  PerturbationSpec pb_spec;
  pb->add_option("--dataset", pb_dataset, "preprocessed dataset container")
      ->required();
  pb->add_option("--kind", pb_kind, "noise or drift");
  pb->add_option("--epsilon", pb_spec.epsilon, "perturbation strength")
      ->required();
  pb->add_option("--target", pb_target,
                 "features or label (default: features for noise, label for drift)");
  pb->add_option("--seed", pb_spec.seed, "noise seed");
  pb->add_option("--out", pb_out, "output dataset container");

  // ---- sweep ----------------------------------------------------------
  auto* sw = app.add_subcommand("sweep", "Run the configured model grid");
  std::string sw_config;
  std::size_t sw_workers = 0;
  sw->add_option("--config", sw_config, "experiment config JSON")->required();
  sw->add_option("--workers", sw_workers, "override worker count");

  // ---- report ---------------------------------------------------------
  auto* rp = app.add_subcommand(
      "report", "Collect cached run reports into plot-ready CSVs");
  std::string rp_dir, rp_out_rows = "reports.csv", rp_out_agg = "aggregate.csv";
  rp->add_option("--runs", rp_dir, "sweep output directory")->required();
  rp->add_option("--out", rp_out_rows, "per-run CSV path");
  rp->add_option("--aggregate", rp_out_agg, "per-cell aggregate CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : kExitConfig;
  }

  try {
    if (*synth) {
      Dataset ds = synth_generate(synth_spec);
      ds.save(synth_out);
      std::printf("wrote %s (%zu rows, %zu features)\n", synth_out.c_str(),
                  ds.rows(), ds.feature_count());
      if (!synth_csv_dir.empty()) {
        synth_emit_csv(synth_spec, synth_csv_dir, synth_sites);
        std::printf("wrote raw CSVs for %zu sites under %s/\n", synth_sites,
                    synth_csv_dir.c_str());
      }
      return 0;
    }

    if (*pre) {
      if (pre_csv_dir.empty() == pre_dataset.empty())
        throw std::invalid_argument(
            "preprocess: pass exactly one of --csv-dir or --dataset");
      if (pre_forced_k > 0) pre_opts.forced_k = pre_forced_k;
      Dataset out;
      if (!pre_csv_dir.empty()) {
        PreprocessResult res = preprocess_csv_dir(pre_csv_dir, pre_opts);
        for (const auto& w : res.warnings)
          std::fprintf(stderr, "warning: %s\n", w.c_str());
        std::printf("clusters: %zu, chosen site: %s (of %zu low-drift sites)\n",
                    res.cluster_count, res.chosen_site.c_str(),
                    res.low_drift_sites.size());
        out = std::move(res.dataset);
      } else {
        out = load_dataset(pre_dataset);
        chrono_split(out, pre_opts.train_frac, pre_opts.test_frac);
        for (const auto& w : fit_scale(out, pre_opts.train_frac))
          std::fprintf(stderr, "warning: %s\n", w.c_str());
      }
      out.save(pre_out);
      std::printf("wrote %s (train %zu, test %zu rows)\n", pre_out.c_str(),
                  out.train_end, out.rows() - out.test_begin);
      return 0;
    }

    if (*tr) {
      Dataset ds = load_dataset(tr_dataset);
      require_split(ds);
      if (tr_cfg.model_kind != "ncp" && tr_cfg.model_kind != "lstm")
        throw std::invalid_argument("train: --model must be ncp or lstm");
      if (tr_clip >= 0.0) tr_cfg.clip_norm = tr_clip;
      auto model = make_model(tr_cfg.model_kind, ds.feature_count(),
                              tr_cfg.neuron_count, tr_cfg.seed);
      TrainTrace trace = train(*model, ds, tr_cfg);
      std::ostringstream id;
      id << tr_cfg.model_kind << '|' << tr_cfg.neuron_count << '|'
         << tr_cfg.epochs << '|' << tr_cfg.learning_rate << '|'
         << tr_cfg.truncation_len;
      Checkpoint::from_model(*model, tr_cfg.seed, stable_hash(id.str()))
          .save(tr_ckpt);
      std::printf("final train loss %.6f over %zu epochs (%.1fs); wrote %s\n",
                  trace.epoch_loss.back(), trace.epoch_loss.size(),
                  trace.total_wall_seconds, tr_ckpt.c_str());
      return 0;
    }

    if (*ev) {
      Dataset ds = load_dataset(ev_dataset);
      require_split(ds);
      Checkpoint ck = Checkpoint::load(ev_ckpt);
      auto model = ck.restore();
      ExperimentConfig::Cell cell{ck.model_kind, ck.neurons, ev_epochs,
                                  ck.seed};
      EvalReport report = evaluate_model(*model, ds, cell, ck.cfg_hash, 0.0,
                                         ds.train_end, 0.0);
      std::string json = report.to_json();
      std::printf("%s\n", json.c_str());
      if (!ev_out.empty()) std::ofstream(ev_out) << json << '\n';
      return 0;
    }

    if (*pb) {
      Dataset ds = load_dataset(pb_dataset);
      require_split(ds);
      if (pb_kind == "noise")
        pb_spec.kind = PerturbKind::kNoise;
      else if (pb_kind == "drift")
        pb_spec.kind = PerturbKind::kDrift;
      else
        throw std::invalid_argument("perturb: --kind must be noise or drift");
      if (pb_target.empty())
        pb_spec.target = pb_spec.kind == PerturbKind::kNoise
                             ? PerturbTarget::kFeatures
                             : PerturbTarget::kLabel;
      else if (pb_target == "features")
        pb_spec.target = PerturbTarget::kFeatures;
      else if (pb_target == "label")
        pb_spec.target = PerturbTarget::kLabel;
      else
        throw std::invalid_argument(
            "perturb: --target must be features or label");
      Dataset out = apply_perturbation(ds, pb_spec);
      out.save(pb_out);
      std::printf("wrote %s (%s, KS D = %.6f, p = %.3g)\n", pb_out.c_str(),
                  out.perturbation.c_str(), *out.ks_statistic, *out.ks_p);
      return 0;
    }

    if (*sw) {
      ExperimentConfig cfg;
      try {
        cfg = ExperimentConfig::from_json_file(sw_config);
      } catch (const std::exception& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
      }
      if (sw_workers > 0) cfg.workers = sw_workers;
      Dataset ds = load_or_synthesize(cfg);
      std::vector<EvalReport> reports = run_sweep(cfg, ds);
      fs::create_directories(cfg.output_dir);
      write_reports_csv(reports, cfg.output_dir + "/reports.csv");
      write_aggregate_csv(reports, cfg.output_dir + "/aggregate.csv");
      std::printf("%zu report rows; wrote %s/reports.csv and aggregate.csv\n",
                  reports.size(), cfg.output_dir.c_str());
      return 0;
    }

    if (*rp) {
      if (!fs::is_directory(rp_dir))
        throw std::invalid_argument("report: not a directory: " + rp_dir);
      std::vector<EvalReport> reports;
      std::vector<fs::path> files;
      for (const auto& entry : fs::directory_iterator(rp_dir)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("report_", 0) == 0 && entry.path().extension() == ".json")
          files.push_back(entry.path());
      }
      std::sort(files.begin(), files.end());
      for (const auto& f : files) {
        std::ifstream in(f);
        std::stringstream ss;
        ss << in.rdbuf();
        reports.push_back(EvalReport::from_json(ss.str()));
      }
      if (reports.empty())
        throw std::invalid_argument("report: no report_*.json under " + rp_dir);
      write_reports_csv(reports, rp_out_rows);
      write_aggregate_csv(reports, rp_out_agg);
      std::printf("%zu rows -> %s, aggregate -> %s\n", reports.size(),
                  rp_out_rows.c_str(), rp_out_agg.c_str());
      return 0;
    }
  } catch (const NumericalAbort& e) {
    std::fprintf(stderr, "numerical abort: %s\n", e.what());
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return 0;
}
