#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ltcnet/dataset.hpp"
#include "ltcnet/metrics.hpp"
#include "ltcnet/model.hpp"
#include "ltcnet/robustness.hpp"
#include "ltcnet/synth.hpp"
#include "ltcnet/trainer.hpp"

namespace ltcnet {

// One grid sweep: dataset source, model/epoch/seed cross-product,
// perturbation grids, output directory. Serializable and hashable so a
// (config, seed) pair uniquely keys every run artifact.
struct ExperimentConfig {
  std::string dataset_path;                 // packaged container, xor:
  std::optional<SynthSpec> synthetic;
  double train_frac = 0.65, test_frac = 0.30;

  std::vector<std::string> model_kinds{"ncp", "lstm"};
  std::vector<std::size_t> neuron_counts{16, 32, 64, 96};
  std::vector<std::size_t> epoch_budgets{50, 100, 200, 400};
  bool include_overtraining = false;  // adds the 800-epoch, 16-neuron cell
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  double learning_rate = 0.005;
  std::size_t truncation_len = 32;

  std::vector<PerturbationSpec> perturbations;

  std::string output_dir = "runs";
  std::size_t workers = 1;
  bool save_checkpoints = true;

  std::string to_json() const;
  static ExperimentConfig from_json(const std::string& text);
  static ExperimentConfig from_json_file(const std::string& path);
  // Hash over run-identity fields only (output_dir/workers excluded).
  std::string hash() const;

  struct Cell {
    std::string kind;
    std::size_t neurons = 0;
    std::size_t epochs = 0;
    std::uint64_t seed = 0;
  };
  std::vector<Cell> grid() const;
  std::string run_key(const Cell& cell, const std::string& perturbation) const;
};

// Perturb the test split (noise on features, drift on the label by
// default) and record the induced shift as a KS statistic between the
// original and perturbed test data.
Dataset apply_perturbation(const Dataset& ds, const PerturbationSpec& spec);

EvalReport evaluate_model(const Model& model, const Dataset& ds,
                          const ExperimentConfig::Cell& cell,
                          const std::string& cfg_hash, double wall_seconds,
                          std::size_t train_rows, double final_train_loss);

// Train one grid cell on the (clean) dataset and return the clean-test
// report; out_dir non-empty enables the run-key cache and checkpoints.
EvalReport run_cell(const Dataset& ds, const ExperimentConfig& cfg,
                    const ExperimentConfig::Cell& cell);

// Full cross-product, resumable via per-run report files, optionally
// parallel across cells. Returns all report rows (clean + perturbed).
std::vector<EvalReport> run_sweep(const ExperimentConfig& cfg,
                                  const Dataset& ds);

void write_reports_csv(const std::vector<EvalReport>& reports,
                       const std::string& path);
// Mean and 5th/95th-percentile bounds of r2/mse/tail over seeds, one row
// per (model, neurons, epochs, perturbation).
void write_aggregate_csv(const std::vector<EvalReport>& reports,
                         const std::string& path);

struct PreprocessOptions {
  double train_frac = 0.65, test_frac = 0.30;
  std::vector<std::size_t> k_candidates{2, 3, 4, 5, 6};
  std::optional<std::size_t> forced_k;  // mirror the reference five clusters
  std::uint64_t seed = 0;
};

struct PreprocessResult {
  Dataset dataset;                    // scaled + split, low-drift site
  std::string chosen_site;
  std::size_t cluster_count = 0;
  std::vector<std::string> low_drift_sites;
  std::vector<std::string> warnings;
};

// Ingest per-site CSVs: aggregate cells to radio units, forward-fill,
// cluster sites by drift summaries, keep the lowest-drift cluster, build
// the dataset from its largest site, scale and split.
PreprocessResult preprocess_csv_dir(const std::string& dir,
                                    const PreprocessOptions& opts);

Dataset load_or_synthesize(const ExperimentConfig& cfg);

}  // namespace ltcnet
