#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ltcnet/dataset.hpp"
#include "ltcnet/model.hpp"

namespace ltcnet {

struct TrainConfig {
  std::string model_kind = "ncp";
  std::size_t neuron_count = 16;
  std::size_t epochs = 100;
  double learning_rate = 0.005;
  std::uint64_t seed = 0;
  std::size_t truncation_len = 32;  // BPTT window, state carried across
  std::optional<double> clip_norm;  // defaults to 1.0 for lstm, off for ncp

  double effective_clip() const {
    if (clip_norm) return *clip_norm;
    return model_kind == "lstm" ? 1.0 : 0.0;  // 0 = no clipping
  }
};

struct TrainTrace {
  std::vector<double> epoch_loss;
  std::vector<double> epoch_wall_seconds;
  std::vector<double> epoch_test_r2;  // empty unless requested
  double total_wall_seconds = 0.0;
};

// Thrown when the training loss goes non-finite.
struct NumericalAbort : std::runtime_error {
  std::size_t epoch, window;
  double loss;
  NumericalAbort(std::size_t e, std::size_t w, double l)
      : std::runtime_error("non-finite training loss " + std::to_string(l) +
                           " at epoch " + std::to_string(e) + ", window " +
                           std::to_string(w)),
        epoch(e), window(w), loss(l) {}
};

// Standard Adam (beta1 0.9, beta2 0.999, eps 1e-8, bias correction) over a
// flat parameter vector.
class AdamOptimizer {
 public:
  explicit AdamOptimizer(std::size_t n, double lr)
      : lr_(lr), m_(n, 0.0), v_(n, 0.0) {}
  void update(std::vector<double>& params, const std::vector<double>& grads);
  std::size_t size() const { return m_.size(); }

 private:
  double lr_;
  std::size_t step_ = 0;
  std::vector<double> m_, v_;
};

Value mse_loss_tape(Tape& t, Value pred, Value actual);

// Truncated BPTT over the train split in chronological order, batch size
// one, MSE loss, Adam. State is carried across windows within an epoch and
// reset between epochs. Deterministic per (model init, cfg).
TrainTrace train(Model& model, const Dataset& dataset, const TrainConfig& cfg,
                 bool track_test_r2 = false);

std::vector<double> flatten_params(const Model& model);
void unflatten_params(Model& model, const std::vector<double>& flat);

}  // namespace ltcnet
