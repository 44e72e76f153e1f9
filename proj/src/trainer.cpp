#include "ltcnet/trainer.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "ltcnet/metrics.hpp"

namespace ltcnet {

void AdamOptimizer::update(std::vector<double>& params,
                           const std::vector<double>& grads) {
  if (params.size() != m_.size() || grads.size() != m_.size())
    throw std::invalid_argument("adam_update: size mismatch");
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  ++step_;
  double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(step_));
  double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(step_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = kBeta1 * m_[i] + (1.0 - kBeta1) * grads[i];
    v_[i] = kBeta2 * v_[i] + (1.0 - kBeta2) * grads[i] * grads[i];
    double mhat = m_[i] / bc1;
    double vhat = v_[i] / bc2;
    params[i] -= lr_ * mhat / (std::sqrt(vhat) + kEps);
  }
}

Value mse_loss_tape(Tape& t, Value pred, Value actual) {
  if (t.value(pred).size() == 0)
    throw std::invalid_argument("mse_loss: empty input");
  Value r = t.sub(pred, actual);
  return t.mean(t.mul(r, r));
}

std::vector<double> flatten_params(const Model& model) {
  std::vector<double> flat;
  flat.reserve(model.param_scalar_count());
  for (const auto& p : model.parameters())
    flat.insert(flat.end(), p.value.data.begin(), p.value.data.end());
  return flat;
}

void unflatten_params(Model& model, const std::vector<double>& flat) {
  std::size_t off = 0;
  for (auto& p : model.parameters()) {
    for (auto& v : p.value.data) v = flat[off++];
  }
  if (off != flat.size())
    throw std::invalid_argument("unflatten_params: size mismatch");
}

TrainTrace train(Model& model, const Dataset& dataset, const TrainConfig& cfg,
                 bool track_test_r2) {
  if (!dataset.scaled || dataset.train_end == 0)
    throw std::invalid_argument("train: dataset must be scaled and split");
  if (dataset.feature_count() != model.input_size())
    throw std::invalid_argument(
        "train: feature count " + std::to_string(dataset.feature_count()) +
        " does not match model input size " + std::to_string(model.input_size()));
  if (cfg.epochs < 1 || cfg.learning_rate <= 0.0 || cfg.truncation_len < 1)
    throw std::invalid_argument("train: invalid config");

  auto train_x = dataset.train_features();
  auto train_y = dataset.train_target();
  std::size_t n_params = model.param_scalar_count();
  AdamOptimizer adam(n_params, cfg.learning_rate);
  double clip = cfg.effective_clip();

  TrainTrace trace;
  auto t_start = std::chrono::steady_clock::now();
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    auto e_start = std::chrono::steady_clock::now();
    std::vector<double> state = model.initial_state();
    double loss_sum = 0.0;
    std::size_t loss_n = 0, window_i = 0;
    for (std::size_t begin = 0; begin < train_x.size();
         begin += cfg.truncation_len, ++window_i) {
      std::size_t len = std::min(cfg.truncation_len, train_x.size() - begin);
      Tape t;
      auto leaves = model.make_leaves(t, true);
      Value s = t.constant(Tensor::vec(state));
      std::vector<Value> preds;
      preds.reserve(len);
      for (std::size_t k = 0; k < len; ++k) {
        Value in = t.constant(Tensor::vec(train_x[begin + k]));
        auto out = model.step(t, leaves, s, in);
        s = out.state;
        preds.push_back(out.pred);
      }
      Value pred_vec = preds[0];
      for (std::size_t k = 1; k < len; ++k)
        pred_vec = t.concat(pred_vec, preds[k]);
      Tensor actual({len});
      for (std::size_t k = 0; k < len; ++k) actual[k] = train_y[begin + k];
      Value loss = mse_loss_tape(t, pred_vec, t.constant(std::move(actual)));
      double loss_v = t.value(loss)[0];
      if (!std::isfinite(loss_v)) throw NumericalAbort(epoch, window_i, loss_v);
      loss_sum += loss_v * static_cast<double>(len);
      loss_n += len;

      t.backward(loss);
      std::vector<double> grads;
      grads.reserve(n_params);
      for (std::size_t p = 0; p < leaves.size(); ++p) {
        const Tensor& g = t.grad(leaves[p]);
        if (g.size() == 0) {
          grads.insert(grads.end(), model.parameters()[p].value.size(), 0.0);
        } else {
          grads.insert(grads.end(), g.data.begin(), g.data.end());
        }
      }
      if (clip > 0.0) {
        double norm2 = 0.0;
        for (double g : grads) norm2 += g * g;
        double norm = std::sqrt(norm2);
        if (norm > clip) {
          double sc = clip / norm;
          for (double& g : grads) g *= sc;
        }
      }
      std::vector<double> flat = flatten_params(model);
      adam.update(flat, grads);
      unflatten_params(model, flat);
      state = t.value(s).data;  // detached carry-over
    }
    trace.epoch_loss.push_back(loss_sum / static_cast<double>(loss_n));
    if (track_test_r2) {
      auto preds = model.predict(dataset.test_features());
      trace.epoch_test_r2.push_back(r2_score(dataset.test_target(), preds));
    }
    trace.epoch_wall_seconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - e_start)
            .count());
  }
  trace.total_wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  return trace;
}

}  // namespace ltcnet
