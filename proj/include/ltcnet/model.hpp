#pragma once

#include <memory>
#include <string>
#include <vector>

#include "ltcnet/autodiff.hpp"
#include "ltcnet/ltc_cell.hpp"
#include "ltcnet/wiring.hpp"

namespace ltcnet {

struct NamedTensor {
  std::string name;
  Tensor value;
};

// A recurrent cell plus scalar readout. Parameters are exposed as an
// ordered list of named tensors; the trainer flattens them in that order.
class Model {
 public:
  virtual ~Model() = default;

  virtual std::string kind() const = 0;
  virtual std::size_t state_size() const = 0;
  virtual std::size_t input_size() const = 0;
  virtual std::size_t neuron_count() const = 0;
  // The intermediate-layer size the model was constructed from.
  virtual std::size_t size_knob() const = 0;
  virtual std::size_t flops_per_step() const = 0;

  std::vector<NamedTensor>& parameters() { return params_; }
  const std::vector<NamedTensor>& parameters() const { return params_; }
  std::size_t param_scalar_count() const;

  std::vector<Value> make_leaves(Tape& t, bool requires_grad) const;

  struct StepOut {
    Value state;
    Value pred;  // scalar-shaped
  };
  virtual StepOut step(Tape& t, const std::vector<Value>& leaves, Value state,
                       Value input) const = 0;

  std::vector<double> initial_state() const {
    return std::vector<double>(state_size(), 0.0);
  }

  // Run the model over a feature sequence from a zero state, value-only.
  std::vector<double> predict(const std::vector<std::vector<double>>& features) const;

 protected:
  std::vector<NamedTensor> params_;
};

class NcpModel : public Model {
 public:
  NcpModel(Wiring wiring, std::uint64_t seed, double dt = 1.0,
           std::size_t unfolds = 6);

  std::string kind() const override { return "ncp"; }
  std::size_t state_size() const override { return topo_.neuron_count; }
  std::size_t input_size() const override { return topo_.sensory_count; }
  std::size_t neuron_count() const override { return topo_.neuron_count; }
  std::size_t size_knob() const override {
    return wiring_.neurons_in(Layer::kInter).size();
  }
  std::size_t flops_per_step() const override;
  StepOut step(Tape& t, const std::vector<Value>& leaves, Value state,
               Value input) const override;

  const Wiring& wiring() const { return wiring_; }
  LtcCellParams cell_params() const;  // snapshot from the parameter list
  double dt() const { return dt_; }
  std::size_t unfolds() const { return unfolds_; }

 private:
  Wiring wiring_;
  LtcTopology topo_;
  std::shared_ptr<const std::vector<std::size_t>> motor_idx_;
  double dt_;
  std::size_t unfolds_;
};

class LstmModel : public Model {
 public:
  LstmModel(std::size_t input_dim, std::size_t hidden, std::uint64_t seed);

  std::string kind() const override { return "lstm"; }
  std::size_t state_size() const override { return 2 * hidden_; }
  std::size_t input_size() const override { return input_dim_; }
  std::size_t neuron_count() const override { return hidden_; }
  std::size_t size_knob() const override { return hidden_; }
  std::size_t flops_per_step() const override;
  StepOut step(Tape& t, const std::vector<Value>& leaves, Value state,
               Value input) const override;

  std::size_t hidden_dim() const { return hidden_; }

 private:
  std::size_t input_dim_, hidden_;
};

std::unique_ptr<Model> make_model(const std::string& kind, std::size_t input_dim,
                                  std::size_t neurons, std::uint64_t seed);

}  // namespace ltcnet
