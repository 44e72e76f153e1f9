#include "ltcnet/model.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace ltcnet {

std::size_t Model::param_scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

std::vector<Value> Model::make_leaves(Tape& t, bool requires_grad) const {
  std::vector<Value> leaves;
  leaves.reserve(params_.size());
  for (const auto& p : params_) leaves.push_back(t.leaf(p.value, requires_grad));
  return leaves;
}

std::vector<double> Model::predict(
    const std::vector<std::vector<double>>& features) const {
  std::vector<double> preds;
  preds.reserve(features.size());
  std::vector<double> state = initial_state();
  for (const auto& row : features) {
    Tape t;
    auto leaves = make_leaves(t, false);
    Value s = t.constant(Tensor::vec(state));
    Value in = t.constant(Tensor::vec(row));
    StepOut out = step(t, leaves, s, in);
    state = t.value(out.state).data;
    preds.push_back(t.value(out.pred)[0]);
  }
  return preds;
}

// --- NCP ---------------------------------------------------------------

namespace {
// Leaf order for NcpModel::step; mirrors the parameters() list.
enum NcpLeaf : std::size_t {
  kTauRaw, kWRaw, kSlope, kOffset, kRev,
  kInWRaw, kInSlope, kInOffset, kInRev,
  kReadW, kReadB, kNcpLeafCount
};
}  // namespace

NcpModel::NcpModel(Wiring wiring, std::uint64_t seed, double dt,
                   std::size_t unfolds)
    : wiring_(std::move(wiring)), topo_(wiring_), dt_(dt), unfolds_(unfolds) {
  validate_wiring(wiring_);
  if (unfolds_ == 0)
    throw std::invalid_argument("NcpModel: unfolds must be >= 1");
  LtcCellParams cell = LtcCellParams::init(wiring_, seed);
  auto motors = wiring_.neurons_in(Layer::kMotor);
  motor_idx_ = std::make_shared<std::vector<std::size_t>>(motors);

  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  double lim = std::sqrt(6.0 / (motors.size() + 1.0));
  std::uniform_real_distribution<double> u(-lim, lim);
  Tensor read_w({motors.size()});
  for (auto& v : read_w.data) v = u(rng);

  params_ = {
      {"ltc.tau_raw", cell.tau_raw},
      {"ltc.w_raw", cell.w_raw},
      {"ltc.gate_slope", cell.gate_slope},
      {"ltc.gate_offset", cell.gate_offset},
      {"ltc.reversal", cell.reversal},
      {"ltc.in_w_raw", cell.in_w_raw},
      {"ltc.in_gate_slope", cell.in_gate_slope},
      {"ltc.in_gate_offset", cell.in_gate_offset},
      {"ltc.in_reversal", cell.in_reversal},
      {"readout.w", read_w},
      {"readout.b", Tensor::scalar(0.0)},
  };
}

LtcCellParams NcpModel::cell_params() const {
  LtcCellParams c;
  c.tau_raw = params_[kTauRaw].value;
  c.w_raw = params_[kWRaw].value;
  c.gate_slope = params_[kSlope].value;
  c.gate_offset = params_[kOffset].value;
  c.reversal = params_[kRev].value;
  c.in_w_raw = params_[kInWRaw].value;
  c.in_gate_slope = params_[kInSlope].value;
  c.in_gate_offset = params_[kInOffset].value;
  c.in_reversal = params_[kInRev].value;
  return c;
}

std::size_t NcpModel::flops_per_step() const {
  return ltcnet::flops_per_step(wiring_);
}

Model::StepOut NcpModel::step(Tape& t, const std::vector<Value>& leaves,
                              Value state, Value input) const {
  LtcLeaves l;
  l.tau_raw = leaves[kTauRaw];
  l.w_raw = leaves[kWRaw];
  l.gate_slope = leaves[kSlope];
  l.gate_offset = leaves[kOffset];
  l.reversal = leaves[kRev];
  l.in_w_raw = leaves[kInWRaw];
  l.in_gate_slope = leaves[kInSlope];
  l.in_gate_offset = leaves[kInOffset];
  l.in_reversal = leaves[kInRev];
  // Sub-stepping the fused solver keeps each update well inside its stable
  // region while letting the state relax most of the way to equilibrium
  // within one sample interval.
  Value next = state;
  double h = dt_ / static_cast<double>(unfolds_);
  for (std::size_t u = 0; u < unfolds_; ++u)
    next = ltc_step_tape(t, topo_, l, next, input, h);
  Value motor = t.gather(next, motor_idx_);
  Value pred = t.add(t.sum(t.mul(leaves[kReadW], motor)), leaves[kReadB]);
  return {next, pred};
}

// --- LSTM --------------------------------------------------------------

namespace {
enum LstmLeaf : std::size_t { kW, kU, kB, kLstmReadW, kLstmReadB };
}  // namespace

LstmModel::LstmModel(std::size_t input_dim, std::size_t hidden,
                     std::uint64_t seed)
    : input_dim_(input_dim), hidden_(hidden) {
  if (input_dim == 0 || hidden == 0)
    throw std::invalid_argument("LstmModel: dims must be > 0");
  std::mt19937_64 rng(seed);
  auto glorot = [&rng](std::size_t rows, std::size_t cols) {
    double lim = std::sqrt(6.0 / (rows + cols));
    std::uniform_real_distribution<double> u(-lim, lim);
    Tensor m({rows, cols});
    for (auto& v : m.data) v = u(rng);
    return m;
  };
  Tensor W = glorot(4 * hidden, input_dim);
  Tensor U = glorot(4 * hidden, hidden);
  Tensor b({4 * hidden});
  // forget-gate bias +1; gate order is i, f, g, o
  for (std::size_t i = hidden; i < 2 * hidden; ++i) b[i] = 1.0;
  Tensor read_w({hidden});
  {
    double lim = std::sqrt(6.0 / (hidden + 1.0));
    std::uniform_real_distribution<double> u(-lim, lim);
    for (auto& v : read_w.data) v = u(rng);
  }
  params_ = {
      {"lstm.W", W},
      {"lstm.U", U},
      {"lstm.b", b},
      {"readout.w", read_w},
      {"readout.b", Tensor::scalar(0.0)},
  };
}

std::size_t LstmModel::flops_per_step() const {
  return lstm_flops_per_step(input_dim_, hidden_);
}

Model::StepOut LstmModel::step(Tape& t, const std::vector<Value>& leaves,
                               Value state, Value input) const {
  for (double x : t.value(input).data)
    if (!std::isfinite(x))
      throw std::domain_error("lstm_step: non-finite input");
  std::size_t h = hidden_;
  Value hprev = t.slice(state, 0, h);
  Value cprev = t.slice(state, h, h);
  Value z = t.add(t.add(t.matmul(leaves[kW], input), t.matmul(leaves[kU], hprev)),
                  leaves[kB]);
  Value gi = t.sigmoid(t.slice(z, 0, h));
  Value gf = t.sigmoid(t.slice(z, h, h));
  Value gg = t.tanh(t.slice(z, 2 * h, h));
  Value go = t.sigmoid(t.slice(z, 3 * h, h));
  Value cnext = t.add(t.mul(gf, cprev), t.mul(gi, gg));
  Value hnext = t.mul(go, t.tanh(cnext));
  Value next = t.concat(hnext, cnext);
  Value pred = t.add(t.sum(t.mul(leaves[kLstmReadW], hnext)), leaves[kLstmReadB]);
  return {next, pred};
}

std::unique_ptr<Model> make_model(const std::string& kind,
                                  std::size_t input_dim, std::size_t neurons,
                                  std::uint64_t seed) {
  if (kind == "ncp") {
    WiringSpec spec = WiringSpec::default_for(input_dim, neurons, seed);
    return std::make_unique<NcpModel>(build_ncp_wiring(spec), seed);
  }
  if (kind == "lstm") return std::make_unique<LstmModel>(input_dim, neurons, seed);
  throw std::invalid_argument("make_model: unknown kind '" + kind +
                              "' (expected ncp or lstm)");
}

}  // namespace ltcnet
