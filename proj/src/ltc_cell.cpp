#include "ltcnet/ltc_cell.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace ltcnet {

LtcTopology::LtcTopology(const Wiring& w) {
  neuron_count = w.neuron_count;
  sensory_count = w.sensory_count;
  auto rs = std::make_shared<std::vector<std::size_t>>();
  auto rd = std::make_shared<std::vector<std::size_t>>();
  for (const Edge& e : w.adjacency) {
    rs->push_back(e.src);
    rd->push_back(e.dst);
  }
  auto is = std::make_shared<std::vector<std::size_t>>();
  auto id = std::make_shared<std::vector<std::size_t>>();
  for (const Edge& e : w.sensory_adjacency) {
    is->push_back(e.src);
    id->push_back(e.dst);
  }
  rec_src = rs; rec_dst = rd; in_src = is; in_dst = id;
}

LtcCellParams LtcCellParams::init(const Wiring& w, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  // Leak conductance 1/tau drawn uniformly; a hard lower bound on the leak
  // would dominate every update's denominator and squash the state toward
  // zero at each layer, so small conductances (long time constants) must be
  // reachable for signal to survive the sensory->inter->command->motor chain.
  std::uniform_real_distribution<double> leak_d(0.002, 2.0);
  std::uniform_real_distribution<double> w_d(0.01, 1.0);
  std::uniform_real_distribution<double> slope_d(3.0, 8.0);
  std::uniform_real_distribution<double> offset_d(0.3, 0.8);
  std::normal_distribution<double> rev_d(0.0, 1.0);

  LtcCellParams p;
  p.tau_raw = Tensor({w.neuron_count});
  for (auto& v : p.tau_raw.data) v = softplus_inv_scalar(1.0 / leak_d(rng));

  auto fill_edges = [&](const std::vector<Edge>& edges, Tensor& w_raw,
                        Tensor& slope, Tensor& offset, Tensor& rev) {
    std::size_t e = edges.size();
    w_raw = Tensor({e});
    slope = Tensor({e});
    offset = Tensor({e});
    rev = Tensor({e});
    for (std::size_t i = 0; i < e; ++i) {
      w_raw[i] = softplus_inv_scalar(w_d(rng));
      slope[i] = slope_d(rng);
      offset[i] = offset_d(rng);
      rev[i] = edges[i].polarity * std::abs(rev_d(rng));
    }
  };
  fill_edges(w.adjacency, p.w_raw, p.gate_slope, p.gate_offset, p.reversal);
  fill_edges(w.sensory_adjacency, p.in_w_raw, p.in_gate_slope, p.in_gate_offset,
             p.in_reversal);
  return p;
}

std::vector<double> synapse_activation(const std::vector<double>& pre_state,
                                       const std::vector<std::size_t>& src,
                                       const std::vector<double>& w,
                                       const std::vector<double>& slope,
                                       const std::vector<double>& offset) {
  std::vector<double> f(src.size());
  for (std::size_t e = 0; e < src.size(); ++e)
    f[e] = w[e] * sigmoid_scalar(slope[e] * (pre_state[src[e]] - offset[e]));
  return f;
}

LtcLeaves LtcLeaves::make(Tape& t, const LtcCellParams& p, bool requires_grad) {
  LtcLeaves l;
  l.tau_raw = t.leaf(p.tau_raw, requires_grad);
  l.w_raw = t.leaf(p.w_raw, requires_grad);
  l.gate_slope = t.leaf(p.gate_slope, requires_grad);
  l.gate_offset = t.leaf(p.gate_offset, requires_grad);
  l.reversal = t.leaf(p.reversal, requires_grad);
  l.in_w_raw = t.leaf(p.in_w_raw, requires_grad);
  l.in_gate_slope = t.leaf(p.in_gate_slope, requires_grad);
  l.in_gate_offset = t.leaf(p.in_gate_offset, requires_grad);
  l.in_reversal = t.leaf(p.in_reversal, requires_grad);
  return l;
}

namespace {

void check_finite(const Tensor& v, const char* what) {
  for (double x : v.data)
    if (!std::isfinite(x))
      throw std::domain_error(std::string("ltc_step: non-finite ") + what);
}

}  // namespace

Value ltc_step_tape(Tape& t, const LtcTopology& topo, const LtcLeaves& leaves,
                    Value state, Value input, double dt) {
  if (dt <= 0.0) throw std::invalid_argument("ltc_step: dt must be > 0");
  check_finite(t.value(state), "state");
  check_finite(t.value(input), "input");
  if (t.value(input).size() != topo.sensory_count)
    throw std::invalid_argument("ltc_step: input length does not match sensory dimension");

  std::size_t n = topo.neuron_count;
  Value tau = t.softplus(leaves.tau_raw);
  Value inv_tau = t.div(t.constant(Tensor::full({n}, 1.0)), tau);

  auto edge_flow = [&](Value pre, Value w_raw, Value slope, Value offset,
                       Value rev,
                       std::shared_ptr<const std::vector<std::size_t>> src,
                       std::shared_ptr<const std::vector<std::size_t>> dst) {
    Value x = t.gather(pre, std::move(src));
    Value gate = t.sigmoid(t.mul(t.sub(x, offset), slope));
    Value f = t.mul(t.softplus(w_raw), gate);
    Value drive = t.mul(f, rev);
    return std::pair<Value, Value>{t.scatter_add(drive, dst, n),
                                   t.scatter_add(f, std::move(dst), n)};
  };
  auto [num_rec, den_rec] =
      edge_flow(state, leaves.w_raw, leaves.gate_slope, leaves.gate_offset,
                leaves.reversal, topo.rec_src, topo.rec_dst);
  auto [num_in, den_in] =
      edge_flow(input, leaves.in_w_raw, leaves.in_gate_slope,
                leaves.in_gate_offset, leaves.in_reversal, topo.in_src,
                topo.in_dst);

  Value numerator = t.add(state, t.scale(t.add(num_rec, num_in), dt));
  Value denominator =
      t.add_scalar(t.scale(t.add(inv_tau, t.add(den_rec, den_in)), dt), 1.0);
  return t.div(numerator, denominator);
}

LtcState ltc_step(const LtcState& state, const std::vector<double>& input,
                  const LtcTopology& topo, const LtcCellParams& params,
                  double dt) {
  Tape t;
  LtcLeaves leaves = LtcLeaves::make(t, params, false);
  Value s = t.constant(Tensor::vec(state.x));
  Value in = t.constant(Tensor::vec(input));
  Value next = ltc_step_tape(t, topo, leaves, s, in, dt);
  LtcState out;
  out.x = t.value(next).data;
  out.t = state.t + dt;
  return out;
}

std::vector<double> tau_sys(const LtcState& state,
                            const std::vector<double>& input,
                            const LtcTopology& topo,
                            const LtcCellParams& params) {
  std::size_t n = topo.neuron_count;
  std::vector<double> w_rec(params.w_raw.size()), w_in(params.in_w_raw.size());
  for (std::size_t i = 0; i < w_rec.size(); ++i)
    w_rec[i] = softplus_scalar(params.w_raw[i]);
  for (std::size_t i = 0; i < w_in.size(); ++i)
    w_in[i] = softplus_scalar(params.in_w_raw[i]);

  std::vector<double> total(n, 0.0);
  auto f_rec = synapse_activation(state.x, *topo.rec_src, w_rec,
                                  params.gate_slope.data, params.gate_offset.data);
  for (std::size_t e = 0; e < f_rec.size(); ++e)
    total[(*topo.rec_dst)[e]] += f_rec[e];
  auto f_in = synapse_activation(input, *topo.in_src, w_in,
                                 params.in_gate_slope.data,
                                 params.in_gate_offset.data);
  for (std::size_t e = 0; e < f_in.size(); ++e)
    total[(*topo.in_dst)[e]] += f_in[e];

  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double tau = softplus_scalar(params.tau_raw[i]);
    out[i] = tau / (1.0 + tau * total[i]);
  }
  return out;
}

}  // namespace ltcnet
