#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "ltcnet/autodiff.hpp"
#include "ltcnet/wiring.hpp"

namespace ltcnet {

// Per-synapse gating/reversal parameters and per-neuron time constants.
// tau and the conductance magnitudes are stored raw and mapped through
// softplus, so tau > 0 and w >= 0 hold at all times.
struct LtcCellParams {
  Tensor tau_raw;                          // N
  Tensor w_raw, gate_slope, gate_offset, reversal;              // per recurrent edge
  Tensor in_w_raw, in_gate_slope, in_gate_offset, in_reversal;  // per sensory edge

  static LtcCellParams init(const Wiring& w, std::uint64_t seed);
};

struct LtcState {
  std::vector<double> x;
  double t = 0.0;
};

// Edge endpoints flattened from a Wiring, shared with gather/scatter nodes.
struct LtcTopology {
  std::size_t neuron_count = 0;
  std::size_t sensory_count = 0;
  std::shared_ptr<const std::vector<std::size_t>> rec_src, rec_dst;
  std::shared_ptr<const std::vector<std::size_t>> in_src, in_dst;

  explicit LtcTopology(const Wiring& w);
};

// f_e = w_e * sigmoid(slope_e * (pre[src_e] - offset_e)), one entry per edge.
std::vector<double> synapse_activation(const std::vector<double>& pre_state,
                                       const std::vector<std::size_t>& src,
                                       const std::vector<double>& w,
                                       const std::vector<double>& slope,
                                       const std::vector<double>& offset);

struct LtcLeaves {
  Value tau_raw, w_raw, gate_slope, gate_offset, reversal;
  Value in_w_raw, in_gate_slope, in_gate_offset, in_reversal;

  static LtcLeaves make(Tape& t, const LtcCellParams& p, bool requires_grad);
};

// Fused semi-implicit update:
//   x+ = (x + dt*(sum f*A)) / (1 + dt*(1/tau + sum f))
// Differentiable w.r.t. all leaves and the state value.
Value ltc_step_tape(Tape& t, const LtcTopology& topo, const LtcLeaves& leaves,
                    Value state, Value input, double dt);

// Value-level step; delegates to the tape path so there is one code path.
LtcState ltc_step(const LtcState& state, const std::vector<double>& input,
                  const LtcTopology& topo, const LtcCellParams& params,
                  double dt);

// Effective per-neuron time constant tau / (1 + tau * total synaptic drive).
std::vector<double> tau_sys(const LtcState& state,
                            const std::vector<double>& input,
                            const LtcTopology& topo,
                            const LtcCellParams& params);

}  // namespace ltcnet
