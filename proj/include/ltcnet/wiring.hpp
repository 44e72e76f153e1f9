#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ltcnet {

enum class Layer : std::uint8_t { kInter, kCommand, kMotor };

struct Edge {
  std::size_t src = 0;  // neuron index (or sensory index for sensory edges)
  std::size_t dst = 0;  // neuron index
  int polarity = 1;     // +1 excitatory, -1 inhibitory
};

// Layer sizes and fan-outs for the 4-layer sensory/inter/command/motor
// topology. Sensory units are inputs, not neurons.
struct WiringSpec {
  std::size_t sensory_count = 0;
  std::size_t inter_count = 0;
  std::size_t command_count = 0;
  std::size_t motor_count = 1;
  std::size_t sensory_fanout = 1;
  std::size_t inter_fanout = 1;
  std::size_t command_recurrence = 0;
  std::size_t motor_fanin = 1;
  std::uint64_t polarity_seed = 0;

  std::size_t neuron_count() const {
    return inter_count + command_count + motor_count;
  }

  // Fan-outs scaled to land near the reference 0.9 sparsity figure.
  static WiringSpec default_for(std::size_t sensory, std::size_t inter,
                                std::uint64_t seed);
};

struct Wiring {
  std::size_t sensory_count = 0;
  std::size_t neuron_count = 0;
  std::vector<Edge> adjacency;          // neuron -> neuron
  std::vector<Edge> sensory_adjacency;  // sensory -> neuron
  std::vector<Layer> layer_of;          // per neuron
  std::size_t patched_edges = 0;        // edges added by reachability patching

  std::vector<std::size_t> neurons_in(Layer l) const;
  std::size_t edge_count() const {
    return adjacency.size() + sensory_adjacency.size();
  }
  std::string to_json() const;
};

Wiring build_ncp_wiring(const WiringSpec& spec);

// Fraction of absent edges against the fully connected reference
// (all sensory->neuron plus all neuron->neuron pairs).
double sparsity(const Wiring& w);

// Trainable scalars: 4 per edge (w, gamma, mu, A) + N taus + readout.
std::size_t param_count(const Wiring& w);
std::size_t lstm_param_count(std::size_t input_dim, std::size_t hidden,
                             std::size_t output_dim);

// Per-synapse multiply-add proxy constants.
inline constexpr std::size_t kFlopsPerSynapse = 10;   // gate + drive per edge
inline constexpr std::size_t kFlopsPerNeuronLeak = 4; // leak + fused divide
inline constexpr std::size_t kFlopsPerLstmUnit = 24;  // gate nonlinearities etc.

std::size_t flops_per_step(const Wiring& w);
std::size_t lstm_flops_per_step(std::size_t input_dim, std::size_t hidden);

// Throws std::runtime_error describing the first violated structural rule.
void validate_wiring(const Wiring& w);

}  // namespace ltcnet
