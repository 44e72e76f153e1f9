#include "ltcnet/wiring.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace ltcnet {

namespace {

// Sample `k` distinct values from [lo, hi) via partial Fisher-Yates.
std::vector<std::size_t> sample_distinct(std::mt19937_64& rng, std::size_t lo,
                                         std::size_t hi, std::size_t k) {
  std::vector<std::size_t> pool;
  pool.reserve(hi - lo);
  for (std::size_t v = lo; v < hi; ++v) pool.push_back(v);
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> d(i, pool.size() - 1);
    std::swap(pool[i], pool[d(rng)]);
  }
  pool.resize(k);
  return pool;
}

int draw_polarity(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> d(0, 1);
  return d(rng) == 0 ? -1 : 1;
}

}  // namespace

WiringSpec WiringSpec::default_for(std::size_t sensory, std::size_t inter,
                                   std::uint64_t seed) {
  WiringSpec s;
  s.sensory_count = sensory;
  s.inter_count = inter;
  s.command_count = std::max<std::size_t>(1, inter / 2);
  s.motor_count = 1;
  s.polarity_seed = seed;
  std::size_t n = s.neuron_count();
  double denom = static_cast<double>(sensory * n + n * n);
  double target_edges = 0.1 * denom;
  auto clamp_ = [](long long v, std::size_t lo, std::size_t hi) {
    return static_cast<std::size_t>(
        std::clamp<long long>(v, static_cast<long long>(lo),
                              static_cast<long long>(hi)));
  };
  s.sensory_fanout =
      clamp_(std::llround(0.3 * target_edges / static_cast<double>(sensory)), 1,
             s.inter_count);
  s.inter_fanout =
      clamp_(std::llround(0.5 * target_edges / static_cast<double>(inter)), 1,
             s.command_count);
  s.command_recurrence = clamp_(std::llround(0.1 * target_edges), 0,
                                s.command_count * s.command_count);
  s.motor_fanin =
      clamp_(std::llround(0.1 * target_edges / static_cast<double>(s.motor_count)),
             1, s.command_count);
  return s;
}

std::vector<std::size_t> Wiring::neurons_in(Layer l) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < neuron_count; ++i)
    if (layer_of[i] == l) out.push_back(i);
  return out;
}

Wiring build_ncp_wiring(const WiringSpec& spec) {
  if (spec.sensory_count == 0 || spec.inter_count == 0 ||
      spec.command_count == 0 || spec.motor_count == 0)
    throw std::invalid_argument("build_ncp_wiring: all layer sizes must be > 0");
  if (spec.sensory_fanout > spec.inter_count)
    throw std::invalid_argument("build_ncp_wiring: sensory_fanout exceeds inter layer size");
  if (spec.inter_fanout > spec.command_count)
    throw std::invalid_argument("build_ncp_wiring: inter_fanout exceeds command layer size");
  if (spec.motor_fanin > spec.command_count)
    throw std::invalid_argument("build_ncp_wiring: motor_fanin exceeds command layer size");
  if (spec.command_recurrence > spec.command_count * spec.command_count)
    throw std::invalid_argument("build_ncp_wiring: command_recurrence exceeds pair count");

  std::mt19937_64 rng(spec.polarity_seed);
  Wiring w;
  w.sensory_count = spec.sensory_count;
  w.neuron_count = spec.neuron_count();
  w.layer_of.resize(w.neuron_count);
  std::size_t inter_lo = 0, inter_hi = spec.inter_count;
  std::size_t cmd_lo = inter_hi, cmd_hi = cmd_lo + spec.command_count;
  std::size_t motor_lo = cmd_hi, motor_hi = motor_lo + spec.motor_count;
  for (std::size_t i = inter_lo; i < inter_hi; ++i) w.layer_of[i] = Layer::kInter;
  for (std::size_t i = cmd_lo; i < cmd_hi; ++i) w.layer_of[i] = Layer::kCommand;
  for (std::size_t i = motor_lo; i < motor_hi; ++i) w.layer_of[i] = Layer::kMotor;

  for (std::size_t s = 0; s < spec.sensory_count; ++s)
    for (std::size_t dst :
         sample_distinct(rng, inter_lo, inter_hi, spec.sensory_fanout))
      w.sensory_adjacency.push_back({s, dst, draw_polarity(rng)});

  for (std::size_t i = inter_lo; i < inter_hi; ++i)
    for (std::size_t dst : sample_distinct(rng, cmd_lo, cmd_hi, spec.inter_fanout))
      w.adjacency.push_back({i, dst, draw_polarity(rng)});

  std::set<std::pair<std::size_t, std::size_t>> rec_pairs;
  while (rec_pairs.size() < spec.command_recurrence) {
    std::uniform_int_distribution<std::size_t> d(cmd_lo, cmd_hi - 1);
    std::size_t a = d(rng), b = d(rng);
    if (rec_pairs.insert({a, b}).second)
      w.adjacency.push_back({a, b, draw_polarity(rng)});
  }

  for (std::size_t m = motor_lo; m < motor_hi; ++m)
    for (std::size_t src : sample_distinct(rng, cmd_lo, cmd_hi, spec.motor_fanin))
      w.adjacency.push_back({src, m, draw_polarity(rng)});

  // Reachability patching, layer by layer. After the inter pass every inter
  // neuron is sensory-reachable, so upstream sources in later passes are safe.
  auto reachable = [&w]() {
    std::vector<bool> r(w.neuron_count, false);
    std::vector<std::size_t> stack;
    for (const Edge& e : w.sensory_adjacency)
      if (!r[e.dst]) { r[e.dst] = true; stack.push_back(e.dst); }
    while (!stack.empty()) {
      std::size_t v = stack.back();
      stack.pop_back();
      for (const Edge& e : w.adjacency)
        if (e.src == v && !r[e.dst]) { r[e.dst] = true; stack.push_back(e.dst); }
    }
    return r;
  };
  std::size_t patched = 0;
  for (Layer layer : {Layer::kInter, Layer::kCommand, Layer::kMotor}) {
    auto r = reachable();
    for (std::size_t v = 0; v < w.neuron_count; ++v) {
      if (w.layer_of[v] != layer || r[v]) continue;
      if (layer == Layer::kInter) {
        std::uniform_int_distribution<std::size_t> d(0, spec.sensory_count - 1);
        w.sensory_adjacency.push_back({d(rng), v, draw_polarity(rng)});
      } else {
        std::size_t lo = layer == Layer::kCommand ? inter_lo : cmd_lo;
        std::size_t hi = layer == Layer::kCommand ? inter_hi : cmd_hi;
        std::uniform_int_distribution<std::size_t> d(lo, hi - 1);
        w.adjacency.push_back({d(rng), v, draw_polarity(rng)});
      }
      ++patched;
    }
  }
  w.patched_edges = patched;
  return w;
}

double sparsity(const Wiring& w) {
  double reference = static_cast<double>(w.sensory_count * w.neuron_count +
                                         w.neuron_count * w.neuron_count);
  return 1.0 - static_cast<double>(w.edge_count()) / reference;
}

std::size_t param_count(const Wiring& w) {
  std::size_t motor = w.neurons_in(Layer::kMotor).size();
  return 4 * w.edge_count() + w.neuron_count + motor + 1;
}

std::size_t lstm_param_count(std::size_t input_dim, std::size_t hidden,
                             std::size_t output_dim) {
  return 4 * (hidden * (input_dim + hidden) + hidden) +
         (hidden * output_dim + output_dim);
}

std::size_t flops_per_step(const Wiring& w) {
  return kFlopsPerSynapse * w.edge_count() +
         kFlopsPerNeuronLeak * w.neuron_count;
}

std::size_t lstm_flops_per_step(std::size_t input_dim, std::size_t hidden) {
  return 8 * hidden * (input_dim + hidden) + kFlopsPerLstmUnit * hidden;
}

void validate_wiring(const Wiring& w) {
  auto layer_ok = [&](const Edge& e) {
    Layer s = w.layer_of[e.src], d = w.layer_of[e.dst];
    return (s == Layer::kInter && d == Layer::kCommand) ||
           (s == Layer::kCommand && d == Layer::kCommand) ||
           (s == Layer::kCommand && d == Layer::kMotor);
  };
  for (const Edge& e : w.sensory_adjacency) {
    if (e.src >= w.sensory_count || e.dst >= w.neuron_count)
      throw std::runtime_error("wiring: sensory edge out of range");
    if (w.layer_of[e.dst] != Layer::kInter)
      throw std::runtime_error("wiring: sensory edge must target inter layer");
  }
  for (const Edge& e : w.adjacency) {
    if (e.src >= w.neuron_count || e.dst >= w.neuron_count)
      throw std::runtime_error("wiring: edge out of range");
    if (!layer_ok(e))
      throw std::runtime_error("wiring: edge violates layer topology");
    if (e.polarity != 1 && e.polarity != -1)
      throw std::runtime_error("wiring: polarity must be +/-1");
  }
  std::vector<std::size_t> indeg(w.neuron_count, 0);
  for (const Edge& e : w.sensory_adjacency) ++indeg[e.dst];
  for (const Edge& e : w.adjacency) ++indeg[e.dst];
  for (std::size_t v = 0; v < w.neuron_count; ++v)
    if (indeg[v] == 0)
      throw std::runtime_error("wiring: neuron " + std::to_string(v) +
                               " has no incoming edge");
  // every neuron reachable from some sensory unit
  std::vector<bool> r(w.neuron_count, false);
  std::vector<std::size_t> stack;
  for (const Edge& e : w.sensory_adjacency)
    if (!r[e.dst]) { r[e.dst] = true; stack.push_back(e.dst); }
  while (!stack.empty()) {
    std::size_t v = stack.back();
    stack.pop_back();
    for (const Edge& e : w.adjacency)
      if (e.src == v && !r[e.dst]) { r[e.dst] = true; stack.push_back(e.dst); }
  }
  for (std::size_t v = 0; v < w.neuron_count; ++v)
    if (!r[v])
      throw std::runtime_error("wiring: neuron " + std::to_string(v) +
                               " unreachable from sensory layer");
}

std::string Wiring::to_json() const {
  nlohmann::json j;
  j["sensory_count"] = sensory_count;
  j["neuron_count"] = neuron_count;
  auto layer_name = [](Layer l) {
    switch (l) {
      case Layer::kInter: return "inter";
      case Layer::kCommand: return "command";
      default: return "motor";
    }
  };
  j["layers"] = nlohmann::json::array();
  for (Layer l : layer_of) j["layers"].push_back(layer_name(l));
  auto edges = [](const std::vector<Edge>& es) {
    nlohmann::json arr = nlohmann::json::array();
    for (const Edge& e : es)
      arr.push_back({{"src", e.src}, {"dst", e.dst}, {"polarity", e.polarity}});
    return arr;
  };
  j["sensory_adjacency"] = edges(sensory_adjacency);
  j["adjacency"] = edges(adjacency);
  j["sparsity"] = sparsity(*this);
  return j.dump(2);
}

}  // namespace ltcnet
