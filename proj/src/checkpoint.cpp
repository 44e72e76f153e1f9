#include "ltcnet/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <memory>
#include <stdexcept>

#include <json.hpp>

namespace ltcnet {

std::string stable_hash(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void Checkpoint::save(const std::string& path) const {
  nlohmann::json j;
  j["model_kind"] = model_kind;
  j["input_dim"] = input_dim;
  j["neurons"] = neurons;
  j["seed"] = seed;
  j["cfg_hash"] = cfg_hash;
  nlohmann::json arrays = nlohmann::json::array();
  for (const auto& p : params)
    arrays.push_back({{"name", p.name},
                      {"shape", p.value.shape},
                      {"data", p.value.data}});
  j["params"] = std::move(arrays);
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write checkpoint: " + path);
  f << j.dump() << '\n';
}

Checkpoint Checkpoint::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read checkpoint: " + path);
  nlohmann::json j = nlohmann::json::parse(f);
  Checkpoint c;
  c.model_kind = j.at("model_kind").get<std::string>();
  c.input_dim = j.at("input_dim").get<std::size_t>();
  c.neurons = j.at("neurons").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.cfg_hash = j.at("cfg_hash").get<std::string>();
  for (const auto& arr : j.at("params")) {
    Tensor t(arr.at("shape").get<std::vector<std::size_t>>(),
             arr.at("data").get<std::vector<double>>());
    c.params.push_back({arr.at("name").get<std::string>(), std::move(t)});
  }
  return c;
}

Checkpoint Checkpoint::from_model(const Model& model, std::uint64_t seed,
                                  const std::string& cfg_hash) {
  Checkpoint c;
  c.model_kind = model.kind();
  c.input_dim = model.input_size();
  c.neurons = model.size_knob();
  c.seed = seed;
  c.cfg_hash = cfg_hash;
  c.params = model.parameters();
  return c;
}

std::unique_ptr<Model> Checkpoint::restore() const {
  auto model = make_model(model_kind, input_dim, neurons, seed);
  auto& target = model->parameters();
  if (target.size() != params.size())
    throw std::runtime_error("checkpoint: parameter list mismatch on restore");
  for (std::size_t i = 0; i < target.size(); ++i) {
    if (target[i].name != params[i].name ||
        !target[i].value.same_shape(params[i].value))
      throw std::runtime_error("checkpoint: parameter '" + params[i].name +
                               "' does not match rebuilt model");
    target[i].value = params[i].value;
  }
  return model;
}

}  // namespace ltcnet
