#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ltcnet/model.hpp"

namespace ltcnet {

// Flat named-array container for model parameters plus run identity.
struct Checkpoint {
  std::string model_kind;
  std::size_t input_dim = 0;
  std::size_t neurons = 0;
  std::uint64_t seed = 0;
  std::string cfg_hash;
  std::vector<NamedTensor> params;

  void save(const std::string& path) const;
  static Checkpoint load(const std::string& path);

  static Checkpoint from_model(const Model& model, std::uint64_t seed,
                               const std::string& cfg_hash);
  // Rebuilds the model (wiring regenerated from kind/dims/seed) and loads
  // the stored parameter values into it.
  std::unique_ptr<Model> restore() const;
};

// FNV-1a 64-bit over a canonical string, hex-encoded; keys run artifacts.
std::string stable_hash(const std::string& text);

}  // namespace ltcnet
