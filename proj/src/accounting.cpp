#include "ltcnet/accounting.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace ltcnet {

CostLedger ledger_for(std::size_t params, std::size_t flops_per_step,
                      std::size_t train_rows, std::size_t epochs,
                      double wall_seconds) {
  CostLedger l;
  l.params = params;
  l.flops_per_step = flops_per_step;
  l.flops_total = static_cast<std::uint64_t>(flops_per_step) * train_rows *
                  epochs * kTrainStepFlopWeight;
  l.wall_seconds = wall_seconds;
  return l;
}

EnergyImport import_energy(const std::string& csv_path) {
  std::ifstream f(csv_path);
  if (!f) throw std::runtime_error("cannot read meter CSV: " + csv_path);
  EnergyImport out;
  std::string line;
  if (!std::getline(f, line)) return out;  // empty file modifies nothing
  if (line != "run_id,joules")
    throw std::runtime_error("meter CSV header must be 'run_id,joules', got '" +
                             line + "'");
  std::size_t lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto comma = line.find(',');
    if (comma == std::string::npos)
      throw std::runtime_error(csv_path + ":" + std::to_string(lineno) +
                               ": malformed row");
    std::string run_id = line.substr(0, comma);
    double joules;
    try {
      joules = std::stod(line.substr(comma + 1));
    } catch (const std::exception&) {
      throw std::runtime_error(csv_path + ":" + std::to_string(lineno) +
                               ": malformed joules value");
    }
    auto [it, fresh] = out.joules_by_run.try_emplace(run_id, 0.0);
    if (!fresh)
      out.warnings.push_back("duplicate run_id '" + run_id + "' summed");
    it->second += joules;
  }
  return out;
}

}  // namespace ltcnet
