#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ltcnet {

// Forward pass is weighted 1x and backward 2x of flops_per_step; the 3x
// total is an accounting convention, not a measurement.
inline constexpr std::uint64_t kTrainStepFlopWeight = 3;

struct CostLedger {
  std::size_t params = 0;
  std::size_t flops_per_step = 0;
  std::uint64_t flops_total = 0;
  double wall_seconds = 0.0;
  std::optional<double> external_energy_joules;
};

CostLedger ledger_for(std::size_t params, std::size_t flops_per_step,
                      std::size_t train_rows, std::size_t epochs,
                      double wall_seconds);

struct EnergyImport {
  std::map<std::string, double> joules_by_run;  // duplicates summed
  std::vector<std::string> warnings;
};

// CSV with header run_id,joules. Duplicate run ids are summed with a warning.
EnergyImport import_energy(const std::string& csv_path);

}  // namespace ltcnet
