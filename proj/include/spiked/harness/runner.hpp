#pragma once

// Executes an ExperimentConfig. Work is split into independent cells
// (n, beta[, gamma], replicate); every cell derives its own seeds from the
// master seed, so the sorted record set does not depend on the number of
// workers or on scheduling.

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "spiked/harness/config.hpp"
#include "spiked/harness/records.hpp"
#include "spiked/model.hpp"

namespace spiked::harness {

/// Dispatches on config.kind; records are sorted.
std::vector<RunRecord> run(const ExperimentConfig& config);

std::vector<RunRecord> run_grid(const ExperimentConfig& config);  // comparison, scaling_collapse
std::vector<RunRecord> run_side_info(const ExperimentConfig& config);
std::vector<RunRecord> run_amp_vs_se(const ExperimentConfig& config);

/// Fingerprint of v0 and a strided sample of X.
std::uint64_t instance_hash(const SpikedInstance& inst);

/// Seed of the instance in cell (n, beta, replicate).
std::uint64_t instance_seed(std::uint64_t master, std::size_t n, double beta, int replicate);

nlohmann::json summary_json(const ExperimentConfig& config, const std::vector<RunRecord>& records);

}  // namespace spiked::harness
