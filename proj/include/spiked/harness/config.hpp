#pragma once

// Declarative description of a Monte-Carlo experiment, read from JSON.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "spiked/estimators.hpp"
#include "spiked/model.hpp"

namespace spiked::harness {

enum class ExperimentKind { comparison, scaling_collapse, side_info, amp_vs_se };

enum class Algorithm {
    unfold,
    rec_unfold,
    psd,
    power_random,
    power_unfold,
    power_rec_unfold,
    power_psd,
    amp,
    ml,
};

std::string_view kind_name(ExperimentKind k);
std::optional<ExperimentKind> parse_kind(std::string_view s);
std::string_view algorithm_name(Algorithm a);
/// Accepts '_' or '-' as separator.
std::optional<Algorithm> parse_algorithm(std::string_view s);

struct BetaSpec {
    std::vector<double> values;  // explicit list wins when nonempty
    double min = 2.0;
    double max = 10.0;
    int steps = 17;
    bool geometric = false;

    std::vector<double> grid() const;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::comparison;
    std::string experiment_id;
    int k = 3;
    std::vector<std::size_t> n_list;
    BetaSpec beta;
    std::vector<Algorithm> algorithms;
    int replicates = 50;
    std::uint64_t master_seed = 1;
    std::vector<double> gamma_list;   // comparison (amp) and amp_vs_se
    std::vector<double> lambda_list;  // side_info
    int max_iter = 100;
    double tol = 1e-8;
    int restarts = 10;                // ml
    int workers = 1;
    NoiseKind noise = NoiseKind::symmetric;
    AmpMemory amp_memory = AmpMemory::divergence;
    bool large = false;
    bool timing = false;
    std::string output;   // raw CSV path; empty = caller decides
    std::string summary;  // optional JSON summary path
};

/// Malformed configuration; `problems` lists every offending field.
struct ConfigError : std::runtime_error {
    std::vector<std::string> problems;
    explicit ConfigError(std::vector<std::string> p);
};

/// Defaults for a kind, matching the reference experiment grids.
ExperimentConfig default_config(ExperimentKind kind, bool large = false);

/// Unknown fields and out-of-range values raise ConfigError.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

nlohmann::json to_json(const ExperimentConfig& c);

}  // namespace spiked::harness
