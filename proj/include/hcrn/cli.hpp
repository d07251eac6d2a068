#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hcrn/config.hpp"
#include "hcrn/engine.hpp"

namespace hcrn {

/// Command-line overrides applied on top of a parsed config.
struct Overrides {
    std::optional<std::uint64_t> seed_base;
    std::optional<int> runs;
    std::optional<int> horizon;
    std::optional<std::string> policy;
    std::optional<std::string> out_dir;
    bool no_assumption1 = false;
    bool detection_gating = false;
};

/// Returns a validated copy; raises ConfigError for bad values.
ScenarioConfig apply_overrides(ScenarioConfig cfg, const Overrides& o);

struct ResultFiles {
    std::filesystem::path csv;
    std::filesystem::path summary;
    std::filesystem::path config_echo;
};

ResultFiles cmd_run(const ScenarioConfig& cfg, int threads = 0);

/// All configs must share world parameters; each contributes its own policy. Seeds come
/// from the first config.
ResultFiles cmd_compare(const std::vector<ScenarioConfig>& configs, int threads = 0);

/// Sets the scalar at JSON pointer `param` to each value and runs; outputs go to
/// out_dir/<index>_<value>/.
std::vector<ResultFiles> cmd_sweep(const ScenarioConfig& cfg, const std::string& param,
                                   const std::vector<double>& values, int threads = 0);

std::string cmd_echo_config(const ScenarioConfig& cfg);

}  // namespace hcrn
