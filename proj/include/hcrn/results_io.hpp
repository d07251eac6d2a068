#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "hcrn/config.hpp"
#include "hcrn/engine.hpp"

namespace hcrn {

inline constexpr const char* kCsvHeader =
    "run_id,policy,cpi,chosen_channels,utility_true,utility_opt,regret_inst,regret_cum,"
    "feedback_values,feedback_avg,collisions,loc_error_m";

/// Shortest text that parses back to the same double; "nan" for NaN.
std::string format_double(double x);

/// Writes the header and one row per CPI of every batch, batches in the given order and runs
/// in seed order (run_id = position in the batch).
void write_csv(std::ostream& out, std::span<const BatchResult> batches);

struct CsvRow {
    int run_id = 0;
    std::string policy;
    int cpi = 0;
    std::vector<int> chosen_channels;
    double utility_true = 0.0;
    double utility_opt = 0.0;
    double regret_inst = 0.0;
    double regret_cum = 0.0;
    long long feedback_values = 0;
    double feedback_avg = 0.0;
    int collisions = 0;
    double loc_error_m = 0.0;
};

/// Parses a file written by write_csv. Throws std::runtime_error on a header mismatch.
std::vector<CsvRow> read_csv(std::istream& in);

/// Mean regret and F_a curves plus full and post-convergence error quantiles.
nlohmann::json summary_json(const BatchResult& batch);

/// results.csv, summary.json and config.json under `dir`. Throws std::runtime_error when the
/// directory or a file cannot be written.
void write_result_files(const std::filesystem::path& dir, const ScenarioConfig& cfg,
                        std::span<const BatchResult> batches);

}  // namespace hcrn
