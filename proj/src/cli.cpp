#include "hcrn/cli.hpp"

#include <sstream>

#include "hcrn/results_io.hpp"

namespace hcrn {

using nlohmann::json;

ScenarioConfig apply_overrides(ScenarioConfig cfg, const Overrides& o) {
    if (o.seed_base) cfg.seed_base = *o.seed_base;
    if (o.runs) cfg.runs = *o.runs;
    if (o.horizon) cfg.horizon = *o.horizon;
    if (o.policy) {
        try {
            cfg.policy = parse_policy_kind(*o.policy);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("--policy: ") + e.what());
        }
    }
    if (o.out_dir) cfg.output_dir = *o.out_dir;
    if (o.no_assumption1) cfg.assumption1 = false;
    if (o.detection_gating) cfg.detection_gating = true;
    cfg.validate();
    return cfg;
}

namespace {

ResultFiles files_in(const std::filesystem::path& dir) {
    return {dir / "results.csv", dir / "summary.json", dir / "config.json"};
}

}  // namespace

ResultFiles cmd_run(const ScenarioConfig& cfg, int threads) {
    cfg.validate();
    const auto seeds = seed_list(cfg.seed_base, cfg.runs);
    std::vector<BatchResult> batches;
    batches.push_back(run_batch(cfg, seeds, cfg.policy, threads));
    write_result_files(cfg.output_dir, cfg, batches);
    return files_in(cfg.output_dir);
}

ResultFiles cmd_compare(const std::vector<ScenarioConfig>& configs, int threads) {
    if (configs.empty()) throw ConfigError("compare: no configs given");
    const json world = world_parameters(configs.front());
    for (std::size_t i = 1; i < configs.size(); ++i)
        if (world_parameters(configs[i]) != world)
            throw ConfigError("compare: configs differ in world parameters");
    const auto seeds = seed_list(configs.front().seed_base, configs.front().runs);
    std::vector<BatchResult> batches;
    for (const auto& cfg : configs) batches.push_back(run_batch(cfg, seeds, cfg.policy, threads));
    write_result_files(configs.front().output_dir, configs.front(), batches);
    return files_in(configs.front().output_dir);
}

std::vector<ResultFiles> cmd_sweep(const ScenarioConfig& cfg, const std::string& param,
                                   const std::vector<double>& values, int threads) {
    json base = config_to_json(cfg);
    json::json_pointer ptr;
    try {
        ptr = json::json_pointer(param);
    } catch (const json::exception&) {
        throw ConfigError("sweep: parameter must be a JSON pointer such as /interference/span_db");
    }
    if (!base.contains(ptr) || !base.at(ptr).is_number())
        throw ConfigError("sweep: '" + param + "' is not a numeric config field");
    const bool integral = base.at(ptr).is_number_integer() || base.at(ptr).is_number_unsigned();

    std::vector<ResultFiles> out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        json j = base;
        if (integral)
            j[ptr] = static_cast<long long>(values[i]);
        else
            j[ptr] = values[i];
        std::ostringstream name;
        name << i << '_' << values[i];
        j["output_dir"] = (std::filesystem::path(cfg.output_dir) / name.str()).string();
        out.push_back(cmd_run(config_from_json(j), threads));
    }
    return out;
}

std::string cmd_echo_config(const ScenarioConfig& cfg) { return config_to_json(cfg).dump(2); }

}  // namespace hcrn
