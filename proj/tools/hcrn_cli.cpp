// hcrn: run, compare and sweep radar network simulations.
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "hcrn/cli.hpp"
#include "hcrn/config.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

struct CommonFlags {
    std::vector<std::string> configs;
    std::optional<std::uint64_t> seed_base;
    std::optional<int> runs;
    std::optional<int> horizon;
    std::optional<std::string> policy;
    std::optional<std::string> out;
    bool no_assumption1 = false;
    bool detection_gating = false;
    int threads = 0;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool many_configs) {
    if (many_configs)
        cmd->add_option("--config", f.configs, "scenario JSON (repeat to compare configs)");
    else
        cmd->add_option("--config", f.configs, "scenario JSON")->expected(0, 1);
    cmd->add_option("--seed-base", f.seed_base, "first seed; run i uses seed-base + i");
    cmd->add_option("--runs", f.runs, "number of Monte-Carlo runs");
    cmd->add_option("--horizon", f.horizon, "CPIs per run");
    cmd->add_option("--policy", f.policy,
                    many_configs ? "comma-separated policies, or 'all'" : "policy name");
    cmd->add_option("--out", f.out, "output directory");
    cmd->add_flag("--no-assumption1", f.no_assumption1, "per-node channel ordering may differ");
    cmd->add_flag("--detection-gating", f.detection_gating, "drop measurements by Pd draw");
    cmd->add_option("--threads", f.threads, "worker threads (0 = hardware)");
}

hcrn::ScenarioConfig load(const std::string& path) {
    if (path.empty()) return hcrn::config_from_json(nlohmann::json::object());
    return hcrn::parse_config(path);
}

hcrn::Overrides overrides_of(const CommonFlags& f) {
    hcrn::Overrides o;
    o.seed_base = f.seed_base;
    o.runs = f.runs;
    o.horizon = f.horizon;
    o.policy = f.policy;
    o.out_dir = f.out;
    o.no_assumption1 = f.no_assumption1;
    o.detection_gating = f.detection_gating;
    return o;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cognitive radar network simulator"};
    app.require_subcommand(1);

    CommonFlags run_f, cmp_f, sweep_f, echo_f;
    auto* run = app.add_subcommand("run", "run one policy over a batch of seeds");
    add_common(run, run_f, false);
    auto* cmp = app.add_subcommand("compare", "run several policies on identical worlds");
    add_common(cmp, cmp_f, true);
    auto* sweep = app.add_subcommand("sweep", "vary one scalar config field over a list");
    add_common(sweep, sweep_f, false);
    std::string sweep_param;
    std::vector<double> sweep_values;
    sweep->add_option("--param", sweep_param, "JSON pointer, e.g. /interference/span_db")->required();
    sweep->add_option("--values", sweep_values, "values to try")->required()->delimiter(',');
    auto* echo = app.add_subcommand("echo-config", "print the fully resolved config");
    add_common(echo, echo_f, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (run->parsed()) {
            auto cfg = hcrn::apply_overrides(load(run_f.configs.empty() ? "" : run_f.configs[0]),
                                             overrides_of(run_f));
            const auto files = hcrn::cmd_run(cfg, run_f.threads);
            std::cout << files.csv.string() << '\n';
        } else if (cmp->parsed()) {
            std::vector<hcrn::ScenarioConfig> configs;
            auto o = overrides_of(cmp_f);
            o.policy.reset();
            if (cmp_f.configs.size() > 1) {
                for (const auto& p : cmp_f.configs) configs.push_back(hcrn::apply_overrides(load(p), o));
            } else {
                const auto base =
                    hcrn::apply_overrides(load(cmp_f.configs.empty() ? "" : cmp_f.configs[0]), o);
                std::vector<std::string> names;
                if (!cmp_f.policy || *cmp_f.policy == "all") {
                    for (auto k : hcrn::kAllPolicies) names.emplace_back(hcrn::to_string(k));
                } else {
                    names = split_list(*cmp_f.policy);
                }
                for (const auto& n : names) {
                    hcrn::Overrides po;
                    po.policy = n;
                    configs.push_back(hcrn::apply_overrides(base, po));
                }
            }
            const auto files = hcrn::cmd_compare(configs, cmp_f.threads);
            std::cout << files.csv.string() << '\n';
        } else if (sweep->parsed()) {
            auto cfg = hcrn::apply_overrides(
                load(sweep_f.configs.empty() ? "" : sweep_f.configs[0]), overrides_of(sweep_f));
            for (const auto& f : hcrn::cmd_sweep(cfg, sweep_param, sweep_values, sweep_f.threads))
                std::cout << f.csv.string() << '\n';
        } else if (echo->parsed()) {
            auto cfg = hcrn::apply_overrides(load(echo_f.configs.empty() ? "" : echo_f.configs[0]),
                                             overrides_of(echo_f));
            std::cout << hcrn::cmd_echo_config(cfg) << '\n';
        }
    } catch (const hcrn::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntimeError;
    }
    return kOk;
}
