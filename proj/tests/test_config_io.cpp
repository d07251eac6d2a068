#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "hcrn/cli.hpp"
#include "hcrn/config.hpp"
#include "hcrn/results_io.hpp"

using namespace hcrn;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("hcrn_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string error_of(const json& j) {
    try {
        config_from_json(j).validate();
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("empty config gives the default scenario") {
    const auto cfg = config_from_json(json::object());
    CHECK(cfg.geometry.node_count == 5);
    CHECK(cfg.rf.channel_count == 8);
    CHECK(cfg.horizon == 700);
    CHECK(cfg.runs == 30);
    CHECK(cfg.rf.transmit_power_dbw == 20.0);
    CHECK(cfg.rf.antenna_gain_db == 30.0);
    CHECK(cfg.rf.rcs_m2 == 100.0);
    CHECK(cfg.rf.carrier_frequency_hz == 2.4e9);
    CHECK(cfg.geometry.pri_duration == 1.024e-4);
    CHECK(cfg.geometry.pris_per_cpi == 512);
    CHECK(cfg.geometry.area_size == 10000.0);
    CHECK(cfg.geometry.target_velocity.norm() == doctest::Approx(200.0));
    CHECK(cfg.tracking.process_noise == 1.0);
    CHECK(cfg.assumption1);
    const auto p = cfg.radar_params();
    CHECK(p.transmit_power == doctest::Approx(100.0));
    CHECK(p.antenna_gain == doctest::Approx(1000.0));
    CHECK(p.wavelength == doctest::Approx(0.12491).epsilon(1e-4));
}

TEST_CASE("distinct diagnostics") {
    CHECK(error_of({{"geometry", {{"node_count", 9}}}}) == "matchings require M ≤ N");
    CHECK(error_of({{"rf", {{"rcs_m2", -1.0}}}}) == "rf.rcs_m2 must be positive");
    CHECK(error_of({{"rf", {{"carrier_frequency_hz", 0.0}}}}) == "rf.carrier_frequency_hz must be positive");
    CHECK(error_of({{"geometry", {{"area_size_m", 0.0}}}}) == "geometry.area_size_m must be positive");
    CHECK(error_of({{"bogus", 1}}) == "config: unknown key 'bogus'");
    CHECK(error_of({{"horizon", "long"}}) == "config.horizon: wrong type");
    CHECK(error_of({{"policy", {{"kind", "greedy"}}}}).find("greedy") != std::string::npos);
    CHECK_THROWS_WITH_AS(parse_config("/nonexistent/cfg.json"), doctest::Contains("not found"), ConfigError);
    const auto dir = scratch("badjson");
    fs::create_directories(dir);
    std::ofstream(dir / "bad.json") << "{ not json";
    CHECK_THROWS_WITH_AS(parse_config((dir / "bad.json").string()), doctest::Contains("not valid JSON"),
                         ConfigError);
}

TEST_CASE("config round-trips through JSON") {
    auto cfg = config_from_json(json::object());
    cfg.policy = PolicyKind::h_etp;
    cfg.horizon = 321;
    cfg.interference.reference_level_dbw = -101.5;
    cfg.interference.drift = DriftModel::log_random_walk;
    cfg.sinr_estimate.mode = SinrEstimateModel::Mode::fixed;
    cfg.assumption1 = false;
    cfg.geometry.target_initial_position = {12.5, -3.0};
    const auto back = config_from_json(config_to_json(cfg));
    CHECK(back == cfg);
    CHECK(back.interference.reference_level_dbw == -101.5);
    CHECK(back.geometry.target_initial_position == cfg.geometry.target_initial_position);

    const auto dir = scratch("roundtrip");
    fs::create_directories(dir);
    std::ofstream(dir / "c.json") << cmd_echo_config(cfg);
    CHECK(parse_config((dir / "c.json").string()) == cfg);
}

TEST_CASE("world parameters ignore policy fields") {
    ScenarioConfig a, b;
    b.policy = PolicyKind::random;
    b.runs = 3;
    b.output_dir = "elsewhere";
    CHECK(world_parameters(a) == world_parameters(b));
    b.rf.rcs_m2 = 5.0;
    CHECK(world_parameters(a) != world_parameters(b));
    CHECK(scenario_hash(a).size() == 16);
    CHECK(scenario_hash(a) != scenario_hash(b));
}

TEST_CASE("overrides") {
    ScenarioConfig cfg;
    Overrides o;
    o.runs = 3;
    o.policy = "mc";
    o.no_assumption1 = true;
    const auto out = apply_overrides(cfg, o);
    CHECK(out.runs == 3);
    CHECK(out.policy == PolicyKind::mc);
    CHECK_FALSE(out.assumption1);
    Overrides bad;
    bad.policy = "nope";
    CHECK_THROWS_AS(apply_overrides(cfg, bad), ConfigError);
    Overrides zero;
    zero.runs = 0;
    CHECK_THROWS_AS(apply_overrides(cfg, zero), ConfigError);
}

TEST_CASE("number formatting round-trips") {
    for (double x : {0.0, 1.0, -2.5, 1e-300, 3.141592653589793, 7.86e-12, 1e300}) {
        const auto s = format_double(x);
        CHECK(std::stod(s) == x);
    }
    CHECK(format_double(std::nan("")) == "nan");
    CHECK(format_double(0.1) == "0.1");
}

TEST_CASE("CSV header and rows") {
    ScenarioConfig cfg;
    cfg.horizon = 2;
    cfg.runs = 1;
    cfg.output_dir = scratch("rows").string();
    cfg.policy = PolicyKind::c_etc;
    const auto files = cmd_run(cfg, 1);
    std::ifstream in(files.csv);
    std::string header;
    std::getline(in, header);
    CHECK(header ==
          "run_id,policy,cpi,chosen_channels,utility_true,utility_opt,regret_inst,regret_cum,"
          "feedback_values,feedback_avg,collisions,loc_error_m");
    int rows = 0;
    for (std::string line; std::getline(in, line);) ++rows;
    CHECK(rows == 2);
    CHECK(fs::exists(files.summary));
    CHECK(fs::exists(files.config_echo));
    CHECK(parse_config(files.config_echo.string()) == cfg);

    std::istringstream wrong("run_id,policy\n");
    CHECK_THROWS(read_csv(wrong));
}

TEST_CASE("CSV parses back to the run records") {
    ScenarioConfig cfg;
    cfg.horizon = 40;
    const auto seeds = seed_list(1, 2);
    std::vector<BatchResult> batches = {run_batch(cfg, seeds, PolicyKind::etp, 1)};
    std::stringstream ss;
    write_csv(ss, batches);
    const auto rows = read_csv(ss);
    REQUIRE(rows.size() == 80);
    for (const auto& row : rows) {
        const auto& rec = batches[0].runs[static_cast<std::size_t>(row.run_id)].records[static_cast<std::size_t>(row.cpi)];
        CHECK(row.policy == "etp");
        CHECK(row.chosen_channels == rec.chosen.channels);
        CHECK(row.regret_cum == rec.regret_cum);
        CHECK(row.feedback_values == rec.feedback_values);
        CHECK(row.collisions == rec.collisions);
        CHECK((std::isnan(rec.loc_error_m) ? std::isnan(row.loc_error_m) : row.loc_error_m == rec.loc_error_m));
    }
}

TEST_CASE("runs are byte-identical") {
    ScenarioConfig cfg;
    cfg.horizon = 50;
    cfg.runs = 3;
    cfg.output_dir = scratch("det_a").string();
    const auto a = cmd_run(cfg, 2);
    cfg.output_dir = scratch("det_b").string();
    const auto b = cmd_run(cfg, 1);
    CHECK(slurp(a.csv) == slurp(b.csv));
    CHECK(slurp(a.summary) == slurp(b.summary));
}

TEST_CASE("summary is recomputable from the CSV") {
    ScenarioConfig cfg;
    cfg.horizon = 200;
    cfg.runs = 4;
    cfg.output_dir = scratch("summary").string();
    cfg.policy = PolicyKind::random;
    const auto files = cmd_run(cfg, 1);
    std::ifstream in(files.csv);
    const auto rows = read_csv(in);
    const json summary = json::parse(slurp(files.summary));
    const json& s = summary.at("policies").at(0);

    std::map<int, double> regret_sum, fa_sum;
    std::vector<double> post;
    for (const auto& r : rows) {
        regret_sum[r.cpi] += r.regret_cum;
        fa_sum[r.cpi] += r.feedback_avg;
        if (r.cpi > cfg.convergence_cpi && !std::isnan(r.loc_error_m)) post.push_back(r.loc_error_m);
    }
    const auto& mean_regret = s.at("mean_regret_cum");
    REQUIRE(mean_regret.size() == 200);
    for (int k = 0; k < 200; ++k) {
        CHECK(mean_regret[k].get<double>() == doctest::Approx(regret_sum[k] / 4.0).epsilon(1e-14));
        CHECK(s.at("mean_feedback_avg")[k].get<double>() == doctest::Approx(fa_sum[k] / 4.0));
    }
    const auto q = quantiles(post, kSummaryLevels);
    const auto& qj = s.at("error_quantiles_post");
    CHECK(qj.at("count").get<std::size_t>() == post.size());
    for (std::size_t i = 0; i < q.values.size(); ++i)
        CHECK(qj.at("values")[i].get<double>() == doctest::Approx(q.values[i]).epsilon(1e-14));
}

TEST_CASE("compare shares worlds and labels every policy") {
    ScenarioConfig base;
    base.horizon = 30;
    base.runs = 2;
    base.output_dir = scratch("compare").string();
    std::vector<ScenarioConfig> configs;
    for (PolicyKind k : kAllPolicies) {
        auto c = base;
        c.policy = k;
        configs.push_back(c);
    }
    const auto files = cmd_compare(configs, 1);
    std::ifstream in(files.csv);
    const auto rows = read_csv(in);
    CHECK(rows.size() == 7u * 2 * 30);
    std::set<std::string> labels;
    std::map<std::pair<int, int>, double> opt;
    for (const auto& r : rows) {
        labels.insert(r.policy);
        if (r.policy == "oracle") CHECK(r.regret_cum == 0.0);
        const auto key = std::pair{r.run_id, r.cpi};
        if (!opt.count(key)) opt[key] = r.utility_opt;
        CHECK(r.utility_opt == opt[key]);
    }
    CHECK(labels.size() == 7);

    auto other = configs;
    other[1].rf.rcs_m2 = 1.0;
    CHECK_THROWS_WITH_AS(cmd_compare(other, 1), doctest::Contains("configs differ in world parameters"),
                         ConfigError);
}

TEST_CASE("sweep writes one output per value") {
    ScenarioConfig cfg;
    cfg.horizon = 10;
    cfg.runs = 1;
    cfg.output_dir = scratch("sweep").string();
    const auto out = cmd_sweep(cfg, "/interference/span_db", {5.0, 10.0}, 1);
    REQUIRE(out.size() == 2);
    CHECK(out[0].csv != out[1].csv);
    CHECK(parse_config(out[1].config_echo.string()).interference.span_db == 10.0);
    CHECK_THROWS_AS(cmd_sweep(cfg, "/nope/value", {1.0}, 1), ConfigError);
}

TEST_CASE("unwritable output path is reported") {
    ScenarioConfig cfg;
    cfg.horizon = 2;
    cfg.runs = 1;
    const auto dir = scratch("blocked");
    fs::create_directories(dir.parent_path());
    std::ofstream(dir) << "a file where a directory should be";
    cfg.output_dir = (dir / "sub").string();
    CHECK_THROWS(cmd_run(cfg, 1));
    fs::remove(dir);
}
