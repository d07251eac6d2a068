#include "hcrn/results_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace hcrn {

using nlohmann::json;

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

namespace {

std::string join_channels(const Matching& m) {
    std::string s;
    for (int i = 0; i < m.size(); ++i) {
        if (i) s += ';';
        s += std::to_string(m[i]);
    }
    return s;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream in(line);
    while (std::getline(in, cur, sep)) parts.push_back(cur);
    if (!line.empty() && line.back() == sep) parts.emplace_back();
    return parts;
}

double parse_double(const std::string& s) {
    if (s == "nan") return std::nan("");
    double x = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw std::runtime_error("csv: bad number '" + s + "'");
    return x;
}

json to_json_array(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(std::isnan(x) ? json(nullptr) : json(x));
    return a;
}

json quantile_json(const std::vector<double>& samples) {
    const QuantileSet q = quantiles(samples, kSummaryLevels);
    return {{"levels", q.levels}, {"values", to_json_array(q.values)}, {"count", samples.size()}};
}

}  // namespace

void write_csv(std::ostream& out, std::span<const BatchResult> batches) {
    out << kCsvHeader << '\n';
    for (const auto& batch : batches) {
        const std::string policy(to_string(batch.policy));
        for (std::size_t run = 0; run < batch.runs.size(); ++run) {
            for (const auto& r : batch.runs[run].records) {
                out << run << ',' << policy << ',' << r.cpi << ',' << join_channels(r.chosen) << ','
                    << format_double(r.utility_true) << ',' << format_double(r.utility_opt) << ','
                    << format_double(r.regret_inst) << ',' << format_double(r.regret_cum) << ','
                    << r.feedback_values << ',' << format_double(r.feedback_avg) << ','
                    << r.collisions << ',' << format_double(r.loc_error_m) << '\n';
            }
        }
    }
}

std::vector<CsvRow> read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader)
        throw std::runtime_error("csv: header does not match the results schema");
    std::vector<CsvRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 12) throw std::runtime_error("csv: expected 12 fields");
        CsvRow r;
        r.run_id = std::stoi(f[0]);
        r.policy = f[1];
        r.cpi = std::stoi(f[2]);
        for (const auto& c : split(f[3], ';')) r.chosen_channels.push_back(std::stoi(c));
        r.utility_true = parse_double(f[4]);
        r.utility_opt = parse_double(f[5]);
        r.regret_inst = parse_double(f[6]);
        r.regret_cum = parse_double(f[7]);
        r.feedback_values = std::stoll(f[8]);
        r.feedback_avg = parse_double(f[9]);
        r.collisions = std::stoi(f[10]);
        r.loc_error_m = parse_double(f[11]);
        rows.push_back(std::move(r));
    }
    return rows;
}

json summary_json(const BatchResult& batch) {
    json j;
    j["policy"] = std::string(to_string(batch.policy));
    j["runs"] = batch.runs.size();
    j["horizon"] = batch.mean_regret_cum.size();
    j["convergence_cpi"] = batch.convergence_cpi;
    json seeds = json::array();
    json detected = json::array();
    for (const auto& r : batch.runs) {
        seeds.push_back(r.seed);
        detected.push_back(r.convergence_cpi ? json(*r.convergence_cpi) : json(nullptr));
    }
    j["seeds"] = seeds;
    j["detected_convergence_cpi"] = detected;
    j["mean_regret_cum"] = to_json_array(batch.mean_regret_cum);
    j["mean_feedback_avg"] = to_json_array(batch.mean_feedback_avg);
    j["mean_loc_error_m"] = to_json_array(batch.mean_loc_error);
    j["median_loc_error_m"] = to_json_array(batch.median_loc_error);
    j["error_quantiles_full"] = quantile_json(batch.error_samples_full);
    j["error_quantiles_post"] = quantile_json(batch.error_samples_post);
    return j;
}

void write_result_files(const std::filesystem::path& dir, const ScenarioConfig& cfg,
                        std::span<const BatchResult> batches) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + dir.string());

    auto open = [&](const char* name) {
        std::ofstream f(dir / name, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
        return f;
    };
    {
        auto f = open("results.csv");
        write_csv(f, batches);
        if (!f) throw std::runtime_error("write failed: results.csv");
    }
    {
        json s;
        s["scenario_hash"] = scenario_hash(cfg);
        s["policies"] = json::array();
        for (const auto& b : batches) s["policies"].push_back(summary_json(b));
        auto f = open("summary.json");
        f << s.dump(2) << '\n';
    }
    {
        auto f = open("config.json");
        f << config_to_json(cfg).dump(2) << '\n';
    }
}

}  // namespace hcrn
