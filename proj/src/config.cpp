#include "hcrn/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace hcrn {

using nlohmann::json;

namespace {

constexpr double kBoltzmann = 1.380649e-23;

// Pulls typed fields out of one JSON object and rejects keys nobody asked for.
class ObjectReader {
public:
    ObjectReader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j_.is_object()) throw ConfigError(where_ + ": expected a JSON object");
    }

    template <typename T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        if (!j_.contains(key)) return;
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception&) {
            throw ConfigError(where_ + "." + key + ": wrong type");
        }
    }

    void get_vec2(const char* key, Vec2& out) {
        seen_.insert(key);
        if (!j_.contains(key)) return;
        const json& v = j_.at(key);
        if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
            throw ConfigError(where_ + "." + key + ": expected [x, y]");
        out = Vec2(v[0].get<double>(), v[1].get<double>());
    }

    const json* child(const char* key) {
        seen_.insert(key);
        return j_.contains(key) ? &j_.at(key) : nullptr;
    }

    void finish() const {
        for (const auto& [key, value] : j_.items())
            if (!seen_.count(key)) throw ConfigError(where_ + ": unknown key '" + key + "'");
    }

private:
    const json& j_;
    std::string where_;
    std::set<std::string> seen_;
};

DriftModel parse_drift(const std::string& s) {
    if (s == "static") return DriftModel::static_field;
    if (s == "log_random_walk") return DriftModel::log_random_walk;
    throw ConfigError("interference.drift: expected 'static' or 'log_random_walk'");
}

std::string drift_name(DriftModel d) {
    return d == DriftModel::static_field ? "static" : "log_random_walk";
}

void require(bool ok, const std::string& message) {
    if (!ok) throw ConfigError(message);
}

bool finite_positive(double x) { return std::isfinite(x) && x > 0.0; }

}  // namespace

RadarParams ScenarioConfig::radar_params() const {
    RadarParams p;
    p.transmit_power = db_to_linear(rf.transmit_power_dbw);
    p.antenna_gain = db_to_linear(rf.antenna_gain_db);
    p.wavelength = kSpeedOfLight / rf.carrier_frequency_hz;
    p.rcs = rf.rcs_m2;
    p.noise_power = kBoltzmann * rf.noise_temperature_k * rf.channel_bandwidth_hz;
    return p;
}

ChannelSet ScenarioConfig::channel_set() const {
    return ChannelSet::contiguous(rf.channel_count, rf.first_channel_start_hz, rf.channel_bandwidth_hz);
}

FilterParams ScenarioConfig::filter_params() const {
    return FilterParams::constant_velocity(geometry.cpi_duration(), tracking.process_noise);
}

TrackPrior ScenarioConfig::track_prior() const {
    return {tracking.initial_position_variance, tracking.initial_velocity_variance};
}

MeasurementModel ScenarioConfig::measurement_model() const {
    MeasurementModel m;
    m.bandwidth = rf.channel_bandwidth_hz;
    m.wavelength = kSpeedOfLight / rf.carrier_frequency_hz;
    m.cpi_duration = geometry.cpi_duration();
    m.aperture_factor = tracking.aperture_factor;
    m.pulses_per_cpi = geometry.pris_per_cpi;
    m.detection_gating = detection_gating;
    return m;
}

InterferenceDrawSpec ScenarioConfig::interference_spec() const {
    InterferenceDrawSpec s;
    s.reference_level_dbw = interference.reference_level_dbw
                                ? *interference.reference_level_dbw
                                : calibrate_reference_level_dbw(radar_params(), geometry, horizon,
                                                                interference.typical_sinr_db);
    s.span_db = interference.span_db;
    s.ordering_preserving = assumption1;
    s.per_node_std_db = interference.per_node_std_db;
    s.drift = interference.drift;
    s.drift_step_db = interference.drift_step_db;
    return s;
}

void ScenarioConfig::validate() const {
    require(geometry.node_count >= 1, "geometry.node_count must be >= 1");
    require(rf.channel_count >= 1, "rf.channel_count must be >= 1");
    require(geometry.node_count <= rf.channel_count, "matchings require M ≤ N");
    require(finite_positive(geometry.area_size), "geometry.area_size_m must be positive");
    require(geometry.pris_per_cpi >= 1, "geometry.pris_per_cpi must be >= 1");
    require(finite_positive(geometry.pri_duration), "geometry.pri_duration_s must be positive");
    require(geometry.target_initial_position.allFinite() && geometry.target_velocity.allFinite(),
            "geometry target state must be finite");
    require(std::isfinite(rf.transmit_power_dbw), "rf.transmit_power_dbw must be finite");
    require(std::isfinite(rf.antenna_gain_db), "rf.antenna_gain_db must be finite");
    require(finite_positive(rf.carrier_frequency_hz), "rf.carrier_frequency_hz must be positive");
    require(finite_positive(rf.rcs_m2), "rf.rcs_m2 must be positive");
    require(finite_positive(rf.noise_temperature_k), "rf.noise_temperature_k must be positive");
    require(finite_positive(rf.first_channel_start_hz), "rf.first_channel_start_hz must be positive");
    require(finite_positive(rf.channel_bandwidth_hz), "rf.channel_bandwidth_hz must be positive");
    require(interference.span_db >= 0.0, "interference.span_db must be >= 0");
    require(interference.per_node_std_db >= 0.0, "interference.per_node_std_db must be >= 0");
    require(interference.drift_step_db >= 0.0, "interference.drift_step_db must be >= 0");
    require(std::isfinite(interference.typical_sinr_db), "interference.typical_sinr_db must be finite");
    require(sinr_estimate.value >= 0.0, "sinr_estimate.value must be >= 0");
    require(finite_positive(sinr_estimate.floor), "sinr_estimate.floor must be positive");
    require(tracking.process_noise >= 0.0, "tracking.process_noise must be >= 0");
    require(finite_positive(tracking.aperture_factor), "tracking.aperture_factor must be positive");
    require(finite_positive(tracking.initial_position_variance),
            "tracking.initial_position_variance must be positive");
    require(finite_positive(tracking.initial_velocity_variance),
            "tracking.initial_velocity_variance must be positive");
    require(policy_params.confidence >= 0.0, "policy.confidence must be >= 0");
    require(policy_params.ewma_alpha > 0.0 && policy_params.ewma_alpha <= 1.0,
            "policy.ewma_alpha must be in (0, 1]");
    require(policy_params.mc_explore_cpis >= 1, "policy.mc_explore_cpis must be >= 1");
    require(policy_params.predict_ahead >= 0, "policy.predict_ahead must be >= 0");
    require(policy_params.random_list_length >= 1, "policy.random_list_length must be >= 1");
    require(policy_params.max_sweeps >= 1, "policy.max_sweeps must be >= 1");
    require(policy_params.max_backoff_exponent >= 0 && policy_params.max_backoff_exponent <= 20,
            "policy.max_backoff_exponent must be in [0, 20]");
    require(horizon >= 0, "horizon must be >= 0");
    require(runs >= 1, "runs must be >= 1");
    require(convergence_cpi >= 0, "convergence_cpi must be >= 0");
}

bool ScenarioConfig::operator==(const ScenarioConfig& other) const {
    return config_to_json(*this) == config_to_json(other);
}

ScenarioConfig config_from_json(const json& j) {
    ScenarioConfig cfg;
    ObjectReader root(j, "config");

    if (const json* g = root.child("geometry")) {
        ObjectReader r(*g, "geometry");
        r.get("area_size_m", cfg.geometry.area_size);
        r.get("node_count", cfg.geometry.node_count);
        r.get_vec2("target_initial_position_m", cfg.geometry.target_initial_position);
        r.get_vec2("target_velocity_mps", cfg.geometry.target_velocity);
        r.get("pris_per_cpi", cfg.geometry.pris_per_cpi);
        r.get("pri_duration_s", cfg.geometry.pri_duration);
        r.finish();
    }
    if (const json* f = root.child("rf")) {
        ObjectReader r(*f, "rf");
        r.get("transmit_power_dbw", cfg.rf.transmit_power_dbw);
        r.get("antenna_gain_db", cfg.rf.antenna_gain_db);
        r.get("carrier_frequency_hz", cfg.rf.carrier_frequency_hz);
        r.get("rcs_m2", cfg.rf.rcs_m2);
        r.get("noise_temperature_k", cfg.rf.noise_temperature_k);
        r.get("channel_count", cfg.rf.channel_count);
        r.get("first_channel_start_hz", cfg.rf.first_channel_start_hz);
        r.get("channel_bandwidth_hz", cfg.rf.channel_bandwidth_hz);
        r.finish();
    }
    if (const json* i = root.child("interference")) {
        ObjectReader r(*i, "interference");
        r.get("typical_sinr_db", cfg.interference.typical_sinr_db);
        if (const json* ref = r.child("reference_level_dbw"); ref && !ref->is_null()) {
            if (!ref->is_number()) throw ConfigError("interference.reference_level_dbw: wrong type");
            cfg.interference.reference_level_dbw = ref->get<double>();
        }
        r.get("span_db", cfg.interference.span_db);
        r.get("per_node_std_db", cfg.interference.per_node_std_db);
        std::string drift = drift_name(cfg.interference.drift);
        r.get("drift", drift);
        cfg.interference.drift = parse_drift(drift);
        r.get("drift_step_db", cfg.interference.drift_step_db);
        r.finish();
    }
    if (const json* s = root.child("sinr_estimate")) {
        ObjectReader r(*s, "sinr_estimate");
        std::string mode = cfg.sinr_estimate.mode == SinrEstimateModel::Mode::fixed ? "fixed" : "proportional";
        r.get("mode", mode);
        if (mode == "fixed")
            cfg.sinr_estimate.mode = SinrEstimateModel::Mode::fixed;
        else if (mode == "proportional")
            cfg.sinr_estimate.mode = SinrEstimateModel::Mode::proportional;
        else
            throw ConfigError("sinr_estimate.mode: expected 'fixed' or 'proportional'");
        r.get("value", cfg.sinr_estimate.value);
        r.get("floor", cfg.sinr_estimate.floor);
        r.finish();
    }
    if (const json* t = root.child("tracking")) {
        ObjectReader r(*t, "tracking");
        r.get("process_noise", cfg.tracking.process_noise);
        r.get("aperture_factor", cfg.tracking.aperture_factor);
        r.get("initial_position_variance", cfg.tracking.initial_position_variance);
        r.get("initial_velocity_variance", cfg.tracking.initial_velocity_variance);
        r.finish();
    }
    if (const json* p = root.child("policy")) {
        ObjectReader r(*p, "policy");
        std::string kind(to_string(cfg.policy));
        r.get("kind", kind);
        try {
            cfg.policy = parse_policy_kind(kind);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("policy.kind: ") + e.what());
        }
        r.get("confidence", cfg.policy_params.confidence);
        r.get("ewma_alpha", cfg.policy_params.ewma_alpha);
        r.get("mc_explore_cpis", cfg.policy_params.mc_explore_cpis);
        r.get("predict_ahead", cfg.policy_params.predict_ahead);
        r.get("random_list_length", cfg.policy_params.random_list_length);
        r.get("max_sweeps", cfg.policy_params.max_sweeps);
        r.get("max_backoff_exponent", cfg.policy_params.max_backoff_exponent);
        r.finish();
    }
    root.get("horizon", cfg.horizon);
    root.get("runs", cfg.runs);
    root.get("seed_base", cfg.seed_base);
    root.get("convergence_cpi", cfg.convergence_cpi);
    root.get("assumption1", cfg.assumption1);
    root.get("detection_gating", cfg.detection_gating);
    root.get("output_dir", cfg.output_dir);
    root.finish();

    cfg.validate();
    return cfg;
}

json config_to_json(const ScenarioConfig& cfg) {
    json j;
    j["geometry"] = {
        {"area_size_m", cfg.geometry.area_size},
        {"node_count", cfg.geometry.node_count},
        {"target_initial_position_m",
         {cfg.geometry.target_initial_position.x(), cfg.geometry.target_initial_position.y()}},
        {"target_velocity_mps", {cfg.geometry.target_velocity.x(), cfg.geometry.target_velocity.y()}},
        {"pris_per_cpi", cfg.geometry.pris_per_cpi},
        {"pri_duration_s", cfg.geometry.pri_duration},
    };
    j["rf"] = {
        {"transmit_power_dbw", cfg.rf.transmit_power_dbw},
        {"antenna_gain_db", cfg.rf.antenna_gain_db},
        {"carrier_frequency_hz", cfg.rf.carrier_frequency_hz},
        {"rcs_m2", cfg.rf.rcs_m2},
        {"noise_temperature_k", cfg.rf.noise_temperature_k},
        {"channel_count", cfg.rf.channel_count},
        {"first_channel_start_hz", cfg.rf.first_channel_start_hz},
        {"channel_bandwidth_hz", cfg.rf.channel_bandwidth_hz},
    };
    j["interference"] = {
        {"typical_sinr_db", cfg.interference.typical_sinr_db},
        {"reference_level_dbw", cfg.interference.reference_level_dbw
                                    ? json(*cfg.interference.reference_level_dbw)
                                    : json(nullptr)},
        {"span_db", cfg.interference.span_db},
        {"per_node_std_db", cfg.interference.per_node_std_db},
        {"drift", drift_name(cfg.interference.drift)},
        {"drift_step_db", cfg.interference.drift_step_db},
    };
    j["sinr_estimate"] = {
        {"mode", cfg.sinr_estimate.mode == SinrEstimateModel::Mode::fixed ? "fixed" : "proportional"},
        {"value", cfg.sinr_estimate.value},
        {"floor", cfg.sinr_estimate.floor},
    };
    j["tracking"] = {
        {"process_noise", cfg.tracking.process_noise},
        {"aperture_factor", cfg.tracking.aperture_factor},
        {"initial_position_variance", cfg.tracking.initial_position_variance},
        {"initial_velocity_variance", cfg.tracking.initial_velocity_variance},
    };
    j["policy"] = {
        {"kind", std::string(to_string(cfg.policy))},
        {"confidence", cfg.policy_params.confidence},
        {"ewma_alpha", cfg.policy_params.ewma_alpha},
        {"mc_explore_cpis", cfg.policy_params.mc_explore_cpis},
        {"predict_ahead", cfg.policy_params.predict_ahead},
        {"random_list_length", cfg.policy_params.random_list_length},
        {"max_sweeps", cfg.policy_params.max_sweeps},
        {"max_backoff_exponent", cfg.policy_params.max_backoff_exponent},
    };
    j["horizon"] = cfg.horizon;
    j["runs"] = cfg.runs;
    j["seed_base"] = cfg.seed_base;
    j["convergence_cpi"] = cfg.convergence_cpi;
    j["assumption1"] = cfg.assumption1;
    j["detection_gating"] = cfg.detection_gating;
    j["output_dir"] = cfg.output_dir;
    return j;
}

ScenarioConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config file not found: " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config is not valid JSON: " + std::string(e.what()));
    }
    return config_from_json(j);
}

json world_parameters(const ScenarioConfig& cfg) {
    json j = config_to_json(cfg);
    j.erase("policy");
    j.erase("output_dir");
    j.erase("runs");
    j.erase("seed_base");
    return j;
}

std::string scenario_hash(const ScenarioConfig& cfg) {
    json j = config_to_json(cfg);
    j.erase("output_dir");  // where results land does not change them
    const std::string text = j.dump();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace hcrn
