#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "json.hpp"

#include "hcrn/policies.hpp"
#include "hcrn/rfmodel.hpp"
#include "hcrn/scenario.hpp"
#include "hcrn/tracking.hpp"

namespace hcrn {

/// Raised for anything wrong with a configuration; the CLI maps it to exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// RF inputs as written in the config (dB where the paper quotes dB).
struct RfConfig {
    double transmit_power_dbw = 20.0;
    double antenna_gain_db = 30.0;
    double carrier_frequency_hz = 2.4e9;
    double rcs_m2 = 100.0;
    double noise_temperature_k = 290.0;
    int channel_count = 8;
    double first_channel_start_hz = 2.34e9;
    double channel_bandwidth_hz = 20e6;
};

struct InterferenceConfig {
    double typical_sinr_db = 12.0;                 // calibration target
    std::optional<double> reference_level_dbw;     // skips calibration when set
    double span_db = 15.0;
    double per_node_std_db = 3.0;
    DriftModel drift = DriftModel::static_field;
    double drift_step_db = 0.1;
};

struct TrackingConfig {
    double process_noise = 1.0;  // white-acceleration intensity q, m^2/s^3
    double aperture_factor = 0.1;
    double initial_position_variance = 1e3;
    double initial_velocity_variance = 1e4;
};

struct ScenarioConfig {
    GeometryConfig geometry;
    RfConfig rf;
    InterferenceConfig interference;
    SinrEstimateModel sinr_estimate;
    TrackingConfig tracking;
    PolicyKind policy = PolicyKind::c_etp;
    PolicyParams policy_params;
    int horizon = 700;
    int runs = 30;
    std::uint64_t seed_base = 1;
    int convergence_cpi = 150;
    bool assumption1 = true;
    bool detection_gating = false;
    std::string output_dir = "out";

    // Derived linear-domain quantities.
    RadarParams radar_params() const;
    ChannelSet channel_set() const;
    FilterParams filter_params() const;
    TrackPrior track_prior() const;
    MeasurementModel measurement_model() const;
    /// Interference draw spec; calibrates the reference level unless one is configured.
    InterferenceDrawSpec interference_spec() const;

    /// Throws ConfigError with a specific diagnostic.
    void validate() const;

    bool operator==(const ScenarioConfig& other) const;
};

ScenarioConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ScenarioConfig& cfg);

/// Reads and validates a config file. Missing file, bad JSON and schema violations each raise
/// ConfigError with a distinct message.
ScenarioConfig parse_config(const std::string& path);

/// JSON of the parameters that define the world realization (policy fields excluded).
nlohmann::json world_parameters(const ScenarioConfig& cfg);

/// FNV-1a hash of the canonical config JSON without the output directory, as 16 hex digits.
std::string scenario_hash(const ScenarioConfig& cfg);

}  // namespace hcrn
