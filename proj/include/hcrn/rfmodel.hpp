#pragma once

#include <random>
#include <vector>

#include <Eigen/Dense>

#include "hcrn/scenario.hpp"

namespace hcrn {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

struct RadarParams {
    double transmit_power = 100.0;                // W (20 dBW)
    double antenna_gain = 1000.0;                 // linear (30 dB)
    double wavelength = kSpeedOfLight / 2.4e9;    // m
    double rcs = 100.0;                           // m^2
    double noise_power = 1.380649e-23 * 290.0 * 20e6;  // W, kTB over one channel

    void validate() const;
};

struct ChannelSet {
    std::vector<double> start_frequencies;  // Hz, strictly increasing
    double bandwidth = 20e6;                // Hz

    int count() const { return static_cast<int>(start_frequencies.size()); }
    void validate() const;

    /// `n` adjacent channels starting at `first_start`.
    static ChannelSet contiguous(int n, double first_start, double bandwidth);
};

enum class DriftModel { static_field, log_random_walk };

/// Interference power P_i seen by node m in channel n is base_power[n] * per_node_scale(m, n).
struct InterferenceField {
    std::vector<double> base_power;   // W, length N
    Eigen::MatrixXd per_node_scale;   // M x N, positive
    bool ordering_preserving = true;
    DriftModel drift = DriftModel::static_field;
    double drift_step_db = 0.0;

    int node_count() const { return static_cast<int>(per_node_scale.rows()); }
    int channel_count() const { return static_cast<int>(base_power.size()); }
    double power(int node, int channel) const;
    Eigen::MatrixXd effective_powers() const;

    /// True when every row of the effective power matrix ranks channels identically.
    bool rank_order_consistent() const;

    /// One CPI of drift. No-op for a static field.
    void advance(std::mt19937_64& rng);
};

struct InterferenceDrawSpec {
    double reference_level_dbw = -107.0;  // centre of the span
    double span_db = 15.0;
    bool ordering_preserving = true;
    double per_node_std_db = 3.0;         // used only when ordering is relaxed
    DriftModel drift = DriftModel::static_field;
    double drift_step_db = 0.1;
};

/// Base powers log-uniform over [ref - span/2, ref + span/2] dBW. With ordering relaxed,
/// each (node, channel) gets an independent log-normal multiplier.
InterferenceField draw_interference(std::mt19937_64& rng, const InterferenceDrawSpec& spec,
                                    int node_count, int channel_count);

struct SinrEstimateModel {
    enum class Mode { fixed, proportional };
    Mode mode = Mode::proportional;
    double value = 0.1;     // sigma_gamma (fixed) or fraction of gamma (proportional)
    double floor = 1e-12;   // estimates are truncated below at this positive value

    double sigma(double gamma) const { return mode == Mode::fixed ? value : value * gamma; }
};

struct MeasurementSigmas {
    double range = 0.0;            // m
    double radial_velocity = 0.0;  // m/s
    double angle = 0.0;            // rad
};

/// Radar-equation target return power at range r (throws for r <= 0).
double received_power(const RadarParams& params, double range);

/// Same law without the RCS factor, evaluated at a predicted range.
double predicted_power(const RadarParams& params, double predicted_range);

double sinr(double target_power, double interference_power, double noise_power);

/// Channel metric in dB: SINR(dB) minus predicted return power (dB).
double channel_metric(double gamma, double predicted_power_w);

double sample_sinr_estimate(std::mt19937_64& rng, double gamma, const SinrEstimateModel& model);

/// Deterministic form of sample_sinr_estimate given the standard-normal draw `z`.
double sinr_estimate_from_normal(double gamma, const SinrEstimateModel& model, double z);

/// Albersheim's approximation, nonfluctuating target, noncoherent integration of n_pulses.
double detection_probability(double snr, double pfa, int n_pulses);

/// Albersheim's single-look SNR requirement in dB for (pd, pfa, n_pulses).
double albersheim_required_snr_db(double pd, double pfa, int n_pulses);

/// Noise law used for node measurements; every sigma scales as 1/sqrt(2 * gamma_proc).
MeasurementSigmas measurement_sigmas(double gamma_proc, double bandwidth, double wavelength,
                                     double cpi_duration, double aperture_factor);

/// Span centre (dBW) that puts the mean node SINR at `typical_sinr_db` for a target at the
/// middle of its trajectory, averaged over a uniform grid of node positions in the area.
double calibrate_reference_level_dbw(const RadarParams& params, const GeometryConfig& geometry,
                                     int horizon_cpis, double typical_sinr_db);

}  // namespace hcrn
