#include "hcrn/rfmodel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace hcrn {

namespace {

constexpr double kFourPiCubed = (4.0 * M_PI) * (4.0 * M_PI) * (4.0 * M_PI);

void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v))
        throw std::invalid_argument(std::string(what) + " must be positive and finite");
}

}  // namespace

void RadarParams::validate() const {
    require_positive(transmit_power, "transmit_power");
    require_positive(antenna_gain, "antenna_gain");
    require_positive(wavelength, "wavelength");
    require_positive(rcs, "rcs");
    require_positive(noise_power, "noise_power");
}

void ChannelSet::validate() const {
    require_positive(bandwidth, "bandwidth");
    if (start_frequencies.empty()) throw std::invalid_argument("channel set is empty");
    for (std::size_t i = 1; i < start_frequencies.size(); ++i) {
        if (start_frequencies[i] - start_frequencies[i - 1] < bandwidth)
            throw std::invalid_argument("channels must be increasing and non-overlapping");
    }
}

ChannelSet ChannelSet::contiguous(int n, double first_start, double bandwidth) {
    ChannelSet set;
    set.bandwidth = bandwidth;
    for (int i = 0; i < n; ++i) set.start_frequencies.push_back(first_start + i * bandwidth);
    return set;
}

double InterferenceField::power(int node, int channel) const {
    return base_power.at(static_cast<std::size_t>(channel)) * per_node_scale(node, channel);
}

Eigen::MatrixXd InterferenceField::effective_powers() const {
    Eigen::MatrixXd p = per_node_scale;
    for (int n = 0; n < channel_count(); ++n) p.col(n) *= base_power[static_cast<std::size_t>(n)];
    return p;
}

bool InterferenceField::rank_order_consistent() const {
    const Eigen::MatrixXd p = effective_powers();
    for (int m = 1; m < p.rows(); ++m) {
        for (int a = 0; a < p.cols(); ++a) {
            for (int b = a + 1; b < p.cols(); ++b) {
                const double d0 = p(0, a) - p(0, b);
                const double dm = p(m, a) - p(m, b);
                if ((d0 > 0) != (dm > 0) || (d0 < 0) != (dm < 0)) return false;
            }
        }
    }
    return true;
}

void InterferenceField::advance(std::mt19937_64& rng) {
    if (drift == DriftModel::static_field) return;
    std::normal_distribution<double> step(0.0, drift_step_db);
    for (double& p : base_power) p *= db_to_linear(step(rng));
}

InterferenceField draw_interference(std::mt19937_64& rng, const InterferenceDrawSpec& spec,
                                    int node_count, int channel_count) {
    if (node_count < 1 || channel_count < 1)
        throw std::invalid_argument("draw_interference: empty field");
    if (spec.span_db < 0.0) throw std::invalid_argument("draw_interference: negative span");
    InterferenceField field;
    field.ordering_preserving = spec.ordering_preserving;
    field.drift = spec.drift;
    field.drift_step_db = spec.drift_step_db;

    std::uniform_real_distribution<double> u(-0.5, 0.5);
    field.base_power.resize(static_cast<std::size_t>(channel_count));
    for (double& p : field.base_power)
        p = db_to_linear(spec.reference_level_dbw + spec.span_db * u(rng));

    field.per_node_scale = Eigen::MatrixXd::Ones(node_count, channel_count);
    if (!spec.ordering_preserving) {
        std::normal_distribution<double> perturb_db(0.0, spec.per_node_std_db);
        for (int m = 0; m < node_count; ++m)
            for (int n = 0; n < channel_count; ++n)
                field.per_node_scale(m, n) = db_to_linear(perturb_db(rng));
    }
    return field;
}

double received_power(const RadarParams& params, double range) {
    if (!(range > 0.0)) throw std::invalid_argument("received_power: range must be positive");
    const double g = params.antenna_gain;
    const double lam = params.wavelength;
    return params.transmit_power * g * g * lam * lam * params.rcs /
           (kFourPiCubed * std::pow(range, 4));
}

double predicted_power(const RadarParams& params, double predicted_range) {
    if (!(predicted_range > 0.0))
        throw std::invalid_argument("predicted_power: range must be positive");
    const double g = params.antenna_gain;
    const double lam = params.wavelength;
    return params.transmit_power * g * g * lam * lam / (kFourPiCubed * std::pow(predicted_range, 4));
}

double sinr(double target_power, double interference_power, double noise_power) {
    if (interference_power < 0.0) throw std::invalid_argument("sinr: negative interference");
    if (!(noise_power > 0.0)) throw std::invalid_argument("sinr: noise power must be positive");
    return target_power / (interference_power + noise_power);
}

double channel_metric(double gamma, double predicted_power_w) {
    if (!(gamma > 0.0) || !(predicted_power_w > 0.0))
        throw std::invalid_argument("channel_metric: inputs must be positive");
    return linear_to_db(gamma) - linear_to_db(predicted_power_w);
}

double sinr_estimate_from_normal(double gamma, const SinrEstimateModel& model, double z) {
    const double est = gamma + model.sigma(gamma) * z;
    return std::max(est, model.floor);
}

double sample_sinr_estimate(std::mt19937_64& rng, double gamma, const SinrEstimateModel& model) {
    if (!(gamma > 0.0)) throw std::invalid_argument("sample_sinr_estimate: gamma must be positive");
    if (model.sigma(gamma) == 0.0) return std::max(gamma, model.floor);
    std::normal_distribution<double> z(0.0, 1.0);
    return sinr_estimate_from_normal(gamma, model, z(rng));
}

double albersheim_required_snr_db(double pd, double pfa, int n_pulses) {
    if (!(pfa > 0.0 && pfa < 1.0)) throw std::invalid_argument("pfa must be in (0, 1)");
    if (!(pd > 0.0 && pd < 1.0)) throw std::invalid_argument("pd must be in (0, 1)");
    if (n_pulses < 1) throw std::invalid_argument("n_pulses must be >= 1");
    const double a = std::log(0.62 / pfa);
    const double b = std::log(pd / (1.0 - pd));
    const double n = n_pulses;
    return -5.0 * std::log10(n) +
           (6.2 + 4.54 / std::sqrt(n + 0.44)) * std::log10(a + 0.12 * a * b + 1.7 * b);
}

double detection_probability(double snr, double pfa, int n_pulses) {
    if (!(pfa > 0.0 && pfa < 1.0)) throw std::invalid_argument("pfa must be in (0, 1)");
    if (n_pulses < 1) throw std::invalid_argument("n_pulses must be >= 1");
    if (!(snr > 0.0)) throw std::invalid_argument("snr must be positive");
    const double n = n_pulses;
    const double a = std::log(0.62 / pfa);
    const double z = (linear_to_db(snr) + 5.0 * std::log10(n)) / (6.2 + 4.54 / std::sqrt(n + 0.44));
    const double x = std::pow(10.0, z);
    const double b = (x - a) / (0.12 * a + 1.7);
    return 1.0 / (1.0 + std::exp(-b));
}

MeasurementSigmas measurement_sigmas(double gamma_proc, double bandwidth, double wavelength,
                                     double cpi_duration, double aperture_factor) {
    require_positive(gamma_proc, "gamma_proc");
    require_positive(bandwidth, "bandwidth");
    require_positive(wavelength, "wavelength");
    require_positive(cpi_duration, "cpi_duration");
    require_positive(aperture_factor, "aperture_factor");
    const double root = std::sqrt(2.0 * gamma_proc);
    return {kSpeedOfLight / (2.0 * bandwidth * root), wavelength / (2.0 * cpi_duration * root),
            aperture_factor / root};
}

double calibrate_reference_level_dbw(const RadarParams& params, const GeometryConfig& geometry,
                                     int horizon_cpis, double typical_sinr_db) {
    params.validate();
    geometry.validate();
    const TargetTruth start{geometry.target_initial_position, geometry.target_velocity};
    const double mid_time = 0.5 * std::max(horizon_cpis, 1) * geometry.cpi_duration();
    const Position2D mid = propagate_target(start, mid_time).position;

    constexpr int kGrid = 64;
    double sum_db = 0.0;
    int count = 0;
    for (int i = 0; i < kGrid; ++i) {
        for (int j = 0; j < kGrid; ++j) {
            const Position2D p((i + 0.5) * geometry.area_size / kGrid,
                               (j + 0.5) * geometry.area_size / kGrid);
            const double r = (mid - p).norm();
            if (r <= 0.0) continue;
            sum_db += linear_to_db(received_power(params, r));
            ++count;
        }
    }
    const double mean_signal_db = sum_db / count;
    const double total_interference = db_to_linear(mean_signal_db - typical_sinr_db);
    const double interference = total_interference - params.noise_power;
    if (!(interference > 0.0))
        throw std::invalid_argument("typical SINR is unreachable above the noise floor");
    return linear_to_db(interference);
}

}  // namespace hcrn
