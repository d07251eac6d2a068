#pragma once

#include <optional>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "hcrn/rfmodel.hpp"
#include "hcrn/scenario.hpp"

namespace hcrn {

using Vec4 = Eigen::Vector4d;
using Mat2 = Eigen::Matrix2d;
using Mat4 = Eigen::Matrix4d;

struct Measurement {
    int node_id = 0;
    int cpi = 0;
    double range = 0.0;
    double radial_velocity = 0.0;
    double angle = 0.0;
    MeasurementSigmas sigmas;
    bool valid = false;
};

/// State [x, y, vx, vy] with covariance.
struct TrackState {
    Vec4 x = Vec4::Zero();
    Mat4 P = Mat4::Identity();
    int last_update_cpi = -1;

    Vec2 position() const { return x.head<2>(); }
    Vec2 velocity() const { return x.tail<2>(); }
};

struct FilterParams {
    Mat4 F = Mat4::Identity();
    Mat4 Q = Mat4::Zero();
    Vec4 control = Vec4::Zero();  // B*u, held at zero by the engine

    /// Constant-velocity transition with continuous white-acceleration noise of intensity q.
    static FilterParams constant_velocity(double dt, double q);
};

struct MeasurementModel {
    double bandwidth = 20e6;
    double wavelength = kSpeedOfLight / 2.4e9;
    double cpi_duration = 512 * 1.024e-4;
    double aperture_factor = 0.1;
    int pulses_per_cpi = 512;
    bool detection_gating = false;
    double pfa = 1e-6;
};

/// Standard-normal and uniform draws behind one measurement. Drawing these per node per CPI,
/// independent of the channel used, keeps noise realizations common across policies.
struct MeasurementNoise {
    double z_range = 0.0;
    double z_radial_velocity = 0.0;
    double z_angle = 0.0;
    double u_detect = 0.0;

    static MeasurementNoise draw(std::mt19937_64& rng);
};

struct CartesianObservation {
    Vec2 z = Vec2::Zero();
    Mat2 R = Mat2::Identity();
};

Measurement generate_measurement(const MeasurementNoise& noise, const RadarNode& node,
                                 const TargetTruth& truth, double gamma_proc,
                                 const MeasurementModel& model, int cpi, bool collided = false);

Measurement generate_measurement(std::mt19937_64& rng, const RadarNode& node,
                                 const TargetTruth& truth, double gamma_proc,
                                 const MeasurementModel& model, int cpi, bool collided = false);

TrackState kf_predict(const TrackState& state, const FilterParams& params);

/// Position-only update with Joseph-form covariance. Throws std::domain_error when the
/// innovation covariance is not positive definite.
TrackState kf_update(const TrackState& state, const Vec2& z, const Mat2& R);

/// Converts (range, angle) to a Cartesian fix with first-order covariance.
CartesianObservation polar_to_cartesian(const Position2D& node_position, const Measurement& m);

/// Predict, then sequentially apply each valid measurement in node-id order.
TrackState cc_fuse(std::span<const Measurement> measurements, std::span<const RadarNode> nodes,
                   const TrackState& track, const FilterParams& params);

double predict_range(const TrackState& track, const Position2D& node_position, int steps_ahead,
                     const FilterParams& params);

struct TrackPrior {
    double position_variance = 1e3;  // m^2
    double velocity_variance = 1e4;  // m^2/s^2
};

/// Information-weighted mean of the valid fixes with zero velocity; nullopt when none valid.
std::optional<TrackState> initialize_track(std::span<const Measurement> measurements,
                                           std::span<const RadarNode> nodes, int cpi,
                                           const TrackPrior& prior);

/// Eigenvalues >= -1e-9 * trace and symmetric to 1e-12 relative.
bool is_valid_covariance(const Mat4& P);

/// Initialise-or-fuse wrapper shared by the coordinator and the per-node filters.
class Tracker {
public:
    Tracker(FilterParams params, TrackPrior prior) : params_(std::move(params)), prior_(prior) {}

    void step(std::span<const Measurement> measurements, std::span<const RadarNode> nodes, int cpi);

    bool initialized() const { return state_.has_value(); }
    const TrackState& state() const { return *state_; }
    const FilterParams& params() const { return params_; }
    std::optional<double> predicted_range(const Position2D& node_position, int steps_ahead) const;

private:
    FilterParams params_;
    TrackPrior prior_;
    std::optional<TrackState> state_;
};

}  // namespace hcrn
