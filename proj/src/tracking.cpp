#include "hcrn/tracking.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hcrn {

namespace {

Mat4 symmetrized(const Mat4& P) { return 0.5 * (P + P.transpose()); }

double wrap_angle(double a) {
    a = std::remainder(a, 2.0 * M_PI);
    if (a <= -M_PI) a += 2.0 * M_PI;
    return a;
}

}  // namespace

FilterParams FilterParams::constant_velocity(double dt, double q) {
    if (!(dt > 0.0)) throw std::invalid_argument("constant_velocity: dt must be positive");
    if (q < 0.0) throw std::invalid_argument("constant_velocity: q must be >= 0");
    FilterParams p;
    p.F = Mat4::Identity();
    p.F(0, 2) = dt;
    p.F(1, 3) = dt;
    const double dt2 = dt * dt;
    const double dt3 = dt2 * dt;
    p.Q = Mat4::Zero();
    for (int i = 0; i < 2; ++i) {
        p.Q(i, i) = q * dt3 / 3.0;
        p.Q(i + 2, i + 2) = q * dt;
        p.Q(i, i + 2) = p.Q(i + 2, i) = q * dt2 / 2.0;
    }
    return p;
}

MeasurementNoise MeasurementNoise::draw(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    MeasurementNoise noise;
    noise.z_range = n(rng);
    noise.z_radial_velocity = n(rng);
    noise.z_angle = n(rng);
    noise.u_detect = u(rng);
    return noise;
}

Measurement generate_measurement(const MeasurementNoise& noise, const RadarNode& node,
                                 const TargetTruth& truth, double gamma_proc,
                                 const MeasurementModel& model, int cpi, bool collided) {
    if (!(gamma_proc > 0.0))
        throw std::invalid_argument("generate_measurement: gamma_proc must be positive");
    const Observables obs = true_observables(node, truth);
    Measurement m;
    m.node_id = node.id;
    m.cpi = cpi;
    m.sigmas = measurement_sigmas(gamma_proc, model.bandwidth, model.wavelength,
                                  model.cpi_duration, model.aperture_factor);
    m.range = obs.range + m.sigmas.range * noise.z_range;
    m.radial_velocity = obs.radial_velocity + m.sigmas.radial_velocity * noise.z_radial_velocity;
    m.angle = wrap_angle(obs.angle + m.sigmas.angle * noise.z_angle);
    m.valid = !collided;
    if (m.valid && model.detection_gating) {
        const double gamma_single = gamma_proc / model.pulses_per_cpi;
        const double pd = detection_probability(gamma_single, model.pfa, model.pulses_per_cpi);
        m.valid = noise.u_detect < pd;
    }
    return m;
}

Measurement generate_measurement(std::mt19937_64& rng, const RadarNode& node,
                                 const TargetTruth& truth, double gamma_proc,
                                 const MeasurementModel& model, int cpi, bool collided) {
    return generate_measurement(MeasurementNoise::draw(rng), node, truth, gamma_proc, model, cpi,
                                collided);
}

TrackState kf_predict(const TrackState& state, const FilterParams& params) {
    TrackState out = state;
    out.x = params.F * state.x + params.control;
    out.P = symmetrized(params.F * state.P * params.F.transpose() + params.Q);
    return out;
}

TrackState kf_update(const TrackState& state, const Vec2& z, const Mat2& R) {
    Eigen::Matrix<double, 2, 4> H = Eigen::Matrix<double, 2, 4>::Zero();
    H(0, 0) = 1.0;
    H(1, 1) = 1.0;
    const Mat2 S = H * state.P * H.transpose() + R;
    Eigen::LLT<Mat2> llt(S);
    if (llt.info() != Eigen::Success || !S.allFinite())
        throw std::domain_error("kf_update: innovation covariance is not positive definite");
    const Eigen::Matrix<double, 4, 2> K = llt.solve(H * state.P).transpose();
    const Vec2 innovation = z - H * state.x;

    TrackState out = state;
    out.x = state.x + K * innovation;
    const Mat4 I_KH = Mat4::Identity() - K * H;
    out.P = symmetrized(I_KH * state.P * I_KH.transpose() + K * R * K.transpose());
    return out;
}

CartesianObservation polar_to_cartesian(const Position2D& node_position, const Measurement& m) {
    if (!m.valid) throw std::invalid_argument("polar_to_cartesian: measurement is not valid");
    const double c = std::cos(m.angle);
    const double s = std::sin(m.angle);
    CartesianObservation out;
    out.z = node_position + m.range * Vec2(c, s);
    Mat2 J;
    J << c, -m.range * s, s, m.range * c;
    const Mat2 polar_cov =
        Vec2(m.sigmas.range * m.sigmas.range, m.sigmas.angle * m.sigmas.angle).asDiagonal();
    out.R = J * polar_cov * J.transpose();
    out.R = 0.5 * (out.R + out.R.transpose());
    return out;
}

namespace {

const RadarNode& node_by_id(std::span<const RadarNode> nodes, int id) {
    for (const auto& n : nodes)
        if (n.id == id) return n;
    throw std::out_of_range("unknown node id in measurement");
}

std::vector<const Measurement*> valid_in_node_order(std::span<const Measurement> measurements) {
    std::vector<const Measurement*> valid;
    for (const auto& m : measurements)
        if (m.valid) valid.push_back(&m);
    std::stable_sort(valid.begin(), valid.end(),
                     [](const Measurement* a, const Measurement* b) { return a->node_id < b->node_id; });
    return valid;
}

}  // namespace

TrackState cc_fuse(std::span<const Measurement> measurements, std::span<const RadarNode> nodes,
                   const TrackState& track, const FilterParams& params) {
    TrackState state = kf_predict(track, params);
    int cpi = track.last_update_cpi >= 0 ? track.last_update_cpi + 1 : 0;
    for (const Measurement* m : valid_in_node_order(measurements)) {
        const CartesianObservation fix = polar_to_cartesian(node_by_id(nodes, m->node_id).position, *m);
        state = kf_update(state, fix.z, fix.R);
        cpi = m->cpi;
    }
    state.last_update_cpi = cpi;
    return state;
}

double predict_range(const TrackState& track, const Position2D& node_position, int steps_ahead,
                     const FilterParams& params) {
    if (steps_ahead < 0) throw std::invalid_argument("predict_range: steps_ahead must be >= 0");
    Vec4 x = track.x;
    for (int i = 0; i < steps_ahead; ++i) x = params.F * x + params.control;
    return (x.head<2>() - node_position).norm();
}

std::optional<TrackState> initialize_track(std::span<const Measurement> measurements,
                                           std::span<const RadarNode> nodes, int cpi,
                                           const TrackPrior& prior) {
    Mat2 info = Mat2::Zero();
    Vec2 info_mean = Vec2::Zero();
    bool any = false;
    for (const Measurement* m : valid_in_node_order(measurements)) {
        const CartesianObservation fix = polar_to_cartesian(node_by_id(nodes, m->node_id).position, *m);
        const Mat2 Rinv = fix.R.inverse();
        info += Rinv;
        info_mean += Rinv * fix.z;
        any = true;
    }
    if (!any) return std::nullopt;
    TrackState state;
    state.x.head<2>() = info.ldlt().solve(info_mean);
    state.x.tail<2>().setZero();
    state.P = Mat4::Zero();
    state.P.diagonal() << prior.position_variance, prior.position_variance,
        prior.velocity_variance, prior.velocity_variance;
    state.last_update_cpi = cpi;
    return state;
}

bool is_valid_covariance(const Mat4& P) {
    const double scale = std::max(P.cwiseAbs().maxCoeff(), 1e-300);
    if ((P - P.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) return false;
    Eigen::SelfAdjointEigenSolver<Mat4> es(P);
    return es.eigenvalues().minCoeff() >= -1e-9 * std::abs(P.trace());
}

void Tracker::step(std::span<const Measurement> measurements, std::span<const RadarNode> nodes,
                   int cpi) {
    if (!state_) {
        state_ = initialize_track(measurements, nodes, cpi, prior_);
        return;
    }
    TrackState fused = cc_fuse(measurements, nodes, *state_, params_);
    fused.last_update_cpi = cpi;
    state_ = fused;
}

std::optional<double> Tracker::predicted_range(const Position2D& node_position, int steps_ahead) const {
    if (!state_) return std::nullopt;
    return predict_range(*state_, node_position, steps_ahead, params_);
}

}  // namespace hcrn
