#include "hcrn/scenario.hpp"

#include <cmath>
#include <stdexcept>

namespace hcrn {

void GeometryConfig::validate() const {
    if (node_count < 1) throw std::invalid_argument("node_count must be >= 1");
    if (!(area_size > 0.0) || !std::isfinite(area_size))
        throw std::invalid_argument("area_size must be positive");
    if (pris_per_cpi < 1) throw std::invalid_argument("pris_per_cpi must be >= 1");
    if (!(pri_duration > 0.0)) throw std::invalid_argument("pri_duration must be positive");
    if (!target_initial_position.allFinite() || !target_velocity.allFinite())
        throw std::invalid_argument("target kinematics must be finite");
}

std::vector<RadarNode> place_nodes(std::mt19937_64& rng, const GeometryConfig& cfg) {
    cfg.validate();
    std::uniform_real_distribution<double> coord(0.0, cfg.area_size);
    std::vector<RadarNode> nodes;
    nodes.reserve(static_cast<std::size_t>(cfg.node_count));
    for (int m = 0; m < cfg.node_count; ++m) {
        const double x = coord(rng);
        const double y = coord(rng);
        nodes.push_back({m, Position2D(x, y)});
    }
    return nodes;
}

TargetTruth propagate_target(const TargetTruth& state, double dt) {
    if (dt < 0.0) throw std::invalid_argument("propagate_target: dt must be >= 0");
    return {state.position + state.velocity * dt, state.velocity};
}

Observables true_observables(const RadarNode& node, const TargetTruth& target) {
    const Vec2 los = target.position - node.position;
    const double range = los.norm();
    if (range == 0.0)
        throw std::domain_error("true_observables: node and target coincide");
    const Vec2 unit = los / range;
    Observables obs;
    obs.range = range;
    obs.radial_velocity = target.velocity.dot(unit);
    obs.angle = std::atan2(los.y(), los.x());
    if (obs.angle == -M_PI) obs.angle = M_PI;
    return obs;
}

}  // namespace hcrn
