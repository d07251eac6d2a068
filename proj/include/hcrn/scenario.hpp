#pragma once

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace hcrn {

using Vec2 = Eigen::Vector2d;
using Position2D = Vec2;

struct RadarNode {
    int id = 0;
    Position2D position = Position2D::Zero();
};

/// Noiseless constant-velocity target.
struct TargetTruth {
    Position2D position = Position2D::Zero();
    Vec2 velocity = Vec2::Zero();
};

struct GeometryConfig {
    double area_size = 10000.0;  // m, side of the square deployment area
    int node_count = 5;
    Position2D target_initial_position = Position2D::Zero();
    Vec2 target_velocity = Vec2::Constant(200.0 / std::sqrt(2.0));  // northeast
    int pris_per_cpi = 512;
    double pri_duration = 1.024e-4;  // s

    double cpi_duration() const { return pris_per_cpi * pri_duration; }
    void validate() const;
};

struct Observables {
    double range = 0.0;            // m
    double radial_velocity = 0.0;  // m/s, positive when opening
    double angle = 0.0;            // rad, atan2 of node->target, in (-pi, pi]
};

/// Nodes i.i.d. uniform over [0, area]^2, ids 0..M-1 in draw order.
std::vector<RadarNode> place_nodes(std::mt19937_64& rng, const GeometryConfig& cfg);

TargetTruth propagate_target(const TargetTruth& state, double dt);

/// Throws std::domain_error when node and target coincide.
Observables true_observables(const RadarNode& node, const TargetTruth& target);

}  // namespace hcrn
