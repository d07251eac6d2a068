#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hcrn/assignment.hpp"
#include "hcrn/config.hpp"
#include "hcrn/policies.hpp"
#include "hcrn/rfmodel.hpp"
#include "hcrn/scenario.hpp"
#include "hcrn/tracking.hpp"

namespace hcrn {

/// Random streams of one run. Environment, measurement noise and policy draws never share a
/// generator, so swapping the policy leaves the world realization untouched.
enum class Stream : std::uint64_t { environment = 1, measurement = 2, policy = 3 };

std::mt19937_64 make_stream(std::uint64_t seed, Stream stream, std::uint64_t sub = 0);

struct World {
    std::vector<RadarNode> nodes;
    TargetTruth target;  // state at t = 0
    InterferenceField interference;
    RadarParams radar;
    double cpi_duration = 512 * 1.024e-4;

    int node_count() const { return static_cast<int>(nodes.size()); }
    int channel_count() const { return interference.channel_count(); }
};

/// Node placement and interference draw from the environment stream of `seed`.
World build_world(const ScenarioConfig& cfg, std::uint64_t seed);

struct CpiRecord {
    int cpi = 0;
    Matching chosen;
    double utility_true = 0.0;
    double utility_opt = 0.0;
    double regret_inst = 0.0;
    double regret_cum = 0.0;
    long long feedback_values = 0;
    double feedback_avg = 0.0;
    int collisions = 0;
    std::optional<Vec2> fused_position;
    double loc_error_m = 0.0;  // NaN until the coordinator track exists
    std::vector<double> observed_sinr;  // per node; 0 on collision
};

struct RunResult {
    std::string scenario_hash;
    std::uint64_t seed = 0;
    PolicyKind policy = PolicyKind::oracle;
    std::vector<CpiRecord> records;
    double wall_seconds = 0.0;
    std::optional<int> convergence_cpi;  // ETC family: singleton reached; mc: all seated
    Eigen::MatrixXd initial_interference;  // effective P_i (M x N) at CPI 0
};

/// One run in progress: world, policy agents, filters and running totals.
class Simulation {
public:
    Simulation(const ScenarioConfig& cfg, World world, PolicyKind policy, std::uint64_t seed);

    /// Runs CPI k (k must equal the number of CPIs already run). `forced` replaces the
    /// policy's channel choices.
    CpiRecord run_cpi(int k, const std::optional<std::vector<int>>& forced = std::nullopt);

    const World& world() const { return world_; }
    const Coordinator& coordinator() const { return coordinator_; }
    const Tracker& cc_track() const { return cc_track_; }
    const NodeAgent& agent(int m) const { return agents_.at(static_cast<std::size_t>(m)); }
    TargetTruth truth_at(int k) const;
    std::optional<int> convergence_cpi() const;

private:
    ScenarioConfig cfg_;
    World world_;
    PolicyKind policy_;
    std::mt19937_64 env_rng_;
    std::mt19937_64 meas_rng_;
    MeasurementModel meas_model_;
    std::vector<NodeAgent> agents_;
    Coordinator coordinator_;
    Tracker cc_track_;
    std::vector<Tracker> node_tracks_;
    std::vector<FeedbackBundle> inbox_;
    int next_cpi_ = 0;
    double regret_cum_ = 0.0;
    long long feedback_total_ = 0;
    std::optional<int> mc_converged_;
};

RunResult run_simulation(const ScenarioConfig& cfg, std::uint64_t seed);
RunResult run_simulation(const ScenarioConfig& cfg, std::uint64_t seed, PolicyKind policy);

struct QuantileSet {
    std::vector<double> levels;
    std::vector<double> values;
};

/// Linear-interpolated quantiles of `samples` (type 7).
QuantileSet quantiles(std::vector<double> samples, const std::vector<double>& levels);

inline const std::vector<double> kSummaryLevels = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5,
                                                   0.6, 0.7, 0.8, 0.9, 1.0};

struct BatchResult {
    PolicyKind policy = PolicyKind::oracle;
    std::vector<RunResult> runs;  // ordered by seed
    std::vector<double> mean_regret_cum;
    std::vector<double> mean_feedback_avg;
    std::vector<double> mean_loc_error;
    std::vector<double> median_loc_error;
    std::vector<double> error_samples_full;
    std::vector<double> error_samples_post;
    int convergence_cpi = 150;
};

/// Runs every seed (in parallel when `threads` > 1) and aggregates in seed order.
BatchResult run_batch(const ScenarioConfig& cfg, std::span<const std::uint64_t> seeds,
                      PolicyKind policy, int threads = 0);

BatchResult aggregate(std::vector<RunResult> runs, PolicyKind policy, int convergence_cpi);

std::vector<std::uint64_t> seed_list(std::uint64_t base, int runs);

}  // namespace hcrn
