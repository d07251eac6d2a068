#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "hcrn/assignment.hpp"
#include "hcrn/rfmodel.hpp"
#include "hcrn/scenario.hpp"
#include "hcrn/tracking.hpp"

namespace hcrn {

enum class PolicyKind { oracle, c_etc, c_etp, h_etp, etp, mc, random };

inline constexpr PolicyKind kAllPolicies[] = {PolicyKind::oracle, PolicyKind::c_etc,
                                              PolicyKind::c_etp,  PolicyKind::h_etp,
                                              PolicyKind::etp,    PolicyKind::mc,
                                              PolicyKind::random};

std::string_view to_string(PolicyKind kind);
/// Throws std::invalid_argument for unknown names.
PolicyKind parse_policy_kind(std::string_view name);
bool is_etc_family(PolicyKind kind);

struct PolicyParams {
    double confidence = 0.03;       // scale of the elimination radius
    double ewma_alpha = 0.2;       // smoothing of node-side channel metrics
    int mc_explore_cpis = 2500;    // Musical Chairs exploration length
    int predict_ahead = 1;         // CPIs of range prediction for reward forecasts
    int random_list_length = 1024; // size of the pre-drawn random matching sequence
    int max_sweeps = 10;           // exploration rounds before the empirical best is committed
    int max_backoff_exponent = 10; // ETP yields for at most 2^this CPIs after a collision
};

/// A coordinator-to-node message. The value count is what the message costs in the feedback
/// budget for one recipient.
struct FeedbackMessage {
    enum class Kind { matching_list, weight_matrix, target_state, none };

    Kind kind = Kind::none;
    std::vector<Matching> matchings;
    Eigen::MatrixXd matrix;
    Vec2 target_position = Vec2::Zero();

    long long value_count() const;

    static FeedbackMessage matching_list(std::vector<Matching> list);
    static FeedbackMessage weight_matrix(Eigen::MatrixXd values);
    static FeedbackMessage target_state(const Vec2& position);
};

std::string_view to_string(FeedbackMessage::Kind kind);

using FeedbackBundle = std::vector<FeedbackMessage>;

/// Candidate list of the explore-then-commit family together with per-matching statistics.
struct ExplorationState {
    std::vector<Matching> list;
    std::size_t cursor = 0;
    int round = 0;
    bool converged = false;
    std::vector<int> visits;
    std::vector<double> utility_sum;
    double utility_scale = 0.0;  // running max of observed utilities, used for normalization

    static ExplorationState from_list(std::vector<Matching> list);

    void record(std::size_t index, double observed_utility);
    double normalized_mean(std::size_t index) const;
    bool sweep_complete() const { return cursor >= list.size(); }
};

/// N cyclic shifts: matching j sends node m to channel (m + j) mod N.
std::vector<Matching> build_initial_matchings(int node_count, int channel_count);

/// Elimination radius c * sqrt(2 ln k / n).
double elimination_radius(double confidence, int k, int visits);

/// Keeps every matching whose upper bound reaches the best lower bound, in list order, and
/// starts the next round.
ExplorationState etc_eliminate(const ExplorationState& state, double confidence, int k);

/// Keeps only the matching with the highest normalized mean (first one on ties).
ExplorationState commit_best(const ExplorationState& state);

/// Target-based rewards: 10^(metric/10) / r^4 with metrics in dB (M x N) and ranges in m.
WeightMatrix build_target_reward_matrix(const Eigen::MatrixXd& channel_metrics_db,
                                        std::span<const double> ranges);

enum class McPhase { explore, seat };

struct McState {
    McPhase phase = McPhase::explore;
    int rounds = 0;
    std::vector<double> reward_sum;
    std::vector<int> reward_count;
    std::vector<int> collision_count;
    std::optional<int> seated_channel;
    std::optional<int> attempt_channel;
    int explore_cpis = 2500;
};

/// What a node can see when choosing a channel.
struct NodeView {
    int cpi = 0;
    std::span<const RadarNode> nodes;
    const RadarParams* radar = nullptr;
    const Tracker* own_track = nullptr;
    const WeightMatrix* true_weights = nullptr;  // read by the oracle only
};

/// Local outcome of the node's transmission in one CPI.
struct NodeObservation {
    int cpi = 0;
    int channel = 0;
    bool collided = false;
    double sinr_estimate = 0.0;            // meaningful only without collision
    std::optional<double> estimated_range; // node's own filter, when initialized
};

/// Node-side state machine for every policy kind.
class NodeAgent {
public:
    NodeAgent(PolicyKind kind, int node_id, int node_count, int channel_count,
              const PolicyParams& params, const RadarParams& radar, std::uint64_t policy_seed);

    /// Shared random matching sequence (random policy only).
    void set_random_sequence(std::vector<Matching> sequence);

    /// Channel choice for the CPI. Throws std::logic_error when the policy's feedback
    /// contract is violated (for example an exhausted matching list with no refresh).
    int node_step(const NodeView& view);
    void observe(const NodeObservation& obs);
    void receive(const FeedbackBundle& bundle);

    PolicyKind kind() const { return kind_; }
    bool converged() const { return converged_; }
    const McState& mc_state() const { return mc_; }
    const Eigen::VectorXd& channel_metrics_db() const { return metric_db_; }

private:
    int etc_channel() const;
    int predict_channel(const NodeView& view) const;
    int mc_channel();

    PolicyKind kind_;
    int id_;
    int node_count_;
    int channel_count_;
    PolicyParams params_;
    RadarParams radar_;
    std::mt19937_64 rng_;

    std::vector<Matching> list_;
    std::size_t cursor_ = 0;
    bool awaiting_list_ = false;
    bool converged_ = false;

    Eigen::VectorXd metric_db_;
    std::vector<char> metric_seen_;

    std::optional<Eigen::MatrixXd> received_weights_;
    std::optional<Eigen::MatrixXd> shared_metrics_db_;
    std::optional<Vec2> received_target_;

    std::vector<Matching> random_sequence_;
    McState mc_;

    // ETP collision handling: after a collision the node may fall back to the committed matching.
    int collisions_seen_ = 0;
    int backoff_until_ = -1;
};

/// The pre-drawn random matching sequence; identical for every node of a run.
std::vector<Matching> draw_random_matchings(std::mt19937_64& rng, int node_count,
                                            int channel_count, int length);

struct NodeReport {
    int node_id = 0;
    int channel = 0;
    bool collided = false;
    double sinr_estimate = 0.0;
};

/// Coordinator-side state machine.
class Coordinator {
public:
    Coordinator(PolicyKind kind, std::vector<RadarNode> nodes, int channel_count,
                const PolicyParams& params, const RadarParams& radar);

    /// Consumes one CPI of reports (k is 0-based) and returns one bundle per node.
    std::vector<FeedbackBundle> coordinator_step(int k, std::span<const NodeReport> reports,
                                                 const Tracker& cc_track);

    const ExplorationState& exploration() const { return exploration_; }
    bool converged() const { return exploration_.converged; }
    std::optional<int> convergence_cpi() const { return convergence_cpi_; }

    /// Pooled interference-plus-noise estimate per channel (W); NaN until observed.
    std::vector<double> pooled_interference() const;
    /// Per-(node, channel) channel metric estimates in dB; NaN until observed.
    Eigen::MatrixXd edge_metrics_db() const;

private:
    void absorb_reports(std::span<const NodeReport> reports, const Tracker& cc_track);
    Eigen::MatrixXd estimated_sinr_matrix(std::span<const NodeReport> reports,
                                          const Tracker& cc_track) const;

    PolicyKind kind_;
    std::vector<RadarNode> nodes_;
    int channel_count_;
    PolicyParams params_;
    RadarParams radar_;
    ExplorationState exploration_;
    std::optional<int> convergence_cpi_;

    std::vector<double> interference_sum_;
    std::vector<int> interference_count_;
    Eigen::MatrixXd quality_sum_;
    Eigen::MatrixXi quality_count_;
};

}  // namespace hcrn
