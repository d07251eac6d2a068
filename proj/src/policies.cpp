#include "hcrn/policies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace hcrn {

std::string_view to_string(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::oracle: return "oracle";
        case PolicyKind::c_etc: return "c_etc";
        case PolicyKind::c_etp: return "c_etp";
        case PolicyKind::h_etp: return "h_etp";
        case PolicyKind::etp: return "etp";
        case PolicyKind::mc: return "mc";
        case PolicyKind::random: return "random";
    }
    return "unknown";
}

PolicyKind parse_policy_kind(std::string_view name) {
    for (PolicyKind k : kAllPolicies)
        if (to_string(k) == name) return k;
    throw std::invalid_argument("unknown policy: " + std::string(name));
}

bool is_etc_family(PolicyKind kind) {
    return kind == PolicyKind::c_etc || kind == PolicyKind::c_etp || kind == PolicyKind::h_etp ||
           kind == PolicyKind::etp;
}

std::string_view to_string(FeedbackMessage::Kind kind) {
    switch (kind) {
        case FeedbackMessage::Kind::matching_list: return "matching_list";
        case FeedbackMessage::Kind::weight_matrix: return "weight_matrix";
        case FeedbackMessage::Kind::target_state: return "target_state";
        case FeedbackMessage::Kind::none: return "none";
    }
    return "unknown";
}

long long FeedbackMessage::value_count() const {
    switch (kind) {
        case Kind::matching_list: {
            long long n = 0;
            for (const auto& m : matchings) n += m.size();
            return n;
        }
        case Kind::weight_matrix: return static_cast<long long>(matrix.size());
        case Kind::target_state: return 2;
        case Kind::none: return 0;
    }
    return 0;
}

FeedbackMessage FeedbackMessage::matching_list(std::vector<Matching> list) {
    FeedbackMessage m;
    m.kind = Kind::matching_list;
    m.matchings = std::move(list);
    return m;
}

FeedbackMessage FeedbackMessage::weight_matrix(Eigen::MatrixXd values) {
    FeedbackMessage m;
    m.kind = Kind::weight_matrix;
    m.matrix = std::move(values);
    return m;
}

FeedbackMessage FeedbackMessage::target_state(const Vec2& position) {
    FeedbackMessage m;
    m.kind = Kind::target_state;
    m.target_position = position;
    return m;
}

ExplorationState ExplorationState::from_list(std::vector<Matching> list) {
    ExplorationState s;
    s.visits.assign(list.size(), 0);
    s.utility_sum.assign(list.size(), 0.0);
    s.converged = list.size() == 1;
    s.list = std::move(list);
    return s;
}

void ExplorationState::record(std::size_t index, double observed_utility) {
    if (index >= list.size()) throw std::out_of_range("ExplorationState::record: bad index");
    ++visits[index];
    utility_sum[index] += observed_utility;
    utility_scale = std::max(utility_scale, observed_utility);
}

double ExplorationState::normalized_mean(std::size_t index) const {
    if (visits[index] == 0) return 0.0;
    const double scale = utility_scale > 0.0 ? utility_scale : 1.0;
    return utility_sum[index] / visits[index] / scale;
}

std::vector<Matching> build_initial_matchings(int node_count, int channel_count) {
    if (node_count < 1 || channel_count < node_count)
        throw std::invalid_argument("matchings require M <= N");
    std::vector<Matching> list;
    list.reserve(channel_count);
    for (int j = 0; j < channel_count; ++j) {
        Matching m;
        m.channels.resize(node_count);
        for (int n = 0; n < node_count; ++n) m.channels[n] = (n + j) % channel_count;
        list.push_back(std::move(m));
    }
    return list;
}

double elimination_radius(double confidence, int k, int visits) {
    if (visits < 1) throw std::invalid_argument("elimination_radius: visits must be >= 1");
    if (k < 1) throw std::invalid_argument("elimination_radius: k must be >= 1");
    return confidence * std::sqrt(2.0 * std::log(static_cast<double>(k)) / visits);
}

ExplorationState etc_eliminate(const ExplorationState& state, double confidence, int k) {
    if (state.list.empty()) throw std::invalid_argument("etc_eliminate: empty list");
    const std::size_t p = state.list.size();
    std::vector<double> mean(p), rad(p);
    double best_lower = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < p; ++i) {
        if (state.visits[i] < 1)
            throw std::invalid_argument("etc_eliminate: every matching needs a sample");
        mean[i] = state.normalized_mean(i);
        rad[i] = elimination_radius(confidence, k, state.visits[i]);
        best_lower = std::max(best_lower, mean[i] - rad[i]);
    }
    ExplorationState next;
    next.round = state.round + 1;
    next.utility_scale = state.utility_scale;
    for (std::size_t i = 0; i < p; ++i) {
        if (mean[i] + rad[i] < best_lower) continue;
        next.list.push_back(state.list[i]);
        next.visits.push_back(state.visits[i]);
        next.utility_sum.push_back(state.utility_sum[i]);
    }
    next.converged = next.list.size() == 1;
    return next;
}

ExplorationState commit_best(const ExplorationState& state) {
    if (state.list.empty()) throw std::invalid_argument("commit_best: empty list");
    std::size_t best = 0;
    for (std::size_t i = 1; i < state.list.size(); ++i)
        if (state.normalized_mean(i) > state.normalized_mean(best)) best = i;
    ExplorationState next;
    next.round = state.round;
    next.utility_scale = state.utility_scale;
    next.list = {state.list[best]};
    next.visits = {state.visits[best]};
    next.utility_sum = {state.utility_sum[best]};
    next.converged = true;
    return next;
}

WeightMatrix build_target_reward_matrix(const Eigen::MatrixXd& channel_metrics_db,
                                        std::span<const double> ranges) {
    if (static_cast<Eigen::Index>(ranges.size()) != channel_metrics_db.rows())
        throw std::invalid_argument("build_target_reward_matrix: one range per row required");
    WeightMatrix W;
    W.kind = WeightKind::target_based;
    W.values.resize(channel_metrics_db.rows(), channel_metrics_db.cols());
    for (Eigen::Index m = 0; m < channel_metrics_db.rows(); ++m) {
        const double r = ranges[static_cast<std::size_t>(m)];
        if (!(r > 0.0)) throw std::invalid_argument("build_target_reward_matrix: range must be positive");
        const double r4 = r * r * r * r;
        for (Eigen::Index n = 0; n < channel_metrics_db.cols(); ++n)
            W.values(m, n) = db_to_linear(channel_metrics_db(m, n)) / r4;
    }
    return W;
}

std::vector<Matching> draw_random_matchings(std::mt19937_64& rng, int node_count,
                                            int channel_count, int length) {
    if (node_count < 1 || channel_count < node_count)
        throw std::invalid_argument("matchings require M <= N");
    if (length < 1) throw std::invalid_argument("draw_random_matchings: length must be >= 1");
    std::vector<Matching> out;
    out.reserve(length);
    std::vector<int> perm(channel_count);
    for (int i = 0; i < length; ++i) {
        std::iota(perm.begin(), perm.end(), 0);
        // Partial Fisher-Yates: only the first M slots are needed.
        for (int j = 0; j < node_count; ++j) {
            std::uniform_int_distribution<int> pick(j, channel_count - 1);
            std::swap(perm[j], perm[pick(rng)]);
        }
        out.push_back(Matching{std::vector<int>(perm.begin(), perm.begin() + node_count)});
    }
    return out;
}

// ---------------------------------------------------------------------------------------------

NodeAgent::NodeAgent(PolicyKind kind, int node_id, int node_count, int channel_count,
                     const PolicyParams& params, const RadarParams& radar,
                     std::uint64_t policy_seed)
    : kind_(kind),
      id_(node_id),
      node_count_(node_count),
      channel_count_(channel_count),
      params_(params),
      radar_(radar),
      rng_(policy_seed),
      metric_db_(Eigen::VectorXd::Zero(channel_count)),
      metric_seen_(static_cast<std::size_t>(channel_count), 0) {
    if (node_id < 0 || node_id >= node_count)
        throw std::invalid_argument("NodeAgent: node id out of range");
    if (channel_count < node_count) throw std::invalid_argument("matchings require M <= N");
    if (is_etc_family(kind)) {
        list_ = build_initial_matchings(node_count, channel_count);
        converged_ = list_.size() == 1;
    }
    mc_.explore_cpis = params.mc_explore_cpis;
    mc_.reward_sum.assign(channel_count, 0.0);
    mc_.reward_count.assign(channel_count, 0);
    mc_.collision_count.assign(channel_count, 0);
}

void NodeAgent::set_random_sequence(std::vector<Matching> sequence) {
    for (const auto& m : sequence)
        if (m.size() != node_count_ || !is_valid_matching(m, channel_count_))
            throw std::invalid_argument("set_random_sequence: invalid matching");
    random_sequence_ = std::move(sequence);
}

int NodeAgent::etc_channel() const {
    if (awaiting_list_ || list_.empty())
        throw std::logic_error("node " + std::to_string(id_) +
                               ": matching list exhausted without a refresh");
    const std::size_t idx = converged_ ? 0 : cursor_;
    return list_[idx][id_];
}

int NodeAgent::predict_channel(const NodeView& view) const {
    const int M = node_count_;
    if (view.nodes.size() != static_cast<std::size_t>(M))
        throw std::invalid_argument("NodeView: node list does not match M");

    if (kind_ == PolicyKind::c_etp) {
        if (!received_weights_) return etc_channel();
        WeightMatrix W{*received_weights_, WeightKind::estimated_sinr};
        return max_weight_matching(W).matching[id_];
    }

    std::vector<double> ranges(M);
    Eigen::MatrixXd metrics(M, channel_count_);
    if (kind_ == PolicyKind::h_etp) {
        if (!shared_metrics_db_ || !received_target_) return etc_channel();
        for (int m = 0; m < M; ++m) ranges[m] = (view.nodes[m].position - *received_target_).norm();
        metrics = *shared_metrics_db_;
    } else {  // etp
        if (view.cpi <= backoff_until_) return etc_channel();
        if (view.own_track == nullptr || !view.own_track->initialized()) return etc_channel();
        for (int m = 0; m < M; ++m)
            ranges[m] = *view.own_track->predicted_range(view.nodes[m].position, params_.predict_ahead);
        // Channel ordering is taken to be common to all nodes, so the node's own metrics stand
        // in for every row.
        for (int m = 0; m < M; ++m) metrics.row(m) = metric_db_.transpose();
    }
    for (double& r : ranges) r = std::max(r, 1.0);
    return max_weight_matching(build_target_reward_matrix(metrics, ranges)).matching[id_];
}

int NodeAgent::mc_channel() {
    if (mc_.phase == McPhase::explore) {
        std::uniform_int_distribution<int> pick(0, channel_count_ - 1);
        mc_.attempt_channel = pick(rng_);
        return *mc_.attempt_channel;
    }
    return mc_.seated_channel ? *mc_.seated_channel : *mc_.attempt_channel;
}

int NodeAgent::node_step(const NodeView& view) {
    switch (kind_) {
        case PolicyKind::oracle: {
            if (view.true_weights == nullptr)
                throw std::logic_error("oracle node needs the true weight matrix");
            return max_weight_matching(*view.true_weights).matching[id_];
        }
        case PolicyKind::random: {
            if (random_sequence_.empty())
                throw std::logic_error("random node has no matching sequence");
            return random_sequence_[static_cast<std::size_t>(view.cpi) % random_sequence_.size()][id_];
        }
        case PolicyKind::mc: return mc_channel();
        case PolicyKind::c_etc: return etc_channel();
        case PolicyKind::c_etp:
        case PolicyKind::h_etp:
        case PolicyKind::etp: return converged_ ? predict_channel(view) : etc_channel();
    }
    throw std::logic_error("unhandled policy kind");
}

namespace {

std::vector<int> top_channels(const McState& mc, int count) {
    const int N = static_cast<int>(mc.reward_sum.size());
    std::vector<double> mean(N, -std::numeric_limits<double>::infinity());
    for (int n = 0; n < N; ++n)
        if (mc.reward_count[n] > 0) mean[n] = mc.reward_sum[n] / mc.reward_count[n];
    std::vector<int> order(N);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return mean[a] > mean[b]; });
    order.resize(static_cast<std::size_t>(count));
    return order;
}

}  // namespace

void NodeAgent::observe(const NodeObservation& obs) {
    if (obs.channel < 0 || obs.channel >= channel_count_)
        throw std::invalid_argument("NodeObservation: channel out of range");

    if (!obs.collided && obs.estimated_range && *obs.estimated_range > 0.0 &&
        obs.sinr_estimate > 0.0) {
        const double metric =
            channel_metric(obs.sinr_estimate, predicted_power(radar_, *obs.estimated_range));
        auto& seen = metric_seen_[static_cast<std::size_t>(obs.channel)];
        double& slot = metric_db_[obs.channel];
        slot = seen ? (1.0 - params_.ewma_alpha) * slot + params_.ewma_alpha * metric : metric;
        seen = 1;
    }

    if (kind_ == PolicyKind::etp && converged_ && obs.collided) {
        // Nodes predicting from private estimates can disagree on close channels. A colliding
        // node yields with probability 1/2 to its committed channel, for exponentially longer
        // spells on repeated collisions.
        ++collisions_seen_;
        if (std::bernoulli_distribution(0.5)(rng_))
            backoff_until_ = obs.cpi + (1 << std::min(collisions_seen_, params_.max_backoff_exponent));
    }

    if (is_etc_family(kind_) && !converged_) {
        ++cursor_;
        if (cursor_ >= list_.size()) awaiting_list_ = true;
    }

    if (kind_ == PolicyKind::mc) {
        ++mc_.rounds;
        if (mc_.phase == McPhase::explore) {
            if (obs.collided) {
                ++mc_.collision_count[obs.channel];
            } else {
                mc_.reward_sum[obs.channel] += obs.sinr_estimate;
                ++mc_.reward_count[obs.channel];
            }
            if (mc_.rounds >= mc_.explore_cpis) {
                mc_.phase = McPhase::seat;
                const auto top = top_channels(mc_, node_count_);
                std::uniform_int_distribution<std::size_t> pick(0, top.size() - 1);
                mc_.attempt_channel = top[pick(rng_)];
            }
        } else if (!mc_.seated_channel) {
            if (!obs.collided) {
                mc_.seated_channel = obs.channel;
                converged_ = true;
            } else {
                const auto top = top_channels(mc_, node_count_);
                std::uniform_int_distribution<std::size_t> pick(0, top.size() - 1);
                mc_.attempt_channel = top[pick(rng_)];
            }
        }
    }
}

void NodeAgent::receive(const FeedbackBundle& bundle) {
    for (const auto& msg : bundle) {
        switch (msg.kind) {
            case FeedbackMessage::Kind::matching_list:
                if (msg.matchings.empty())
                    throw std::invalid_argument("received an empty matching list");
                list_ = msg.matchings;
                cursor_ = 0;
                awaiting_list_ = false;
                converged_ = list_.size() == 1;
                break;
            case FeedbackMessage::Kind::weight_matrix:
                if (msg.matrix.rows() != node_count_ || msg.matrix.cols() != channel_count_)
                    throw std::invalid_argument("received weight matrix has the wrong shape");
                if (kind_ == PolicyKind::h_etp)
                    shared_metrics_db_ = msg.matrix;
                else
                    received_weights_ = msg.matrix;
                break;
            case FeedbackMessage::Kind::target_state: received_target_ = msg.target_position; break;
            case FeedbackMessage::Kind::none: break;
        }
    }
}

// ---------------------------------------------------------------------------------------------

Coordinator::Coordinator(PolicyKind kind, std::vector<RadarNode> nodes, int channel_count,
                         const PolicyParams& params, const RadarParams& radar)
    : kind_(kind),
      nodes_(std::move(nodes)),
      channel_count_(channel_count),
      params_(params),
      radar_(radar),
      interference_sum_(static_cast<std::size_t>(channel_count), 0.0),
      interference_count_(static_cast<std::size_t>(channel_count), 0) {
    const int M = static_cast<int>(nodes_.size());
    if (M < 1 || channel_count < M) throw std::invalid_argument("matchings require M <= N");
    quality_sum_ = Eigen::MatrixXd::Zero(M, channel_count);
    quality_count_ = Eigen::MatrixXi::Zero(M, channel_count);
    if (is_etc_family(kind))
        exploration_ = ExplorationState::from_list(build_initial_matchings(M, channel_count));
}

std::vector<double> Coordinator::pooled_interference() const {
    std::vector<double> out(static_cast<std::size_t>(channel_count_),
                            std::numeric_limits<double>::quiet_NaN());
    for (int n = 0; n < channel_count_; ++n)
        if (interference_count_[n] > 0) out[n] = interference_sum_[n] / interference_count_[n];
    return out;
}

Eigen::MatrixXd Coordinator::edge_metrics_db() const {
    Eigen::MatrixXd out(quality_sum_.rows(), quality_sum_.cols());
    for (Eigen::Index m = 0; m < out.rows(); ++m)
        for (Eigen::Index n = 0; n < out.cols(); ++n)
            out(m, n) = quality_count_(m, n) > 0
                            ? linear_to_db(quality_sum_(m, n) / quality_count_(m, n))
                            : std::numeric_limits<double>::quiet_NaN();
    return out;
}

void Coordinator::absorb_reports(std::span<const NodeReport> reports, const Tracker& cc_track) {
    if (!cc_track.initialized()) return;
    for (const auto& r : reports) {
        if (r.collided || !(r.sinr_estimate > 0.0)) continue;
        const auto& node = nodes_.at(static_cast<std::size_t>(r.node_id));
        const double range = std::max(*cc_track.predicted_range(node.position, 0), 1.0);
        interference_sum_[r.channel] += received_power(radar_, range) / r.sinr_estimate;
        ++interference_count_[r.channel];
        quality_sum_(r.node_id, r.channel) += r.sinr_estimate / predicted_power(radar_, range);
        ++quality_count_(r.node_id, r.channel);
    }
}

Eigen::MatrixXd Coordinator::estimated_sinr_matrix(std::span<const NodeReport> reports,
                                                   const Tracker& cc_track) const {
    const int M = static_cast<int>(nodes_.size());
    const auto pooled = pooled_interference();
    Eigen::MatrixXd W(M, channel_count_);
    for (int m = 0; m < M; ++m) {
        const double range =
            std::max(*cc_track.predicted_range(nodes_[m].position, params_.predict_ahead), 1.0);
        const double power = received_power(radar_, range);
        for (int n = 0; n < channel_count_; ++n) {
            const double in = std::isnan(pooled[n]) ? radar_.noise_power : pooled[n];
            W(m, n) = power / in;
        }
    }
    for (const auto& r : reports)
        if (!r.collided && r.sinr_estimate > 0.0) W(r.node_id, r.channel) = r.sinr_estimate;
    return W;
}

std::vector<FeedbackBundle> Coordinator::coordinator_step(int k, std::span<const NodeReport> reports,
                                                          const Tracker& cc_track) {
    const int M = static_cast<int>(nodes_.size());
    std::vector<FeedbackBundle> out(static_cast<std::size_t>(M));
    absorb_reports(reports, cc_track);
    if (!is_etc_family(kind_)) return out;

    auto broadcast = [&](const FeedbackMessage& msg) {
        for (auto& b : out) b.push_back(msg);
    };

    bool just_converged = false;
    if (!exploration_.converged) {
        double u = 0.0;
        for (const auto& r : reports)
            if (!r.collided) u += r.sinr_estimate;
        exploration_.record(exploration_.cursor, u);
        ++exploration_.cursor;
        if (exploration_.sweep_complete()) {
            exploration_ = etc_eliminate(exploration_, params_.confidence, k + 1);
            if (!exploration_.converged && exploration_.round >= params_.max_sweeps)
                exploration_ = commit_best(exploration_);
            broadcast(FeedbackMessage::matching_list(exploration_.list));
            if (exploration_.converged) {
                convergence_cpi_ = k;
                just_converged = true;
            }
        }
        if (!just_converged) return out;
    }

    switch (kind_) {
        case PolicyKind::c_etp:
            if (cc_track.initialized())
                broadcast(FeedbackMessage::weight_matrix(estimated_sinr_matrix(reports, cc_track)));
            break;
        case PolicyKind::h_etp:
            if (just_converged) {
                Eigen::MatrixXd metrics = edge_metrics_db();
                const double fallback =
                    metrics.array().isNaN().all() ? 0.0 : metrics.array().isNaN().select(
                        std::numeric_limits<double>::infinity(), metrics.array()).minCoeff();
                metrics = metrics.array().isNaN().select(fallback, metrics.array());
                broadcast(FeedbackMessage::weight_matrix(std::move(metrics)));
            }
            if (cc_track.initialized())
                broadcast(FeedbackMessage::target_state(cc_track.state().position()));
            break;
        default: break;
    }
    return out;
}

}  // namespace hcrn
