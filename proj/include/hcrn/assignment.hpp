#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace hcrn {

enum class WeightKind { true_sinr, estimated_sinr, target_based };

/// M x N rewards, rows are radar nodes and columns are channels. Requires M <= N.
struct WeightMatrix {
    Eigen::MatrixXd values;
    WeightKind kind = WeightKind::true_sinr;

    int rows() const { return static_cast<int>(values.rows()); }
    int cols() const { return static_cast<int>(values.cols()); }
    void validate() const;
};

/// Node m transmits in channel channels[m]; entries are distinct.
struct Matching {
    std::vector<int> channels;

    int size() const { return static_cast<int>(channels.size()); }
    int operator[](int node) const { return channels[static_cast<std::size_t>(node)]; }
    auto operator<=>(const Matching&) const = default;
};

bool is_valid_matching(const Matching& pi, int channel_count);

double utility(const WeightMatrix& W, const Matching& pi);

struct MatchingResult {
    Matching matching;
    double utility = 0.0;
};

/// Exact maximum-weight matching (Hungarian method on the square padding of W). Among
/// optimal matchings the lexicographically smallest channel vector is returned, with ties
/// judged at a tolerance of 1e-10 relative to max|W|.
MatchingResult max_weight_matching(const WeightMatrix& W);

/// All injective assignments in lexicographic order. Throws std::length_error when the
/// falling factorial N!/(N-M)! exceeds `cap`.
std::vector<Matching> enumerate_matchings(int node_count, int channel_count,
                                          std::size_t cap = 1'000'000);

std::uint64_t matching_count(int node_count, int channel_count);

struct HistoryEntry {
    WeightMatrix true_weights;
    Matching chosen;
};

double cumulative_utility(std::span<const HistoryEntry> history);

/// Sum over CPIs of the optimal utility on the true weights minus the realized utility.
double cumulative_regret(std::span<const HistoryEntry> history);

/// Running regret after each CPI.
std::vector<double> regret_curve(std::span<const HistoryEntry> history);

/// Mean number of feedback values per node per CPI over the first k CPIs.
double average_feedback(std::span<const long long> feedback_counts, int node_count, int k);

}  // namespace hcrn
