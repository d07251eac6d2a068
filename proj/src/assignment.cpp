#include "hcrn/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace hcrn {

void WeightMatrix::validate() const {
    if (rows() < 1) throw std::invalid_argument("weight matrix has no rows");
    if (rows() > cols()) throw std::invalid_argument("weight matrix needs M <= N");
    if (!values.allFinite()) throw std::invalid_argument("weight matrix has non-finite entries");
}

bool is_valid_matching(const Matching& pi, int channel_count) {
    std::vector<bool> used(static_cast<std::size_t>(std::max(channel_count, 0)), false);
    for (int c : pi.channels) {
        if (c < 0 || c >= channel_count) return false;
        if (used[static_cast<std::size_t>(c)]) return false;
        used[static_cast<std::size_t>(c)] = true;
    }
    return true;
}

double utility(const WeightMatrix& W, const Matching& pi) {
    if (pi.size() != W.rows() || !is_valid_matching(pi, W.cols()))
        throw std::invalid_argument("utility: matching does not fit the weight matrix");
    double u = 0.0;
    for (int m = 0; m < pi.size(); ++m) u += W.values(m, pi[m]);
    return u;
}

namespace {

struct Assignment {
    std::vector<int> row_to_col;
    std::vector<double> u;  // row potentials
    std::vector<double> v;  // column potentials
};

// Shortest augmenting path Hungarian method, O(n^3), minimizing sum cost(i, col(i)).
Assignment solve_min_cost(const Eigen::MatrixXd& cost) {
    const int n = static_cast<int>(cost.rows());
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    std::vector<char> used(n + 1);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    Assignment out;
    out.row_to_col.assign(n, -1);
    for (int j = 1; j <= n; ++j) out.row_to_col[p[j] - 1] = j - 1;
    out.u.assign(u.begin() + 1, u.end());
    out.v.assign(v.begin() + 1, v.end());
    return out;
}

// Kuhn augmenting path over the tight-edge graph.
bool augment(int row, const std::vector<std::vector<char>>& tight, std::vector<int>& col_owner,
             std::vector<char>& seen, const std::vector<char>& col_blocked) {
    const int n = static_cast<int>(tight.size());
    for (int c = 0; c < n; ++c) {
        if (!tight[row][c] || seen[c] || col_blocked[c]) continue;
        seen[c] = 1;
        if (col_owner[c] < 0 || augment(col_owner[c], tight, col_owner, seen, col_blocked)) {
            col_owner[c] = row;
            return true;
        }
    }
    return false;
}

bool completes(const std::vector<std::vector<char>>& tight, int first_free_row,
               const std::vector<char>& col_blocked) {
    const int n = static_cast<int>(tight.size());
    std::vector<int> col_owner(n, -1);
    for (int r = first_free_row; r < n; ++r) {
        std::vector<char> seen(n, 0);
        if (!augment(r, tight, col_owner, seen, col_blocked)) return false;
    }
    return true;
}

}  // namespace

MatchingResult max_weight_matching(const WeightMatrix& W) {
    W.validate();
    const int M = W.rows();
    const int N = W.cols();
    const double pad = W.values.minCoeff() - 2.0;

    Eigen::MatrixXd cost(N, N);
    cost.topRows(M) = -W.values;
    if (N > M) cost.bottomRows(N - M).setConstant(-pad);

    const Assignment hungarian = solve_min_cost(cost);

    const double scale = std::max(W.values.cwiseAbs().maxCoeff(), std::abs(pad));
    const double tol = 1e-10 * std::max(scale, std::numeric_limits<double>::min());
    std::vector<std::vector<char>> tight(N, std::vector<char>(N, 0));
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
            tight[i][j] = std::abs(cost(i, j) - hungarian.u[i] - hungarian.v[j]) <= tol;

    // Greedy lexicographic choice over optimal (tight) matchings.
    Matching lex;
    lex.channels.reserve(M);
    std::vector<char> blocked(N, 0);
    bool lex_ok = true;
    for (int i = 0; i < M && lex_ok; ++i) {
        bool placed = false;
        for (int c = 0; c < N; ++c) {
            if (blocked[c] || !tight[i][c]) continue;
            blocked[c] = 1;
            if (completes(tight, i + 1, blocked)) {
                lex.channels.push_back(c);
                placed = true;
                break;
            }
            blocked[c] = 0;
        }
        lex_ok = placed;
    }

    Matching direct;
    direct.channels.assign(hungarian.row_to_col.begin(), hungarian.row_to_col.begin() + M);
    const double direct_utility = utility(W, direct);
    if (lex_ok) {
        const double lex_utility = utility(W, lex);
        if (lex_utility >= direct_utility) return {lex, lex_utility};
    }
    return {direct, direct_utility};
}

std::uint64_t matching_count(int node_count, int channel_count) {
    if (node_count < 0 || channel_count < node_count) return 0;
    std::uint64_t count = 1;
    for (int i = 0; i < node_count; ++i) {
        const std::uint64_t f = static_cast<std::uint64_t>(channel_count - i);
        if (count > std::numeric_limits<std::uint64_t>::max() / f)
            return std::numeric_limits<std::uint64_t>::max();
        count *= f;
    }
    return count;
}

std::vector<Matching> enumerate_matchings(int node_count, int channel_count, std::size_t cap) {
    if (node_count < 1 || channel_count < node_count)
        throw std::invalid_argument("enumerate_matchings: need 1 <= M <= N");
    const std::uint64_t total = matching_count(node_count, channel_count);
    if (total > cap) throw std::length_error("enumerate_matchings: matching count exceeds cap");

    std::vector<Matching> out;
    out.reserve(static_cast<std::size_t>(total));
    std::vector<int> current(node_count, -1);
    std::vector<char> used(channel_count, 0);
    // Iterative depth-first walk; channels tried in ascending order give lexicographic output.
    int depth = 0;
    while (depth >= 0) {
        int& c = current[depth];
        if (c >= 0) used[c] = 0;
        ++c;
        while (c < channel_count && used[c]) ++c;
        if (c == channel_count) {
            c = -1;
            --depth;
            continue;
        }
        used[c] = 1;
        if (depth == node_count - 1) {
            out.push_back(Matching{current});
        } else {
            ++depth;
        }
    }
    return out;
}

double cumulative_utility(std::span<const HistoryEntry> history) {
    double total = 0.0;
    for (const auto& h : history) total += utility(h.true_weights, h.chosen);
    return total;
}

std::vector<double> regret_curve(std::span<const HistoryEntry> history) {
    std::vector<double> curve;
    curve.reserve(history.size());
    double total = 0.0;
    for (const auto& h : history) {
        const double best = max_weight_matching(h.true_weights).utility;
        total += std::max(0.0, best - utility(h.true_weights, h.chosen));
        curve.push_back(total);
    }
    return curve;
}

double cumulative_regret(std::span<const HistoryEntry> history) {
    const auto curve = regret_curve(history);
    return curve.empty() ? 0.0 : curve.back();
}

double average_feedback(std::span<const long long> feedback_counts, int node_count, int k) {
    if (k < 1) throw std::invalid_argument("average_feedback: k must be >= 1");
    if (node_count < 1) throw std::invalid_argument("average_feedback: node_count must be >= 1");
    if (static_cast<std::size_t>(k) > feedback_counts.size())
        throw std::invalid_argument("average_feedback: k exceeds history length");
    const long long total =
        std::accumulate(feedback_counts.begin(), feedback_counts.begin() + k, 0LL);
    return static_cast<double>(total) / (static_cast<double>(node_count) * k);
}

}  // namespace hcrn
