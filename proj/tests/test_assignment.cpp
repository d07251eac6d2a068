#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "hcrn/assignment.hpp"

using namespace hcrn;

namespace {

WeightMatrix make(std::initializer_list<std::initializer_list<double>> rows) {
    WeightMatrix W;
    W.values.resize(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.begin()->size()));
    int r = 0;
    for (const auto& row : rows) {
        int c = 0;
        for (double v : row) W.values(r, c++) = v;
        ++r;
    }
    return W;
}

WeightMatrix random_matrix(std::mt19937_64& rng, int M, int N) {
    std::uniform_real_distribution<double> u(0.0, 10.0);
    WeightMatrix W;
    W.values.resize(M, N);
    for (int m = 0; m < M; ++m)
        for (int n = 0; n < N; ++n) W.values(m, n) = u(rng);
    return W;
}

// Depth-first search over injective assignments, independent of enumerate_matchings. Sums
// accumulate in node order so they round exactly like utility().
double brute_force(const WeightMatrix& W, int m, std::vector<char>& used, double acc = 0.0) {
    if (m == W.rows()) return acc;
    double best = -1e300;
    for (int n = 0; n < W.cols(); ++n) {
        if (used[n]) continue;
        used[n] = 1;
        best = std::max(best, brute_force(W, m + 1, used, acc + W.values(m, n)));
        used[n] = 0;
    }
    return best;
}

}  // namespace

TEST_CASE("utility") {
    CHECK(utility(make({{1, 0}, {0, 1}}), Matching{{0, 1}}) == 2.0);
    CHECK(utility(make({{0, 0}, {0, 0}}), Matching{{1, 0}}) == 0.0);
    CHECK_THROWS(utility(make({{1, 0}, {0, 1}}), Matching{{0}}));

    std::mt19937_64 rng(1);
    const auto W = random_matrix(rng, 4, 6);
    const Matching pi{{5, 2, 0, 3}};
    CHECK(utility(W, pi) == W.values(0, 5) + W.values(1, 2) + W.values(2, 0) + W.values(3, 3));
}

TEST_CASE("matching validity") {
    CHECK(is_valid_matching(Matching{{0, 2, 1}}, 3));
    CHECK_FALSE(is_valid_matching(Matching{{0, 0}}, 3));
    CHECK_FALSE(is_valid_matching(Matching{{0, 3}}, 3));
    CHECK_FALSE(is_valid_matching(Matching{{-1, 1}}, 3));
}

TEST_CASE("solver on small matrices") {
    auto r = max_weight_matching(make({{2, 1}, {1, 2}}));
    CHECK(r.matching.channels == std::vector<int>{0, 1});
    CHECK(r.utility == 4.0);
    r = max_weight_matching(make({{1, 0}, {0, 1}}));
    CHECK(r.matching.channels == std::vector<int>{0, 1});
    CHECK(r.utility == 2.0);
    r = max_weight_matching(make({{0, 5, 1}, {0, 5, 3}}));
    CHECK(r.utility == 8.0);
    CHECK(r.matching.channels == std::vector<int>{1, 2});
}

TEST_CASE("solver breaks ties lexicographically") {
    const auto r = max_weight_matching(make({{1, 1, 1}, {1, 1, 1}}));
    CHECK(r.matching.channels == std::vector<int>{0, 1});
    const auto s = max_weight_matching(make({{0, 0, 0}}));
    CHECK(s.matching.channels == std::vector<int>{0});
}

TEST_CASE("solver rejects M > N and non-finite weights") {
    CHECK_THROWS(max_weight_matching(make({{1}, {2}})));
    auto W = make({{1, 2}, {3, 4}});
    W.values(0, 0) = std::nan("");
    CHECK_THROWS(max_weight_matching(W));
}

TEST_CASE("solver equals brute force on random 4x6 matrices") {
    std::mt19937_64 rng(77);
    for (int t = 0; t < 100; ++t) {
        const auto W = random_matrix(rng, 4, 6);
        std::vector<char> used(6, 0);
        const double best = brute_force(W, 0, used);
        const auto r = max_weight_matching(W);
        CHECK(is_valid_matching(r.matching, 6));
        CHECK(r.utility == utility(W, r.matching));
        double enumerated = -1e300;
        for (const auto& pi : enumerate_matchings(4, 6)) enumerated = std::max(enumerated, utility(W, pi));
        CHECK(enumerated == best);
        CHECK(r.utility == enumerated);
    }
}

TEST_CASE("solver equals brute force on integer matrices with many ties") {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> small(0, 2);
    for (int t = 0; t < 200; ++t) {
        WeightMatrix W;
        W.values.resize(3, 4);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 4; ++j) W.values(i, j) = small(rng);
        Matching first_best;
        double best = -1.0;
        for (const auto& pi : enumerate_matchings(3, 4)) {
            const double u = utility(W, pi);
            if (u > best) {
                best = u;
                first_best = pi;
            }
        }
        const auto r = max_weight_matching(W);
        CHECK(r.utility == best);
        CHECK(r.matching == first_best);
    }
}

TEST_CASE("enumeration counts and order") {
    CHECK(enumerate_matchings(1, 3).size() == 3);
    CHECK(enumerate_matchings(2, 2).size() == 2);
    CHECK(enumerate_matchings(5, 8).size() == 6720);
    CHECK(matching_count(5, 8) == 8ull * 7 * 6 * 5 * 4);
    const auto all = enumerate_matchings(3, 5);
    CHECK(std::is_sorted(all.begin(), all.end()));
    CHECK(std::set<Matching>(all.begin(), all.end()).size() == all.size());
    for (const auto& pi : all) CHECK(is_valid_matching(pi, 5));
    CHECK_THROWS_AS(enumerate_matchings(5, 8, 100), std::length_error);
}

TEST_CASE("cumulative utility and regret") {
    std::vector<HistoryEntry> empty;
    CHECK(cumulative_utility(empty) == 0.0);
    CHECK(cumulative_regret(empty) == 0.0);

    const auto W = make({{3, 1}, {2, 5}});
    std::vector<HistoryEntry> one = {{W, Matching{{1, 0}}}};
    CHECK(cumulative_utility(one) == 3.0);
    // optimum 8, chosen 3
    CHECK(cumulative_regret(one) == 5.0);

    const auto W2 = make({{1, 4}, {6, 2}});
    std::vector<HistoryEntry> three = {
        {W, Matching{{0, 1}}}, {W2, Matching{{0, 1}}}, {W2, Matching{{1, 0}}}};
    // utilities 8, 3, 10; optima 8, 10, 10
    CHECK(cumulative_utility(three) == 21.0);
    CHECK(cumulative_regret(three) == 7.0);
    CHECK(regret_curve(three) == std::vector<double>{0.0, 7.0, 7.0});

    std::vector<HistoryEntry> optimal;
    for (int k = 0; k < 10; ++k) {
        std::mt19937_64 rng(k);
        const auto Wk = random_matrix(rng, 3, 5);
        optimal.push_back({Wk, max_weight_matching(Wk).matching});
    }
    for (double r : regret_curve(optimal)) CHECK(r == 0.0);
}

TEST_CASE("regret is non-decreasing on random histories") {
    std::mt19937_64 rng(31);
    for (int t = 0; t < 20; ++t) {
        std::vector<HistoryEntry> h;
        const auto all = enumerate_matchings(3, 5);
        std::uniform_int_distribution<std::size_t> pick(0, all.size() - 1);
        for (int k = 0; k < 50; ++k) h.push_back({random_matrix(rng, 3, 5), all[pick(rng)]});
        const auto curve = regret_curve(h);
        CHECK(std::is_sorted(curve.begin(), curve.end()));
        CHECK(curve.back() == doctest::Approx(cumulative_regret(h)));
    }
}

TEST_CASE("average feedback") {
    const std::vector<long long> counts = {10, 0};
    CHECK(average_feedback(counts, 5, 2) == 1.0);
    const std::vector<long long> zeros = {0, 0, 0};
    CHECK(average_feedback(zeros, 5, 3) == 0.0);
    CHECK_THROWS(average_feedback(counts, 5, 0));
    // full M x N matrix unicast to each of M = 5 nodes over N = 8 channels
    const std::vector<long long> steady(100, 5 * 5 * 8);
    CHECK(average_feedback(steady, 5, 100) == 40.0);
}
