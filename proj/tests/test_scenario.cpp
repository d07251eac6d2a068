#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <set>

#include "hcrn/scenario.hpp"

using namespace hcrn;

TEST_CASE("place_nodes stays inside the area with dense ids") {
    GeometryConfig g;
    g.area_size = 10000.0;
    g.node_count = 5;
    std::mt19937_64 rng(42);
    const auto nodes = place_nodes(rng, g);
    REQUIRE(nodes.size() == 5);
    for (int i = 0; i < 5; ++i) {
        CHECK(nodes[i].id == i);
        CHECK(nodes[i].position.x() >= 0.0);
        CHECK(nodes[i].position.x() <= 10000.0);
        CHECK(nodes[i].position.y() >= 0.0);
        CHECK(nodes[i].position.y() <= 10000.0);
    }
}

TEST_CASE("place_nodes is deterministic per seed") {
    GeometryConfig g;
    std::mt19937_64 a(7), b(7), c(8);
    const auto na = place_nodes(a, g);
    const auto nb = place_nodes(b, g);
    const auto nc = place_nodes(c, g);
    for (std::size_t i = 0; i < na.size(); ++i) CHECK(na[i].position == nb[i].position);
    CHECK(na[0].position != nc[0].position);
}

TEST_CASE("place_nodes with a single node") {
    GeometryConfig g;
    g.node_count = 1;
    std::mt19937_64 rng(1);
    CHECK(place_nodes(rng, g).size() == 1);
}

TEST_CASE("geometry validation") {
    GeometryConfig g;
    g.node_count = 0;
    CHECK_THROWS(g.validate());
    g = GeometryConfig{};
    g.area_size = 0.0;
    CHECK_THROWS(g.validate());
    g = GeometryConfig{};
    g.pri_duration = 0.0;
    CHECK_THROWS(g.validate());
}

TEST_CASE("linear propagation") {
    const TargetTruth s{{0.0, 0.0}, {141.42, 141.42}};
    const auto one = propagate_target(s, 1.0);
    CHECK(one.position.x() == doctest::Approx(141.42));
    CHECK(one.position.y() == doctest::Approx(141.42));
    CHECK(propagate_target(s, 0.0).position == s.position);

    GeometryConfig g;
    CHECK(g.cpi_duration() == doctest::Approx(0.0524288));
    const double t = 700 * g.cpi_duration();
    CHECK(t == doctest::Approx(36.70016));
    const auto end = propagate_target(s, t);
    // 141.42 * 36.70016
    CHECK(end.position.x() == doctest::Approx(5190.1366).epsilon(1e-6));
}

TEST_CASE("propagation composes exactly") {
    const TargetTruth s{{12.0, -3.0}, {7.5, 2.25}};
    const auto two_steps = propagate_target(propagate_target(s, 0.3), 0.7);
    const auto one_step = propagate_target(s, 1.0);
    CHECK((two_steps.position - one_step.position).norm() < 1e-12);
}

TEST_CASE("observables on a 3-4-5 triangle") {
    const RadarNode node{0, {0.0, 0.0}};
    const TargetTruth t{{3000.0, 4000.0}, {0.0, 0.0}};
    const auto o = true_observables(node, t);
    CHECK(o.range == doctest::Approx(5000.0));
    CHECK(o.radial_velocity == doctest::Approx(0.0));
    CHECK(o.angle == doctest::Approx(std::atan2(4000.0, 3000.0)));
}

TEST_CASE("tangential motion has zero radial velocity") {
    const RadarNode node{0, {0.0, 0.0}};
    const TargetTruth t{{3000.0, 4000.0}, {-4.0, 3.0}};
    CHECK(std::abs(true_observables(node, t).radial_velocity) < 1e-12);
}

TEST_CASE("radial velocity matches a dot-product oracle") {
    const RadarNode node{0, {1000.0, 0.0}};
    const TargetTruth t{{0.0, 0.0}, {141.42, 141.42}};
    const auto o = true_observables(node, t);
    CHECK(o.range == doctest::Approx(1000.0));
    // unit LOS node->target is (-1, 0); opening rate = v . u
    CHECK(o.radial_velocity == doctest::Approx(-141.42));
    CHECK(o.angle == doctest::Approx(std::numbers::pi));
}

TEST_CASE("coincident node and target is rejected") {
    const RadarNode node{0, {5.0, 5.0}};
    const TargetTruth t{{5.0, 5.0}, {1.0, 0.0}};
    CHECK_THROWS_AS(true_observables(node, t), std::domain_error);
}
