#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "rbffd/geometry.hpp"
#include "oracles.hpp"

using namespace rbffd;

namespace {

NodeSet regular_torus_grid(double spacing) {
    const int m = static_cast<int>(std::lround(1.0 / spacing));
    std::vector<Point2> pts;
    for (int iy = 0; iy < m; ++iy)
        for (int ix = 0; ix < m; ++ix) pts.push_back({ix * spacing, iy * spacing});
    return NodeSet(std::move(pts), spacing, Metric::PeriodicTorus, {});
}

NodeSet random_nodes(int count, Metric metric, unsigned seed) {
    auto g = oracles::rng(seed);
    std::vector<Point2> pts;
    for (int i = 0; i < count; ++i)
        pts.push_back({oracles::uniform(g, 0.0, 1.0), oracles::uniform(g, 0.0, 1.0)});
    return NodeSet(std::move(pts), 1.0 / std::sqrt(count), metric, {});
}

double min_pairwise_distance(const NodeSet& nodes) {
    double best = 1e300;
    for (int i = 0; i < nodes.size(); ++i)
        for (int j = i + 1; j < nodes.size(); ++j) best = std::min(best, nodes.dist(i, j));
    return best;
}

} // namespace

TEST_CASE("periodic distance wraps and stays within sqrt(2)/2") {
    CHECK(distance({0.05, 0.5}, {0.95, 0.5}, Metric::PeriodicTorus) == doctest::Approx(0.1));
    CHECK(distance({0.05, 0.5}, {0.95, 0.5}, Metric::Euclidean) == doctest::Approx(0.9));

    auto g = oracles::rng(7);
    for (int t = 0; t < 200; ++t) {
        Point2 a{oracles::uniform(g, 0, 1), oracles::uniform(g, 0, 1)};
        Point2 b{oracles::uniform(g, 0, 1), oracles::uniform(g, 0, 1)};
        const double dab = distance(a, b, Metric::PeriodicTorus);
        CHECK(dab == doctest::Approx(distance(b, a, Metric::PeriodicTorus)));
        CHECK(dab <= std::sqrt(2.0) / 2.0 + 1e-12);
    }
}

TEST_CASE("generate_nodes torus density and separation") {
    const NodeSet nodes = generate_nodes(0.02, Domain::Torus, 42);
    // paper-scale check: h = 0.02 gives N ~ 2100
    CHECK(nodes.size() >= 1785);
    CHECK(nodes.size() <= 2415);
    // and the (1/h)^2 density band
    CHECK(nodes.size() >= static_cast<int>(0.85 * 2500));
    CHECK(nodes.size() <= static_cast<int>(1.15 * 2500));
    CHECK(nodes.boundary_ids().empty());
    for (const auto& p : nodes.points()) {
        CHECK(p[0] >= 0.0);
        CHECK(p[0] < 1.0);
        CHECK(p[1] >= 0.0);
        CHECK(p[1] < 1.0);
    }
}

TEST_CASE("generate_nodes coarse torus: tiny N with separation floor") {
    const NodeSet nodes = generate_nodes(0.4, Domain::Torus, 3);
    CHECK(nodes.size() >= 4);
    CHECK(nodes.size() <= 9);
    CHECK(min_pairwise_distance(nodes) >= 0.2);
}

TEST_CASE("generate_nodes square: boundary nodes on the edges, N ~ 1e4 at h=0.01") {
    const NodeSet nodes = generate_nodes(0.01, Domain::Square, 1);
    CHECK(nodes.size() >= 8500);
    CHECK(nodes.size() <= 11500);
    CHECK(!nodes.boundary_ids().empty());
    int on_edge = 0;
    for (int b : nodes.boundary_ids()) {
        const Point2& p = nodes.point(b);
        const bool edge = p[0] == 0.0 || p[0] == 1.0 || p[1] == 0.0 || p[1] == 1.0;
        CHECK(edge);
        on_edge += edge;
    }
    CHECK(on_edge == 4 * 100);
    // corners present
    std::set<std::pair<double, double>> pts;
    for (int b : nodes.boundary_ids()) pts.insert({nodes.point(b)[0], nodes.point(b)[1]});
    CHECK(pts.count({0.0, 0.0}) == 1);
    CHECK(pts.count({1.0, 1.0}) == 1);
    // boundary spacing ~ h along the bottom edge
    CHECK(pts.count({0.01, 0.0}) == 1);
}

TEST_CASE("generate_nodes quasi-uniformity floor and determinism") {
    const NodeSet a = generate_nodes(0.07, Domain::Torus, 11);
    const NodeSet b = generate_nodes(0.07, Domain::Torus, 11);
    REQUIRE(a.size() == b.size());
    for (int i = 0; i < a.size(); ++i) {
        CHECK(a.point(i)[0] == b.point(i)[0]);
        CHECK(a.point(i)[1] == b.point(i)[1]);
    }
    CHECK(min_pairwise_distance(a) >= 0.5 * 0.07);

    const NodeSet c = generate_nodes(0.07, Domain::Torus, 12);
    bool any_differs = c.size() != a.size();
    for (int i = 0; !any_differs && i < a.size(); ++i)
        any_differs = a.point(i)[0] != c.point(i)[0];
    CHECK(any_differs);

    const NodeSet sq = generate_nodes(0.05, Domain::Square, 5);
    CHECK(min_pairwise_distance(sq) >= 0.5 * 0.05);
}

TEST_CASE("generate_nodes rejects h out of range") {
    CHECK_THROWS_AS(generate_nodes(0.0, Domain::Torus, 1), std::invalid_argument);
    CHECK_THROWS_AS(generate_nodes(0.5, Domain::Torus, 1), std::invalid_argument);
    CHECK_THROWS_AS(generate_nodes(-0.1, Domain::Square, 1), std::invalid_argument);
}

TEST_CASE("find_stencils: n=1 gives the node itself") {
    const NodeSet nodes = generate_nodes(0.1, Domain::Torus, 2);
    const StencilTable table = find_stencils(nodes, 1);
    for (int i = 0; i < nodes.size(); ++i) {
        REQUIRE(table.stencil(i).size() == 1);
        CHECK(table.stencil(i)[0] == i);
    }
}

TEST_CASE("find_stencils wraps the periodic seam on a regular grid") {
    const NodeSet nodes = regular_torus_grid(0.1);
    const auto id = [](int ix, int iy) { return iy * 10 + ix; }; // grid fill order
    const int center = id(0, 5);
    REQUIRE(nodes.point(center)[0] == 0.0);
    REQUIRE(nodes.point(center)[1] == doctest::Approx(0.5));
    const StencilTable table = find_stencils(nodes, 5);
    const auto& st = table.stencil(center);
    CHECK(st[0] == center);
    const std::set<int> got(st.begin() + 1, st.end());
    const std::set<int> expected{id(9, 5), id(1, 5), id(0, 4), id(0, 6)};
    CHECK(got == expected);
}

TEST_CASE("find_stencils equals brute force on random sets") {
    for (unsigned seed : {1u, 2u, 3u, 4u, 5u}) {
        for (Metric metric : {Metric::PeriodicTorus, Metric::Euclidean}) {
            const NodeSet nodes = random_nodes(100 + 40 * static_cast<int>(seed), metric, seed);
            const int n = 12;
            const StencilTable table = find_stencils(nodes, n);
            for (int i = 0; i < nodes.size(); ++i) {
                CHECK(table.stencil(i) == oracles::brute_force_stencil(nodes, i, n));
            }
        }
    }
}

TEST_CASE("find_stencils brute force at larger N and n") {
    const NodeSet nodes = random_nodes(500, Metric::PeriodicTorus, 99);
    const StencilTable table = find_stencils(nodes, 30);
    for (int i = 0; i < nodes.size(); i += 17) {
        CHECK(table.stencil(i) == oracles::brute_force_stencil(nodes, i, 30));
    }
    // sortedness + distinctness invariants
    for (int i = 0; i < nodes.size(); ++i) {
        const auto& st = table.stencil(i);
        CHECK(st[0] == i);
        std::set<int> uniq(st.begin(), st.end());
        CHECK(uniq.size() == st.size());
        for (std::size_t t = 1; t < st.size(); ++t)
            CHECK(nodes.dist(i, st[t - 1]) <= nodes.dist(i, st[t]) + 1e-15);
    }
}

TEST_CASE("find_stencils validates n") {
    const NodeSet nodes = random_nodes(20, Metric::Euclidean, 4);
    CHECK_THROWS_AS(find_stencils(nodes, 0), std::invalid_argument);
    CHECK_THROWS_AS(find_stencils(nodes, 21), std::invalid_argument);
    CHECK_NOTHROW(find_stencils(nodes, 20));
}

TEST_CASE("node CSV round-trips") {
    const NodeSet nodes = generate_nodes(0.2, Domain::Square, 8);
    std::stringstream ss;
    nodes.write_csv(ss);
    const std::string first_line = ss.str().substr(0, ss.str().find('\n'));
    CHECK(first_line == "x,y,boundary");
    const NodeSet back = NodeSet::read_csv(ss, nodes.h(), nodes.metric());
    REQUIRE(back.size() == nodes.size());
    CHECK(back.boundary_ids() == nodes.boundary_ids());
    for (int i = 0; i < nodes.size(); ++i) {
        CHECK(back.point(i)[0] == nodes.point(i)[0]);
        CHECK(back.point(i)[1] == nodes.point(i)[1]);
    }
}
