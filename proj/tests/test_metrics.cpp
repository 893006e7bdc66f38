#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "rbffd/metrics.hpp"
#include "oracles.hpp"

using namespace rbffd;

TEST_CASE("relative_l2_error basics") {
    Eigen::VectorXd u(3);
    u << 1.0, -2.0, 2.0;
    CHECK(relative_l2_error(u, u) == 0.0);
    CHECK(relative_l2_error(Eigen::VectorXd::Zero(3), u) == doctest::Approx(1.0));
    CHECK(relative_l2_error(2.0 * u, u) == doctest::Approx(1.0));
    CHECK_THROWS_AS(relative_l2_error(u, Eigen::VectorXd::Zero(3)), std::invalid_argument);
    CHECK_THROWS_AS(relative_l2_error(u, Eigen::VectorXd::Ones(2)), std::invalid_argument);
}

TEST_CASE("relative_energy basics and exact quadratic scaling") {
    Eigen::VectorXd u(4);
    u << 0.5, -1.0, 2.0, 0.25;
    CHECK(relative_energy(u, u) == 1.0);
    CHECK(relative_energy(2.0 * u, u) == 4.0); // exact for powers of two
    CHECK(relative_energy(Eigen::VectorXd::Zero(4), u) == 0.0);
    CHECK(relative_energy(0.5 * u, u) == 0.25);
}

TEST_CASE("metrics invariant under node permutation") {
    auto g = oracles::rng(5);
    const int n = 64;
    Eigen::VectorXd u(n), v(n);
    for (int i = 0; i < n; ++i) {
        u(i) = oracles::uniform(g, -1, 1);
        v(i) = oracles::uniform(g, -1, 1) + 0.5;
    }
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = n - 1; i > 0; --i)
        std::swap(perm[i], perm[static_cast<int>(oracles::uniform(g, 0, i + 1 - 1e-12))]);
    Eigen::VectorXd up(n), vp(n);
    for (int i = 0; i < n; ++i) {
        up(i) = u(perm[i]);
        vp(i) = v(perm[i]);
    }
    CHECK(relative_l2_error(up, vp) == doctest::Approx(relative_l2_error(u, v)).epsilon(1e-14));
    CHECK(relative_energy(up, vp) == doctest::Approx(relative_energy(u, v)).epsilon(1e-14));
}

TEST_CASE("fit_order recovers an exact power law") {
    std::vector<std::pair<double, double>> samples;
    for (double h : {0.4, 0.2, 0.1, 0.05, 0.025}) samples.emplace_back(h, h * h);
    const FitResult fit = fit_order(samples, FitModel::HPower);
    CHECK(fit.k == doctest::Approx(2.0).epsilon(1e-3));
    CHECK(fit.d <= 1e-6);
}

TEST_CASE("fit_order recovers slope and plateau of 5*dt + 0.01") {
    std::vector<std::pair<double, double>> samples;
    for (double dt : {0.1, 0.05, 0.02, 0.01, 0.005, 0.002, 0.001})
        samples.emplace_back(dt, 5.0 * dt + 0.01);
    const FitResult fit = fit_order(samples, FitModel::DtPower);
    CHECK(fit.k == doctest::Approx(1.0).epsilon(0.02));
    CHECK(fit.d == doctest::Approx(0.01).epsilon(0.05));
}

TEST_CASE("fit_order tolerates multiplicative noise") {
    auto g = oracles::rng(17);
    int inside = 0;
    for (int mc = 0; mc < 20; ++mc) {
        std::vector<std::pair<double, double>> samples;
        for (double h : {0.4, 0.28, 0.2, 0.14, 0.1, 0.07, 0.05}) {
            const double noise = 1.0 + 0.05 * oracles::uniform(g, -1, 1);
            samples.emplace_back(h, std::pow(h, 1.5) * noise);
        }
        const FitResult fit = fit_order(samples, FitModel::HPower);
        inside += fit.k >= 1.3 && fit.k <= 1.7;
    }
    CHECK(inside >= 18); // Monte-Carlo check of the fitter
}

TEST_CASE("fit_order rejects degenerate inputs") {
    std::vector<std::pair<double, double>> two{{0.1, 1.0}, {0.2, 2.0}};
    CHECK_THROWS_AS(fit_order(two, FitModel::HPower), std::invalid_argument);
    std::vector<std::pair<double, double>> flat{{0.1, 1.0}, {0.2, 1.0}, {0.4, 1.0}};
    CHECK_THROWS_AS(fit_order(flat, FitModel::HPower), std::invalid_argument);
    std::vector<std::pair<double, double>> negscale{{-0.1, 1.0}, {0.2, 2.0}, {0.4, 3.0}};
    CHECK_THROWS_AS(fit_order(negscale, FitModel::HPower), std::invalid_argument);
}

TEST_CASE("metrics CSV layout with optional columns") {
    std::vector<MetricsRecord> recs;
    recs.push_back({0.0, 0.0, 1.0, 1.0000001, 0.32});
    recs.push_back({0.5, 0.03125, 0.75, std::nullopt, std::nullopt});
    std::stringstream ss;
    write_metrics_csv(ss, recs);
    std::string line;
    std::getline(ss, line);
    CHECK(line == "t,rel_error,rel_energy,c,rho");
    std::getline(ss, line);
    CHECK(line == "0,0,1,0.32,1.0000001");
    std::getline(ss, line);
    CHECK(line == "0.5,0.03125,0.75,,");
}
