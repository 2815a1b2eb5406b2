#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "homqd/errors.hpp"
#include "homqd/lm.hpp"

using namespace homqd;

TEST_CASE("linear least squares is solved in at most two iterations") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> n01;
    const int rows = 40, cols = 5;
    Eigen::MatrixXd a(rows, cols);
    Eigen::VectorXd b(rows);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) a(i, j) = n01(rng);
        b[i] = n01(rng);
    }
    const Eigen::VectorXd exact = a.colPivHouseholderQr().solve(b);
    auto fn = [&](std::span<const double> x, std::span<double> r) {
        const Eigen::Map<const Eigen::VectorXd> xv(x.data(), cols);
        Eigen::Map<Eigen::VectorXd>(r.data(), rows) = a * xv - b;
    };
    const lm::Result res = lm::minimize(fn, std::vector<double>(cols, 0.0), rows);
    CHECK(res.converged);
    CHECK(res.iterations <= 2);
    for (int j = 0; j < cols; ++j) CHECK(std::abs(res.params[j] - exact[j]) < 1e-9);
}

TEST_CASE("Rosenbrock residuals reach the global minimum") {
    auto fn = [](std::span<const double> x, std::span<double> r) {
        r[0] = 10.0 * (x[1] - x[0] * x[0]);
        r[1] = 1.0 - x[0];
    };
    const lm::Result res = lm::minimize(fn, {-1.2, 1.0}, 2);
    CHECK(res.converged);
    CHECK(res.params[0] == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(res.params[1] == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(res.residual_norm < 1e-8);
}

TEST_CASE("exponential decay fit recovers exact parameters") {
    std::vector<double> t(30), y(30);
    for (std::size_t i = 0; i < t.size(); ++i) {
        t[i] = 0.1 * static_cast<double>(i);
        y[i] = 2.5 * std::exp(-1.3 * t[i]) + 0.2;
    }
    auto fn = [&](std::span<const double> p, std::span<double> r) {
        for (std::size_t i = 0; i < t.size(); ++i) r[i] = p[0] * std::exp(-p[1] * t[i]) + p[2] - y[i];
    };
    const lm::Result res = lm::minimize(fn, {1.0, 0.5, 0.0}, t.size());
    CHECK(res.converged);
    CHECK(res.params[0] == doctest::Approx(2.5).epsilon(1e-7));
    CHECK(res.params[1] == doctest::Approx(1.3).epsilon(1e-7));
    CHECK(res.params[2] == doctest::Approx(0.2).epsilon(1e-6));
}

TEST_CASE("central-difference Jacobian matches the analytic one") {
    auto fn = [](std::span<const double> x, std::span<double> r) {
        r[0] = std::sin(x[0]) * x[1];
        r[1] = x[0] * x[0] + std::exp(x[1]);
    };
    const std::vector<double> x{0.7, -0.3};
    const Eigen::MatrixXd j = lm::jacobian(fn, x, 2, 6e-6);
    CHECK(j(0, 0) == doctest::Approx(std::cos(0.7) * -0.3).epsilon(1e-9));
    CHECK(j(0, 1) == doctest::Approx(std::sin(0.7)).epsilon(1e-9));
    CHECK(j(1, 0) == doctest::Approx(1.4).epsilon(1e-9));
    CHECK(j(1, 1) == doctest::Approx(std::exp(-0.3)).epsilon(1e-9));
}

TEST_CASE("failure modes are reported, not thrown") {
    auto nan_fn = [](std::span<const double>, std::span<double> r) { r[0] = std::nan(""); };
    const lm::Result bad = lm::minimize(nan_fn, {1.0}, 1);
    CHECK_FALSE(bad.converged);
    CHECK(bad.termination == lm::Termination::non_finite);

    auto slow = [](std::span<const double> x, std::span<double> r) {
        r[0] = 10.0 * (x[1] - x[0] * x[0]);
        r[1] = 1.0 - x[0];
    };
    lm::Options opt;
    opt.max_iterations = 2;
    const lm::Result capped = lm::minimize(slow, {-1.2, 1.0}, 2, opt);
    CHECK_FALSE(capped.converged);
    CHECK(capped.termination == lm::Termination::max_iterations);
    CHECK(lm::to_string(capped.termination) == "max_iterations");
}

TEST_CASE("precondition violations throw") {
    auto fn = [](std::span<const double>, std::span<double>) {};
    CHECK_THROWS_AS(lm::minimize(fn, {}, 3), ConfigError);
    CHECK_THROWS_AS(lm::minimize(fn, {1.0, 2.0}, 1), ConfigError);
}
