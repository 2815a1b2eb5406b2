#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace homqd::lm {

// Writes residuals r(params) into the output span. Must be deterministic.
using ResidualFn = std::function<void(std::span<const double>, std::span<double>)>;

struct Options {
    int max_iterations = 500;
    double gradient_tol = 1e-8;        // on ||J^T r||_inf
    double relative_cost_tol = 1e-10;  // on accepted relative cost decrease
    double initial_damping = 1e-6;     // relative to diag(J^T J)
    double fd_relative_step = 6e-6;    // central differences
};

enum class Termination {
    gradient,         // ||J^T r||_inf below tolerance
    cost_change,      // accepted step changed the cost by less than the tolerance
    max_iterations,
    damping_overflow, // no acceptable step at any damping
    non_finite,       // residuals not finite at the starting point
};

std::string to_string(Termination t);

struct Result {
    std::vector<double> params;
    std::vector<double> residuals;
    double cost = 0.0;           // sum of squared residuals
    double residual_norm = 0.0;  // sqrt(cost)
    double gradient_norm = 0.0;  // ||J^T r||_inf at the returned point
    int iterations = 0;          // linear solves attempted
    bool converged = false;
    Termination termination = Termination::max_iterations;
    Eigen::MatrixXd jtj;         // J^T J at the returned point
};

// Central-difference Jacobian, n_residuals x params.size().
Eigen::MatrixXd jacobian(const ResidualFn& fn, std::span<const double> params,
                         std::size_t n_residuals, double relative_step);

// Damped Gauss-Newton (Levenberg-Marquardt with Marquardt diagonal scaling).
// Never throws on numerical trouble: failures come back as converged=false
// with the termination reason set.
Result minimize(const ResidualFn& fn, std::vector<double> initial, std::size_t n_residuals,
                const Options& options = {});

}  // namespace homqd::lm
