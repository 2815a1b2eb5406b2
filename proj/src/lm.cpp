#include "homqd/lm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "homqd/errors.hpp"

namespace homqd::lm {

namespace {

constexpr double kMaxDamping = 1e16;

bool all_finite(const Eigen::VectorXd& v) { return v.allFinite(); }

Eigen::VectorXd evaluate(const ResidualFn& fn, const Eigen::VectorXd& x, std::size_t n) {
    Eigen::VectorXd r(static_cast<Eigen::Index>(n));
    fn(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())),
       std::span<double>(r.data(), n));
    return r;
}

}  // namespace

std::string to_string(Termination t) {
    switch (t) {
        case Termination::gradient: return "gradient";
        case Termination::cost_change: return "cost_change";
        case Termination::max_iterations: return "max_iterations";
        case Termination::damping_overflow: return "damping_overflow";
        case Termination::non_finite: return "non_finite";
    }
    return "unknown";
}

Eigen::MatrixXd jacobian(const ResidualFn& fn, std::span<const double> params,
                         std::size_t n_residuals, double relative_step) {
    const auto p = static_cast<Eigen::Index>(params.size());
    Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(params.data(), p);
    Eigen::MatrixXd jac(static_cast<Eigen::Index>(n_residuals), p);
    for (Eigen::Index k = 0; k < p; ++k) {
        const double h = relative_step * std::max(std::abs(x[k]), 1.0);
        const double saved = x[k];
        x[k] = saved + h;
        const Eigen::VectorXd up = evaluate(fn, x, n_residuals);
        x[k] = saved - h;
        const Eigen::VectorXd down = evaluate(fn, x, n_residuals);
        x[k] = saved;
        jac.col(k) = (up - down) / (2.0 * h);
    }
    return jac;
}

Result minimize(const ResidualFn& fn, std::vector<double> initial, std::size_t n_residuals,
                const Options& options) {
    if (initial.empty()) {
        throw ConfigError("least squares needs at least one free parameter");
    }
    if (n_residuals < initial.size()) {
        throw ConfigError("fewer residuals than free parameters");
    }
    const auto p = static_cast<Eigen::Index>(initial.size());
    Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(initial.data(), p);

    Result result;
    auto finish = [&](const Eigen::VectorXd& r, const Eigen::MatrixXd& jac) {
        result.params.assign(x.data(), x.data() + p);
        result.residuals.assign(r.data(), r.data() + r.size());
        result.cost = r.squaredNorm();
        result.residual_norm = std::sqrt(result.cost);
        result.jtj = jac.transpose() * jac;
        result.gradient_norm = (jac.transpose() * r).cwiseAbs().maxCoeff();
        return result;
    };

    Eigen::VectorXd r = evaluate(fn, x, n_residuals);
    if (!x.allFinite() || !all_finite(r)) {
        result.termination = Termination::non_finite;
        result.params = initial;
        result.residuals.assign(r.data(), r.data() + r.size());
        result.cost = result.residual_norm = std::numeric_limits<double>::infinity();
        result.gradient_norm = std::numeric_limits<double>::infinity();
        return result;
    }
    double cost = r.squaredNorm();
    double damping = options.initial_damping;

    auto jac_at = [&](const Eigen::VectorXd& at) {
        return jacobian(fn, std::span<const double>(at.data(), static_cast<std::size_t>(p)),
                        n_residuals, options.fd_relative_step);
    };
    Eigen::MatrixXd jac = jac_at(x);

    while (true) {
        const Eigen::VectorXd grad = jac.transpose() * r;
        if (grad.cwiseAbs().maxCoeff() < options.gradient_tol) {
            result.converged = true;
            result.termination = Termination::gradient;
            return finish(r, jac);
        }
        const Eigen::MatrixXd hess = jac.transpose() * jac;
        Eigen::VectorXd scale = hess.diagonal();
        const double floor = std::max(scale.maxCoeff(), 1.0) * 1e-12;
        scale = scale.cwiseMax(floor);

        bool accepted = false;
        while (!accepted) {
            if (result.iterations >= options.max_iterations) {
                result.termination = Termination::max_iterations;
                return finish(r, jac);
            }
            ++result.iterations;

            Eigen::MatrixXd lhs = hess;
            lhs.diagonal() += damping * scale;
            const Eigen::LDLT<Eigen::MatrixXd> ldlt(lhs);
            Eigen::VectorXd step;
            if (ldlt.info() == Eigen::Success) {
                step = ldlt.solve(-grad);
            }
            if (ldlt.info() != Eigen::Success || !step.allFinite()) {
                damping *= 10.0;
                if (damping > kMaxDamping) {
                    result.termination = Termination::damping_overflow;
                    return finish(r, jac);
                }
                continue;
            }

            const Eigen::VectorXd x_new = x + step;
            const Eigen::VectorXd r_new = evaluate(fn, x_new, n_residuals);
            const double cost_new = all_finite(r_new) ? r_new.squaredNorm()
                                                      : std::numeric_limits<double>::infinity();
            const double predicted = -(2.0 * step.dot(grad) + step.dot(hess * step));

            if (cost_new < cost) {
                const double rho = predicted > 0.0 ? (cost - cost_new) / predicted : 0.0;
                const double relative = (cost - cost_new) / std::max(cost, 1e-300);
                x = x_new;
                r = r_new;
                cost = cost_new;
                if (rho > 0.75) {
                    damping = std::max(damping / 10.0, 1e-15);
                } else if (rho < 0.25) {
                    damping *= 2.0;
                }
                accepted = true;
                jac = jac_at(x);
                if (relative < options.relative_cost_tol) {
                    result.converged = true;
                    result.termination = Termination::cost_change;
                    return finish(r, jac);
                }
            } else {
                // Rounding-level stall at the minimum.
                if (predicted >= 0.0 && predicted < options.relative_cost_tol * cost) {
                    result.converged = true;
                    result.termination = Termination::cost_change;
                    return finish(r, jac);
                }
                damping *= 10.0;
                if (damping > kMaxDamping) {
                    result.termination = Termination::damping_overflow;
                    return finish(r, jac);
                }
            }
        }
    }
}

}  // namespace homqd::lm
