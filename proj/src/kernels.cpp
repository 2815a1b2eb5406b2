#include "homqd/kernels.hpp"

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "homqd/errors.hpp"
#include "homqd/units.hpp"

namespace homqd::kernels {

namespace {

using cplx = std::complex<double>;

cplx phase(double frequency_thz, double delay_ps) {
    return std::polar(1.0, kTwoPi * frequency_thz * delay_ps);
}

// Squared modulus of the coincidence amplitude for detecting nu1 at one
// output of the second beamsplitter and nu2 at the other. The four terms are
// the transmit/reflect histories through both beamsplitters.
double cascaded_intensity(double nu1, double nu2, double tau1, double tau2) {
    if (tau1 == 0.0) {
        // tau1 -> 0 limit of the amplitude divided by tau1; the overall scale
        // cancels against the matching normalization.
        const cplx first = cplx(0.0, kTwoPi * (nu1 - nu2));
        return 0.0625 * std::norm((phase(nu1, tau2) + phase(nu2, tau2)) * first);
    }
    const cplx amp = phase(nu1, tau1) * phase(nu2, tau2) + phase(nu1, tau1 + tau2) -
                     phase(nu2, tau1) * phase(nu1, tau2) - phase(nu2, tau1 + tau2);
    return 0.0625 * std::norm(amp);
}

// Anti-bunched weight after the first beamsplitter, same scale convention.
double antibunched_intensity(double nu1, double nu2, double tau1) {
    if (tau1 == 0.0) {
        const double d = kTwoPi * (nu1 - nu2);
        return 0.25 * d * d;
    }
    return 0.25 * std::norm(phase(nu1, tau1) - phase(nu2, tau1));
}

double normalization(const DetuningNodes& nodes, double tau1) {
    double acc = 0.0;
    for (std::size_t k = 0; k < nodes.detuning.size(); ++k) {
        const double nu1 = nodes.center_thz - 0.5 * nodes.detuning[k];
        const double nu2 = nodes.center_thz + 0.5 * nodes.detuning[k];
        acc += nodes.weight[k] * antibunched_intensity(nu1, nu2, tau1);
    }
    if (!(acc > 0.0)) {
        throw NumericError("anti-bunched spectral weight vanishes");
    }
    return acc;
}

double fringe_point(const DetuningNodes& nodes, double tau1, double tau2, double norm) {
    double acc = 0.0;
    for (std::size_t k = 0; k < nodes.detuning.size(); ++k) {
        const double nu1 = nodes.center_thz - 0.5 * nodes.detuning[k];
        const double nu2 = nodes.center_thz + 0.5 * nodes.detuning[k];
        acc += nodes.weight[k] * cascaded_intensity(nu1, nu2, tau1, tau2);
    }
    return acc / norm;
}

double normal_cdf(double x, double sigma) {
    return 0.5 * std::erfc(-x / (sigma * std::numbers::sqrt2));
}

double normal_pdf(double x, double sigma) {
    const double z = x / sigma;
    return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

// Mean of a centered Gaussian of width sigma over s_c + U, U triangular on
// [-h, h]: the distribution of nu1 + nu2 across a square pixel of side h.
double pixel_averaged_gaussian(double s_c, double sigma, double h) {
    const double lo = s_c - h;
    const double hi = s_c + h;
    const double f1_left = normal_cdf(s_c, sigma) - normal_cdf(lo, sigma);
    const double f2_left = sigma * sigma * (normal_pdf(lo, sigma) - normal_pdf(s_c, sigma));
    const double f1_right = normal_cdf(hi, sigma) - normal_cdf(s_c, sigma);
    const double f2_right = sigma * sigma * (normal_pdf(s_c, sigma) - normal_pdf(hi, sigma));
    const double left = (h - s_c) * f1_left + f2_left;
    const double right = (h + s_c) * f1_right - f2_right;
    return std::max(0.0, (left + right) / (h * h));
}

struct MapContext {
    double nu_p;
    double sigma_pump;
    double sigma_pm;
    double h;
    double tau1;
};

double map_pixel(const MapContext& ctx, double nu1, double nu2) {
    const double pump = pixel_averaged_gaussian(nu1 + nu2 - ctx.nu_p, ctx.sigma_pump, ctx.h);
    const double pm = normal_pdf(0.5 * (nu1 - nu2), ctx.sigma_pm);
    const double s = std::sin(std::numbers::pi * (nu2 - nu1) * ctx.tau1);
    return pump * pm * s * s;
}

MapContext make_context(const CoincidenceMapArgs& args) {
    args.grid.validate();
    const std::size_t n = args.grid.n_points;
    if (args.out.size() != n * n) {
        throw ConfigError("coincidence map output has the wrong size");
    }
    return MapContext{args.model.pump_frequency(), args.model.pump_sigma_thz(),
                      args.model.marginal_sigma_thz(), args.grid.step(), args.tau1_ps};
}

void check_fringe_args(const CascadedFringeArgs& args) {
    if (args.nodes.detuning.size() != args.nodes.weight.size()) {
        throw ConfigError("detuning nodes and weights differ in length");
    }
    if (args.tau2_ps.size() != args.out.size()) {
        throw ConfigError("fringe output has the wrong size");
    }
}

}  // namespace

namespace serial {

void cascaded_fringe(const CascadedFringeArgs& args) {
    check_fringe_args(args);
    const double norm = normalization(args.nodes, args.tau1_ps);
    for (std::size_t i = 0; i < args.tau2_ps.size(); ++i) {
        args.out[i] = fringe_point(args.nodes, args.tau1_ps, args.tau2_ps[i], norm);
    }
}

void coincidence_map(const CoincidenceMapArgs& args) {
    const MapContext ctx = make_context(args);
    const std::size_t n = args.grid.n_points;
    for (std::size_t i = 0; i < n; ++i) {
        const double nu1 = args.grid.at(i);
        for (std::size_t j = 0; j < n; ++j) {
            args.out[i * n + j] = map_pixel(ctx, nu1, args.grid.at(j));
        }
    }
}

}  // namespace serial

namespace omp {

void cascaded_fringe(const CascadedFringeArgs& args) {
    check_fringe_args(args);
    const double norm = normalization(args.nodes, args.tau1_ps);
    const auto n = static_cast<std::ptrdiff_t>(args.tau2_ps.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        args.out[i] = fringe_point(args.nodes, args.tau1_ps, args.tau2_ps[i], norm);
    }
}

void coincidence_map(const CoincidenceMapArgs& args) {
    const MapContext ctx = make_context(args);
    const auto n = static_cast<std::ptrdiff_t>(args.grid.n_points);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const double nu1 = args.grid.at(static_cast<std::size_t>(i));
        for (std::ptrdiff_t j = 0; j < n; ++j) {
            args.out[i * n + j] = map_pixel(ctx, nu1, args.grid.at(static_cast<std::size_t>(j)));
        }
    }
}

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace omp

}  // namespace homqd::kernels
