#pragma once

// Reference computations written independently of the library kernels.

#include <cmath>
#include <functional>
#include <numbers>

namespace oracle {

inline constexpr double kC = 299792.458;  // nm/ps
inline constexpr double kPi = std::numbers::pi;

// Gaussian detuning density with the marginal FWHM converted at lambda0.
inline double detuning_sigma(double lambda0_nm, double fwhm_nm) {
    const double fwhm_thz = kC * fwhm_nm / (lambda0_nm * lambda0_nm);
    return 2.0 * fwhm_thz / (2.0 * std::sqrt(2.0 * std::log(2.0)));
}

inline double gauss(double x, double sigma) {
    return std::exp(-0.5 * x * x / (sigma * sigma)) / (sigma * std::sqrt(2.0 * kPi));
}

// Composite Simpson on [a, b] with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
    const double h = (b - a) / n;
    double acc = f(a) + f(b);
    for (int i = 1; i < n; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

// 1/4 |1 - e^{i 2 pi d tau1}|^2 averaged over a Gaussian detuning.
inline double coincidence_tau1(double sigma_d, double tau1) {
    return 0.5 * (1.0 - std::exp(-2.0 * kPi * kPi * sigma_d * sigma_d * tau1 * tau1));
}

// Second-beamsplitter coincidence from the reduced form
// P = 1/2 (1 + <cos 2 pi d tau2>_w), w ~ g(d) sin^2(pi d tau1).
inline double reduced_fringe(double sigma_d, double tau1, double tau2) {
    const double lim = 8.0 * sigma_d;
    auto w = [&](double d) {
        const double s = std::sin(kPi * d * tau1);
        return gauss(d, sigma_d) * s * s;
    };
    const double norm = simpson(w, -lim, lim, 20000);
    const double num = simpson([&](double d) { return w(d) * std::cos(2.0 * kPi * d * tau2); }, -lim, lim, 20000);
    return 0.5 * (1.0 + num / norm);
}

}  // namespace oracle
