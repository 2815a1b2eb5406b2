#include "homqd/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "homqd/errors.hpp"
#include "homqd/units.hpp"

namespace homqd {

namespace {

constexpr double kPumpFloorFwhm = 1e-6;  // THz

double gaussian(double x, double sigma) {
    const double z = x / sigma;
    return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) {
        throw ConfigError(std::string("non-finite ") + what);
    }
}

std::vector<double> trapezoid_weights(std::size_t n, double h) {
    std::vector<double> w(n, h);
    w.front() *= 0.5;
    w.back() *= 0.5;
    return w;
}

}  // namespace

double wavelength_to_frequency(double wavelength_nm) {
    if (!std::isfinite(wavelength_nm) || wavelength_nm <= 0.0) {
        throw ConfigError("wavelength must be positive and finite");
    }
    return kSpeedOfLight / wavelength_nm;
}

double frequency_to_wavelength(double frequency_thz) {
    if (!std::isfinite(frequency_thz) || frequency_thz <= 0.0) {
        throw ConfigError("frequency must be positive and finite");
    }
    return kSpeedOfLight / frequency_thz;
}

void BiphotonSpectrumModel::validate() const {
    if (!std::isfinite(center_wavelength_nm) || center_wavelength_nm <= 0.0) {
        throw ConfigError("model.center_wavelength_nm must be > 0");
    }
    if (!std::isfinite(marginal_fwhm_nm) || marginal_fwhm_nm <= 0.0) {
        throw ConfigError("model.marginal_fwhm_nm must be > 0");
    }
    if (marginal_fwhm_nm >= center_wavelength_nm) {
        throw ConfigError("model.marginal_fwhm_nm must be smaller than the center wavelength");
    }
    if (!std::isfinite(pump_fwhm_thz) || pump_fwhm_thz < 0.0) {
        throw ConfigError("model.pump_fwhm_thz must be >= 0");
    }
}

double BiphotonSpectrumModel::degenerate_frequency() const {
    return wavelength_to_frequency(center_wavelength_nm);
}

double BiphotonSpectrumModel::marginal_fwhm_thz() const {
    return kSpeedOfLight * marginal_fwhm_nm / (center_wavelength_nm * center_wavelength_nm);
}

double BiphotonSpectrumModel::marginal_sigma_thz() const {
    return marginal_fwhm_thz() / kFwhmPerSigma;
}

double BiphotonSpectrumModel::pump_sigma_thz() const {
    return std::max(pump_fwhm_thz, kPumpFloorFwhm) / kFwhmPerSigma;
}

double jsi_eval(const BiphotonSpectrumModel& model, double nu1_thz, double nu2_thz) {
    require_finite(nu1_thz, "signal frequency");
    require_finite(nu2_thz, "idler frequency");
    if (nu1_thz <= 0.0 || nu2_thz <= 0.0) {
        throw ConfigError("frequencies must be positive");
    }
    const double sum = nu1_thz + nu2_thz - model.pump_frequency();
    const double half_diff = 0.5 * (nu1_thz - nu2_thz);
    return gaussian(sum, model.pump_sigma_thz()) * gaussian(half_diff, model.marginal_sigma_thz());
}

double detuning_density(const BiphotonSpectrumModel& model, double detuning_thz) {
    require_finite(detuning_thz, "detuning");
    return gaussian(detuning_thz, model.detuning_sigma_thz());
}

double marginal_bandwidth(const BiphotonSpectrumModel& model) {
    model.validate();
    const double nu0 = model.degenerate_frequency();
    const double sigma_pm = model.marginal_sigma_thz();
    // Finite pump widths are resolved by the sum-axis quadrature; the floor
    // only matters for the pointwise density.
    const double sigma_p = model.pump_fwhm_thz / kFwhmPerSigma;

    // Marginal in nu1: int G_pump(s) G_pm(nu1 - nu0 - s/2) ds.
    const std::size_t n_sum = 257;
    const double sum_span = 8.0 * sigma_p;
    auto marginal_freq = [&](double nu1) {
        if (sigma_p <= 1e-9 * sigma_pm) {
            return gaussian(nu1 - nu0, sigma_pm);
        }
        const double h = 2.0 * sum_span / static_cast<double>(n_sum - 1);
        double acc = 0.0;
        for (std::size_t k = 0; k < n_sum; ++k) {
            const double s = -sum_span + h * static_cast<double>(k);
            const double w = (k == 0 || k + 1 == n_sum) ? 0.5 * h : h;
            acc += w * gaussian(s, sigma_p) * gaussian(nu1 - nu0 - 0.5 * s, sigma_pm);
        }
        return acc;
    };
    // Wavelength density: m(c/lambda) * c / lambda^2.
    auto density = [&](double lambda) {
        return marginal_freq(kSpeedOfLight / lambda) * kSpeedOfLight / (lambda * lambda);
    };

    // Locate the peak by golden-section search near lambda_0.
    const double lambda0 = model.center_wavelength_nm;
    const double wide = model.marginal_fwhm_nm + 4.0 * kSpeedOfLight * sigma_p / (nu0 * nu0);
    double a = lambda0 - 0.5 * wide;
    double b = lambda0 + 0.5 * wide;
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 200 && (b - a) > 1e-12 * lambda0; ++it) {
        const double c = b - phi * (b - a);
        const double d = a + phi * (b - a);
        if (density(c) > density(d)) {
            b = d;
        } else {
            a = c;
        }
    }
    const double peak_lambda = 0.5 * (a + b);
    const double half = 0.5 * density(peak_lambda);

    auto crossing = [&](double inside, double step) {
        double outside = inside + step;
        while (density(outside) > half) {
            outside += step;
        }
        double lo = inside;
        double hi = outside;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (density(mid) > half) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        return 0.5 * (lo + hi);
    };
    const double step = 0.25 * wide;
    return crossing(peak_lambda, step) - crossing(peak_lambda, -step);
}

FrequencyGrid FrequencyGrid::centered(double center_thz, double half_span_thz, std::size_t n_points) {
    FrequencyGrid g{center_thz - half_span_thz, center_thz + half_span_thz, n_points};
    g.validate();
    return g;
}

FrequencyGrid FrequencyGrid::for_model(const BiphotonSpectrumModel& model, std::size_t n_points,
                                       double sigmas) {
    model.validate();
    if (sigmas < 4.0) {
        throw ConfigError("frequency grid must span at least 4 envelope sigmas");
    }
    return centered(model.degenerate_frequency(), sigmas * model.marginal_sigma_thz(), n_points);
}

void FrequencyGrid::validate() const {
    if (n_points < kMinPoints) {
        throw ConfigError("frequency grid needs at least 16 points per axis");
    }
    if (!std::isfinite(min_thz) || !std::isfinite(max_thz) || !(max_thz > min_thz)) {
        throw ConfigError("frequency grid bounds must be finite and increasing");
    }
    if (min_thz <= 0.0) {
        throw ConfigError("frequency grid must stay at positive frequencies");
    }
}

bool FrequencyGrid::covers(const BiphotonSpectrumModel& model) const {
    const double nu0 = model.degenerate_frequency();
    const double reach = 4.0 * model.marginal_sigma_thz();
    // Half-step slack absorbs rounding in the end points.
    const double slack = 1e-9 * nu0;
    return min_thz <= nu0 - reach + slack && max_thz >= nu0 + reach - slack;
}

void JointSpectrumMap::validate() const {
    if (signal_nm.empty() || idler_nm.empty()) {
        throw ConfigError("spectrum map has an empty axis");
    }
    if (intensity.size() != signal_nm.size() * idler_nm.size()) {
        throw ConfigError("spectrum map intensity does not match its axes");
    }
    for (double v : intensity) {
        if (!std::isfinite(v) || v < 0.0) {
            throw ConfigError("spectrum map intensity must be finite and non-negative");
        }
    }
}

JointQuadrature::JointQuadrature(const BiphotonSpectrumModel& model, std::size_t detuning_points,
                                 std::size_t sum_points, double span_sigmas)
    : model_(model) {
    model_.validate();
    if (detuning_points < FrequencyGrid::kMinPoints || sum_points < 3) {
        throw ConfigError("quadrature grid too coarse");
    }
    if (span_sigmas < 4.0) {
        throw ConfigError("quadrature must span at least 4 envelope sigmas");
    }

    const double sd = model_.detuning_sigma_thz();
    const double hd = 2.0 * span_sigmas * sd / static_cast<double>(detuning_points - 1);
    detuning_.resize(detuning_points);
    for (std::size_t k = 0; k < detuning_points; ++k) {
        detuning_[k] = -span_sigmas * sd + hd * static_cast<double>(k);
    }
    detuning_trapezoid_ = trapezoid_weights(detuning_points, hd);

    const double sp = model_.pump_sigma_thz();
    const double hs = 2.0 * span_sigmas * sp / static_cast<double>(sum_points - 1);
    sum_.resize(sum_points);
    for (std::size_t k = 0; k < sum_points; ++k) {
        sum_[k] = -span_sigmas * sp + hs * static_cast<double>(k);
    }
    sum_weights_ = trapezoid_weights(sum_points, hs);

    pump_mass_ = 0.0;
    for (std::size_t k = 0; k < sum_points; ++k) {
        pump_mass_ += sum_weights_[k] * gaussian(sum_[k], sp);
    }
    weights_.resize(detuning_points);
    for (std::size_t k = 0; k < detuning_points; ++k) {
        weights_[k] = pump_mass_ * detuning_trapezoid_[k] * detuning_density(model_, detuning_[k]);
    }
}

double JointQuadrature::integrate(const std::function<double(double)>& of_detuning) const {
    double acc = 0.0;
    for (std::size_t k = 0; k < detuning_.size(); ++k) {
        acc += weights_[k] * of_detuning(detuning_[k]);
    }
    return acc;
}

double JointQuadrature::total_mass_2d() const {
    // nu1 = nu0 + s/2 - d/2, nu2 = nu0 + s/2 + d/2; |d(nu1,nu2)/d(s,d)| = 1/2.
    const double nu0 = model_.degenerate_frequency();
    double acc = 0.0;
    for (std::size_t a = 0; a < sum_.size(); ++a) {
        double row = 0.0;
        for (std::size_t k = 0; k < detuning_.size(); ++k) {
            const double nu1 = nu0 + 0.5 * sum_[a] - 0.5 * detuning_[k];
            const double nu2 = nu0 + 0.5 * sum_[a] + 0.5 * detuning_[k];
            row += detuning_trapezoid_[k] * jsi_eval(model_, nu1, nu2);
        }
        acc += sum_weights_[a] * row;
    }
    return 0.5 * acc;
}

}  // namespace homqd
