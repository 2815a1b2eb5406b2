#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace homqd {

// Parametric joint spectral intensity of a degenerate SPDC pair:
//
//   f(nu1, nu2) = G_pump(nu1 + nu2 - nu_p) * G_pm((nu1 - nu2) / 2)
//
// with both factors unit-normalized Gaussians. The (sum, half-difference)
// change of variables has unit Jacobian, so f integrates to one over the
// (nu1, nu2) plane.
struct BiphotonSpectrumModel {
    double center_wavelength_nm = 810.0;
    double marginal_fwhm_nm = 20.0;
    double pump_fwhm_thz = 0.001;

    void validate() const;

    double degenerate_frequency() const;  // nu_0 = c / lambda_0
    double pump_frequency() const { return 2.0 * degenerate_frequency(); }

    // Single-photon marginal FWHM converted to frequency at the center.
    double marginal_fwhm_thz() const;
    double marginal_sigma_thz() const;
    // Spread of the detuning nu2 - nu1 (twice the single-photon spread).
    double detuning_sigma_thz() const { return 2.0 * marginal_sigma_thz(); }
    // Pump sigma used for pointwise evaluation; a zero FWHM is floored so
    // the density stays finite.
    double pump_sigma_thz() const;
};

// Normalized joint spectral intensity in 1/THz^2.
double jsi_eval(const BiphotonSpectrumModel& model, double nu1_thz, double nu2_thz);

// Probability density of the detuning nu2 - nu1 (1/THz). Integrates to one.
double detuning_density(const BiphotonSpectrumModel& model, double detuning_thz);

// Wavelength-domain FWHM of the single-photon marginal, from numeric
// marginalization of f over the partner frequency.
double marginal_bandwidth(const BiphotonSpectrumModel& model);

// Uniform frequency axis.
struct FrequencyGrid {
    double min_thz = 0.0;
    double max_thz = 0.0;
    std::size_t n_points = 0;

    static constexpr std::size_t kMinPoints = 16;

    static FrequencyGrid centered(double center_thz, double half_span_thz, std::size_t n_points);
    // Single-photon axis centered on nu_0 spanning +-sigmas marginal sigmas.
    static FrequencyGrid for_model(const BiphotonSpectrumModel& model, std::size_t n_points,
                                   double sigmas = 4.5);

    void validate() const;
    double step() const { return (max_thz - min_thz) / static_cast<double>(n_points - 1); }
    double at(std::size_t i) const { return min_thz + step() * static_cast<double>(i); }
    // True when the grid reaches +-4 single-photon sigmas around nu_0.
    bool covers(const BiphotonSpectrumModel& model) const;
};

// Sampled 2D intensity over (signal, idler) wavelengths. Row index runs over
// the signal axis, column index over the idler axis.
struct JointSpectrumMap {
    std::vector<double> signal_nm;
    std::vector<double> idler_nm;
    std::vector<double> intensity;

    std::size_t rows() const { return signal_nm.size(); }
    std::size_t cols() const { return idler_nm.size(); }
    double at(std::size_t i, std::size_t j) const { return intensity[i * cols() + j]; }
    double& at(std::size_t i, std::size_t j) { return intensity[i * cols() + j]; }
    void validate() const;
};

// Separable trapezoid quadrature over the rotated (sum, detuning) plane.
//
// Nodes: sum s = nu1 + nu2 - nu_p on +-span pump sigmas, detuning
// d = nu2 - nu1 on +-span detuning sigmas. Weights include the trapezoid
// rule, the model density and the Jacobian, so
//   integrate(h) ~= iint f(nu1, nu2) h(nu2 - nu1) dnu1 dnu2.
// Integrands that depend on the detuning only reduce to one pass over the
// detuning nodes, scaled by the pump mass.
class JointQuadrature {
public:
    static constexpr std::size_t kDefaultDetuningPoints = 16385;
    static constexpr std::size_t kDefaultSumPoints = 65;
    static constexpr double kDefaultSpanSigmas = 6.0;

    explicit JointQuadrature(const BiphotonSpectrumModel& model,
                             std::size_t detuning_points = kDefaultDetuningPoints,
                             std::size_t sum_points = kDefaultSumPoints,
                             double span_sigmas = kDefaultSpanSigmas);

    const BiphotonSpectrumModel& model() const { return model_; }
    std::span<const double> detuning() const { return detuning_; }
    // Detuning weights already multiplied by the pump mass.
    std::span<const double> weights() const { return weights_; }
    std::span<const double> sum_nodes() const { return sum_; }
    std::span<const double> sum_weights() const { return sum_weights_; }
    std::span<const double> detuning_trapezoid() const { return detuning_trapezoid_; }
    double pump_mass() const { return pump_mass_; }

    double integrate(const std::function<double(double)>& of_detuning) const;
    // Full 2D sum of f over the rotated grid, evaluating jsi_eval at every
    // node. Slower; used for normalization checks.
    double total_mass_2d() const;

private:
    BiphotonSpectrumModel model_;
    std::vector<double> detuning_;
    std::vector<double> detuning_trapezoid_;
    std::vector<double> weights_;
    std::vector<double> sum_;
    std::vector<double> sum_weights_;
    double pump_mass_ = 0.0;
};

}  // namespace homqd
