#include "homqd/hom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "homqd/errors.hpp"
#include "homqd/kernels.hpp"
#include "homqd/units.hpp"

namespace homqd {

namespace {

void require_delay(double tau1_ps) {
    if (!std::isfinite(tau1_ps)) {
        throw ConfigError("tau1 must be finite");
    }
    if (tau1_ps < 0.0) {
        throw ConfigError("tau1 must be >= 0");
    }
}

}  // namespace

void DelayConfig::validate() const {
    require_delay(tau1_ps);
    if (!std::isfinite(tau2_ps)) {
        throw ConfigError("tau2 must be finite");
    }
}

void PurificationConfig::validate() const {
    const auto [a, b] = polarizer_angles_deg;
    if (!std::isfinite(a) || !std::isfinite(b)) {
        throw ConfigError("polarizer angles must be finite");
    }
    const double rel = std::fmod(std::abs(a - b), 180.0);
    if (std::abs(rel - 90.0) > 1e-9) {
        throw ConfigError("polarizers must be mutually orthogonal");
    }
}

ChannelWeights bunched_fraction(const PurificationConfig& purification) {
    // (|H3V4> + |V3H4>) (x) psi_minus and (|H3V3> + |H4V4>) (x) psi_plus,
    // four terms of weight 1/4 each.
    ChannelWeights w;
    w.anti_bunched = 0.5;
    w.bunched = 0.5;
    if (!purification.enabled) {
        w.accepted_fraction = 1.0;
        w.bunched_contamination = w.bunched;
        return w;
    }
    purification.validate();
    // Projecting the opposite-mode polarization pair onto (theta3, theta4)
    // leaves amplitude sin(theta3 + theta4) / sqrt(2); a single polarizer in a
    // mode never passes both photons of a bunched pair.
    const double s = std::sin(deg_to_rad(purification.polarizer_angles_deg.first +
                                         purification.polarizer_angles_deg.second));
    w.accepted_fraction = w.anti_bunched * 0.5 * s * s;
    w.bunched_contamination = 0.0;
    return w;
}

FrequencyGrid default_map_grid(const BiphotonSpectrumModel& model) {
    return FrequencyGrid::for_model(model, 401, 4.5);
}

JointSpectrumMap coincidence_spectrum(const BiphotonSpectrumModel& model, double tau1_ps) {
    return coincidence_spectrum(model, tau1_ps, default_map_grid(model));
}

JointSpectrumMap coincidence_spectrum(const BiphotonSpectrumModel& model, double tau1_ps,
                                      const FrequencyGrid& grid) {
    model.validate();
    require_delay(tau1_ps);
    grid.validate();
    const std::size_t n = grid.n_points;

    std::vector<double> by_frequency(n * n);
    kernels::omp::coincidence_map({model, grid, tau1_ps, by_frequency});

    // Reverse both axes so wavelengths ascend.
    JointSpectrumMap map;
    map.signal_nm.resize(n);
    map.intensity.resize(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        map.signal_nm[i] = frequency_to_wavelength(grid.at(n - 1 - i));
    }
    map.idler_nm = map.signal_nm;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            map.at(i, j) = by_frequency[(n - 1 - i) * n + (n - 1 - j)];
        }
    }
    return map;
}

double coincidence_probability_tau1(const BiphotonSpectrumModel& model, double tau1_ps) {
    require_delay(tau1_ps);
    const JointQuadrature quad(model);
    return quad.integrate([tau1_ps](double d) {
        const double s = std::sin(std::numbers::pi * d * tau1_ps);
        return s * s;
    });
}

double bunching_probability_tau1(const BiphotonSpectrumModel& model, double tau1_ps) {
    require_delay(tau1_ps);
    const JointQuadrature quad(model);
    return quad.integrate([tau1_ps](double d) {
        const double c = std::cos(std::numbers::pi * d * tau1_ps);
        return c * c;
    });
}

double fringe_probability(const BiphotonSpectrumModel& model, double tau1_ps, double tau2_ps) {
    DelayConfig{tau1_ps, tau2_ps}.validate();
    const JointQuadrature quad(model);
    double out = 0.0;
    const double tau2[1] = {tau2_ps};
    kernels::serial::cascaded_fringe(
        {{quad.detuning(), quad.weights(), model.degenerate_frequency()}, tau1_ps, tau2, {&out, 1}});
    return out;
}

FringeScan fringe_scan(const BiphotonSpectrumModel& model, double tau1_ps, double tau2_min_ps,
                       double tau2_max_ps, std::size_t n_points) {
    require_delay(tau1_ps);
    FringeScan scan;
    scan.tau2_ps = linspace(tau2_min_ps, tau2_max_ps, n_points);
    scan.values.resize(n_points);
    scan.uncertainties.assign(n_points, 0.0);
    const JointQuadrature quad(model);
    kernels::omp::cascaded_fringe({{quad.detuning(), quad.weights(), model.degenerate_frequency()},
                                   tau1_ps, scan.tau2_ps, scan.values});
    return scan;
}

}  // namespace homqd
