#pragma once

#include <utility>

#include "homqd/scan.hpp"
#include "homqd/spectrum.hpp"

namespace homqd {

struct DelayConfig {
    double tau1_ps = 0.0;
    double tau2_ps = 0.0;
    void validate() const;
};

// Orthogonal polarizers behind the first beamsplitter. Angles in degrees
// from horizontal, one per output mode.
struct PurificationConfig {
    bool enabled = true;
    std::pair<double, double> polarizer_angles_deg{90.0, 0.0};
    void validate() const;
};

// Probability-level bookkeeping of the four equal-weight terms of the
// post-beamsplitter polarization/frequency state.
struct ChannelWeights {
    double anti_bunched = 0.0;           // weight of the opposite-mode frequency state
    double bunched = 0.0;                // weight of the same-mode frequency state
    double accepted_fraction = 0.0;      // pairs reaching the coincidence channel
    double bunched_contamination = 0.0;  // bunched share of that channel
};

ChannelWeights bunched_fraction(const PurificationConfig& purification);

// Coincidence spectrum after the first beamsplitter on a square frequency
// grid, reported on ascending wavelength axes. Entries are pixel averages of
// f(nu1, nu2) |1 - exp(i 2 pi (nu2 - nu1) tau1)|^2 / 4.
JointSpectrumMap coincidence_spectrum(const BiphotonSpectrumModel& model, double tau1_ps,
                                      const FrequencyGrid& grid);
JointSpectrumMap coincidence_spectrum(const BiphotonSpectrumModel& model, double tau1_ps);

// Default single-photon grid for spectrum maps: 401 points over +-4.5 sigma.
FrequencyGrid default_map_grid(const BiphotonSpectrumModel& model);

// P(tau1) = 1/4 iint f |1 - exp(i 2 pi dnu tau1)|^2, opposite-mode share.
double coincidence_probability_tau1(const BiphotonSpectrumModel& model, double tau1_ps);
// Complement 1/4 iint f |1 + exp(i 2 pi dnu tau1)|^2, same-mode share.
double bunching_probability_tau1(const BiphotonSpectrumModel& model, double tau1_ps);

// Coincidence probability behind the second beamsplitter for a purified
// anti-bunched pair, normalized so uncorrelated arrival gives 1/2.
double fringe_probability(const BiphotonSpectrumModel& model, double tau1_ps, double tau2_ps);

// Noiseless probabilities on n_points uniform tau2 samples.
FringeScan fringe_scan(const BiphotonSpectrumModel& model, double tau1_ps, double tau2_min_ps,
                       double tau2_max_ps, std::size_t n_points);

}  // namespace homqd
