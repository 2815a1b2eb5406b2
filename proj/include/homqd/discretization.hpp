#pragma once

#include <cstddef>
#include <vector>

#include "homqd/spectrum.hpp"

namespace homqd {

// One pair of frequency bins symmetric about the degenerate frequency.
struct FrequencyBinPair {
    int index_j = 0;
    double detuning_mu_thz = 0.0;  // |nu_j - nu_{m-j}|
    double weight_a = 0.0;         // pair probability weight, sums to one
    double balance_p = 0.5;        // share of |nu_j nu_{m-j}> within the pair
    double phase_phi_deg = 180.0;
};

// m-dimensional frequency-bin state, pairs ordered by decreasing detuning.
// Pair j occupies nu_0 +- mu_j / 2; the signal photon of |nu_j nu_{m-j}> sits
// on the red (lower-frequency) bin.
struct DiscreteState {
    int dimension_m = 0;
    std::vector<FrequencyBinPair> pairs;
    double center_wavelength_nm = 810.0;

    void validate() const;
    // (red, blue) bin frequencies of pair k in THz.
    std::pair<double, double> bin_frequencies(std::size_t k) const;
};

// Kept lobes need at least this fraction of the strongest lobe weight.
inline constexpr double kDefaultBinThreshold = 0.58;

// Comb prediction from the spectral model: lobes of
// g(dnu) sin^2(pi dnu tau1) between consecutive zeros n / tau1.
DiscreteState predict_bins(const BiphotonSpectrumModel& model, double tau1_ps,
                           double threshold = kDefaultBinThreshold);

// Diagnostics for one lobe found in a map (kept or not).
struct LobeInfo {
    double detuning_thz = 0.0;      // Gaussian-fit center
    double sigma_thz = 0.0;         // Gaussian-fit width in detuning
    double volume = 0.0;            // both mirror lobes
    double volume_positive = 0.0;   // idler bluer than signal
    double wavelength_fwhm_nm = 0.0;
    bool kept = false;
};

struct ExtractedBins {
    DiscreteState state;
    std::vector<LobeInfo> lobes;  // all detected lobes, increasing detuning
};

// Peak extraction from a sampled coincidence map: 2D local-maximum search,
// detuning profile by binning along lines of constant nu_idler - nu_signal,
// per-lobe Gaussian fit. Throws NumericError when no lobe is detectable.
ExtractedBins extract_bins_from_map(const JointSpectrumMap& map,
                                    double threshold = kDefaultBinThreshold);

// tau_c = 0.885 / df for a sinusoidally modulated single-photon spectrum.
double coherence_time(double bandwidth_thz);
// df = mu_lambda c / (2 lambda^2) from a wavelength detuning.
double bandwidth_from_wavelength_detuning(double detuning_nm, double wavelength_nm);
// From the bare fundamental comb line 1 / (2 tau1); equals 3.54 tau1.
double coherence_time_from_delay(double tau1_ps);
// From the smallest detuning present in the state.
double coherence_time(const DiscreteState& state);

int dimensionality(const DiscreteState& state);

}  // namespace homqd
