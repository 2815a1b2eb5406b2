#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "homqd/discretization.hpp"
#include "homqd/entanglement.hpp"
#include "homqd/lm.hpp"
#include "homqd/spectrum.hpp"

namespace homqd {

struct SpectrumSettings {
    std::size_t grid_points = 401;
    double bin_threshold = kDefaultBinThreshold;
};

struct ScanSettings {
    // Unset bounds default to +-0.6 of the coherence time implied by tau1.
    std::optional<double> tau2_min_ps;
    std::optional<double> tau2_max_ps;
    std::size_t n_points = 401;
    std::int64_t counts_per_point = 1000;  // 0 writes the noiseless curve only
    std::uint64_t seed = 1;
};

struct FitSettings {
    std::optional<int> m;  // unset: detected from the scan
    lm::Options solver;
};

struct AnalysisSettings {
    CoherenceMode mode = CoherenceMode::assumed_average;
    std::vector<double> balances;  // empty: taken from the predicted bins
};

struct Scenario {
    BiphotonSpectrumModel model;
    double tau1_ps = 0.12;
    SpectrumSettings spectrum;
    ScanSettings scan;
    FitSettings fit;
    AnalysisSettings analysis;

    // Range checks over every field; ConfigError names the offending key.
    void validate() const;
    double tau2_min() const;
    double tau2_max() const;
};

// Omitted keys keep their defaults; unknown keys are rejected by name.
Scenario scenario_from_json(const nlohmann::json& doc);
nlohmann::json scenario_to_json(const Scenario& scenario);
// ConfigError for malformed content, IoError when the file is unreadable.
Scenario load_scenario(const std::filesystem::path& path);

}  // namespace homqd
