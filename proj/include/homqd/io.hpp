#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "homqd/discretization.hpp"
#include "homqd/entanglement.hpp"
#include "homqd/fringe.hpp"
#include "homqd/spectrum.hpp"

namespace homqd::io {

inline constexpr int kSchemaVersion = 1;

enum class Format { csv, json };
Format parse_format(const std::string& text);
std::string extension(Format format);

// Sampled tau2 scan as written by the scan command. counts/sigma are empty
// when no Poisson realization was drawn.
struct ScanTable {
    std::vector<double> tau2_ps;
    std::vector<double> probability_model;
    std::vector<double> counts;
    std::vector<double> sigma;
    std::int64_t counts_per_point = 0;

    bool has_counts() const { return !counts.empty(); }
    // Counts when present, else the noiseless probabilities.
    FringeScan to_scan() const;
};

// CSV payloads start with a "# schema_version=N ..." comment line followed by
// the header row. Numbers use 17 significant digits.
std::string map_to_csv(const JointSpectrumMap& map);
nlohmann::json map_to_json(const JointSpectrumMap& map);
std::string scan_to_csv(const ScanTable& table);
nlohmann::json scan_to_json(const ScanTable& table);
ScanTable scan_from_csv(const std::string& text);
ScanTable scan_from_json(const nlohmann::json& doc);
// Dispatches on the file extension (.csv or .json).
ScanTable read_scan(const std::filesystem::path& path);

nlohmann::json bins_to_json(const ExtractedBins& bins, const DiscreteState& predicted);
nlohmann::json fit_to_json(const FitResult& fit);

// Parameters and status recovered from a fit document.
struct FitRecord {
    FringeModelParams params;
    bool converged = false;
    std::vector<double> balances;
};
FitRecord fit_from_json(const nlohmann::json& doc);

nlohmann::json density_matrix_to_json(const RestrictedDensityMatrix& dm);
nlohmann::json report_to_json(const EntanglementReport& report, const ReconciliationRecord& record);

// Pretty JSON with a trailing newline; throws NumericError on non-finite
// numbers anywhere in the document.
std::string dump(const nlohmann::json& doc);

std::string read_text(const std::filesystem::path& path);
nlohmann::json read_json(const std::filesystem::path& path);
// Throws IoError when the file cannot be written.
void write_text(const std::filesystem::path& path, const std::string& content);

}  // namespace homqd::io
