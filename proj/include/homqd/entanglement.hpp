#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "homqd/fringe.hpp"

namespace homqd {

enum class CoherenceMode {
    measured_only,    // cross-pair coherences zero
    assumed_average,  // cross-pair coherences at the average visibility
};

std::string to_string(CoherenceMode mode);
// Accepts "measured-only" and "assumed-average"; ConfigError otherwise.
CoherenceMode parse_coherence_mode(const std::string& text);

// Density matrix over the occupied two-photon states only. State 2k is
// |red_k, blue_k> (signal, idler) of pair k and 2k+1 its swap. Pairs follow
// the order of the parameters they were built from.
struct RestrictedDensityMatrix {
    int dimension_m = 0;
    std::vector<std::string> basis_labels;
    Eigen::MatrixXcd entries;
    CoherenceMode mode = CoherenceMode::measured_only;

    // Hermitian within 1e-12, unit trace within 1e-9, eigenvalues >= -1e-9.
    void validate() const;
    double min_eigenvalue() const;
};

// balances[j] is p_j; an empty span means p = 1/2 for every pair.
RestrictedDensityMatrix build_restricted_dm(const FringeModelParams& params,
                                            std::span<const double> balances,
                                            CoherenceMode mode);

// Reduced single-photon state over the m frequency modes (red_k = 2k,
// blue_k = 2k+1). keep_signal selects which photon survives.
Eigen::MatrixXcd partial_trace(const RestrictedDensityMatrix& dm, bool keep_signal = true);

inline constexpr const char* kAverageVisibilityNote =
    "cross-subspace visibilities assumed equal to the average measured visibility";
inline constexpr const char* kMeasuredOnlyNote =
    "cross-subspace coherences set to zero; only measured pair visibilities contribute";

struct EntanglementReport {
    double eof_lower_bound = 0.0;  // ebits
    double b_value = 0.0;
    double average_visibility = 0.0;
    int dimension_m = 0;
    CoherenceMode mode = CoherenceMode::measured_only;
    std::string assumption_note;
};

// B = 2/sqrt(m(m-1)) sum_{a<b} (|<a abar|rho|b bbar>| - sqrt(<a bbar|rho|a bbar><b abar|rho|b abar>)),
// E_F >= -log2(1 - B^2 / 2), clipped at zero.
EntanglementReport eof_lower_bound(const RestrictedDensityMatrix& dm);

struct ReconciliationRecord {
    int dimension_m = 0;
    double computed = 0.0;
    std::optional<double> reference;           // published value when one exists
    std::optional<double> relative_deviation;  // (computed - reference) / reference
    CoherenceMode mode = CoherenceMode::measured_only;
};

ReconciliationRecord eof_paper_reconciliation(const EntanglementReport& report);

}  // namespace homqd
