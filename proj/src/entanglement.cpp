#include "homqd/entanglement.hpp"

#include <cmath>
#include <complex>
#include <map>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "homqd/errors.hpp"
#include "homqd/units.hpp"

namespace homqd {

namespace {

constexpr double kHermitianTol = 1e-12;
constexpr double kTraceTol = 1e-9;
constexpr double kPsdTol = 1e-9;

// Published entanglement-of-formation figures by dimension.
const std::map<int, double>& published_eof() {
    static const std::map<int, double> values{{2, 0.57}, {4, 1.05}, {6, 1.56}};
    return values;
}

std::string bin_label(int index) { return "w" + std::to_string(index); }

}  // namespace

std::string to_string(CoherenceMode mode) {
    return mode == CoherenceMode::assumed_average ? "assumed-average" : "measured-only";
}

CoherenceMode parse_coherence_mode(const std::string& text) {
    if (text == "measured-only") return CoherenceMode::measured_only;
    if (text == "assumed-average") return CoherenceMode::assumed_average;
    throw ConfigError("unknown analysis mode '" + text + "' (expected measured-only or assumed-average)");
}

double RestrictedDensityMatrix::min_eigenvalue() const {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(entries, Eigen::EigenvaluesOnly);
    return eig.eigenvalues().minCoeff();
}

void RestrictedDensityMatrix::validate() const {
    const auto n = static_cast<Eigen::Index>(dimension_m);
    if (dimension_m < 2 || dimension_m % 2 != 0 || entries.rows() != n || entries.cols() != n) {
        throw ConfigError("density matrix must be m x m with even m >= 2");
    }
    if (!entries.allFinite()) {
        throw NumericError("density matrix has non-finite entries");
    }
    const double asym = (entries - entries.adjoint()).cwiseAbs().maxCoeff();
    if (asym > kHermitianTol) {
        throw NumericError("density matrix is not Hermitian (deviation " + std::to_string(asym) + ")");
    }
    const std::complex<double> tr = entries.trace();
    if (std::abs(tr - 1.0) > kTraceTol) {
        throw NumericError("density matrix trace " + std::to_string(tr.real()) + " differs from one");
    }
    const double lowest = min_eigenvalue();
    if (lowest < -kPsdTol) {
        throw NumericError("density matrix is not positive semidefinite (eigenvalue " +
                           std::to_string(lowest) + ")");
    }
}

RestrictedDensityMatrix build_restricted_dm(const FringeModelParams& params,
                                            std::span<const double> balances, CoherenceMode mode) {
    params.validate(1e-6);
    const std::size_t n_pairs = params.pairs.size();
    if (!balances.empty() && balances.size() != n_pairs) {
        throw ConfigError("need one balance per pair (" + std::to_string(n_pairs) + "), got " +
                          std::to_string(balances.size()));
    }
    const int m = params.dimension();
    RestrictedDensityMatrix dm;
    dm.dimension_m = m;
    dm.mode = mode;

    // Pure amplitudes per state; coherences are V * c_k * conj(c_l).
    Eigen::VectorXcd amp(m);
    Eigen::VectorXd vis(n_pairs);
    double v_avg = 0.0;
    for (std::size_t j = 0; j < n_pairs; ++j) {
        const FringePair& pair = params.pairs[j];
        const double p = balances.empty() ? 0.5 : balances[j];
        if (!(p >= 0.0 && p <= 1.0)) {
            throw ConfigError("balance p must lie in [0, 1]");
        }
        const double phase = deg_to_rad(pair.phase_phi_deg) - std::numbers::pi;
        const auto k = static_cast<Eigen::Index>(2 * j);
        amp[k] = std::sqrt(pair.weight_a * p);
        amp[k + 1] = -std::polar(std::sqrt(pair.weight_a * (1.0 - p)), -phase);
        vis[static_cast<Eigen::Index>(j)] = pair.visibility_v;
        v_avg += pair.visibility_v;

        const int red = static_cast<int>(j) + 1;
        const int blue = m - static_cast<int>(j);
        dm.basis_labels.push_back("|" + bin_label(red) + "," + bin_label(blue) + ">");
        dm.basis_labels.push_back("|" + bin_label(blue) + "," + bin_label(red) + ">");
    }
    v_avg /= static_cast<double>(n_pairs);

    dm.entries = Eigen::MatrixXcd::Zero(m, m);
    for (Eigen::Index a = 0; a < m; ++a) {
        for (Eigen::Index b = 0; b < m; ++b) {
            double weight = 0.0;
            if (a == b) {
                weight = 1.0;
            } else if (a / 2 == b / 2) {
                weight = vis[a / 2];
            } else if (mode == CoherenceMode::assumed_average) {
                weight = v_avg;
            }
            dm.entries(a, b) = weight * amp[a] * std::conj(amp[b]);
        }
    }
    dm.validate();
    return dm;
}

Eigen::MatrixXcd partial_trace(const RestrictedDensityMatrix& dm, bool keep_signal) {
    const int m = dm.dimension_m;
    // State 2k: signal on red_k (mode 2k), idler on blue_k (mode 2k+1).
    auto signal_mode = [](int s) { return s; };
    auto idler_mode = [](int s) { return s ^ 1; };
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(m, m);
    for (int a = 0; a < m; ++a) {
        for (int b = 0; b < m; ++b) {
            const int traced_a = keep_signal ? idler_mode(a) : signal_mode(a);
            const int traced_b = keep_signal ? idler_mode(b) : signal_mode(b);
            if (traced_a != traced_b) continue;
            const int kept_a = keep_signal ? signal_mode(a) : idler_mode(a);
            const int kept_b = keep_signal ? signal_mode(b) : idler_mode(b);
            out(kept_a, kept_b) += dm.entries(a, b);
        }
    }
    return out;
}

EntanglementReport eof_lower_bound(const RestrictedDensityMatrix& dm) {
    dm.validate();
    const int m = dm.dimension_m;
    // Each restricted state a pairs a signal mode with its Schmidt partner;
    // |a bbar> for a != b is never occupied, so the subtraction terms vanish.
    double sum = 0.0;
    for (int a = 0; a < m; ++a) {
        for (int b = a + 1; b < m; ++b) {
            sum += std::abs(dm.entries(a, b));
        }
    }
    EntanglementReport report;
    report.dimension_m = m;
    report.mode = dm.mode;
    report.b_value = 2.0 / std::sqrt(static_cast<double>(m) * (m - 1)) * sum;
    const double arg = 1.0 - 0.5 * report.b_value * report.b_value;
    report.eof_lower_bound = std::max(0.0, -std::log2(arg));

    double v = 0.0;
    for (int k = 0; k < m; k += 2) {
        const double pop = std::sqrt(dm.entries(k, k).real() * dm.entries(k + 1, k + 1).real());
        v += pop > 0.0 ? std::abs(dm.entries(k, k + 1)) / pop : 0.0;
    }
    report.average_visibility = v / static_cast<double>(m / 2);
    report.assumption_note =
        dm.mode == CoherenceMode::assumed_average ? kAverageVisibilityNote : kMeasuredOnlyNote;
    return report;
}

ReconciliationRecord eof_paper_reconciliation(const EntanglementReport& report) {
    ReconciliationRecord rec;
    rec.dimension_m = report.dimension_m;
    rec.computed = report.eof_lower_bound;
    rec.mode = report.mode;
    const auto& table = published_eof();
    if (const auto it = table.find(report.dimension_m); it != table.end()) {
        rec.reference = it->second;
        rec.relative_deviation = (rec.computed - it->second) / it->second;
    }
    return rec;
}

}  // namespace homqd
