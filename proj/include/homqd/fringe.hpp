#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "homqd/lm.hpp"
#include "homqd/scan.hpp"

namespace homqd {

struct FringePair {
    double weight_a = 1.0;
    double detuning_mu_thz = 1.0;
    double visibility_v = 1.0;
    double phase_phi_deg = 180.0;
};

// Closed-form spatial-beating model
//   P(tau2) = 1/2 - sum_j (V_j / 2) A_j cos(2 pi mu_j tau2 + phi_j) (1 - |2 tau2 / tau_c|)
// inside |tau2| <= tau_c / 2 and 1/2 outside.
struct FringeModelParams {
    double coherence_time_ps = 1.0;
    std::vector<FringePair> pairs;

    // Throws ConfigError on tau_c <= 0, V outside [0,1], or weights not
    // summing to one within weight_tolerance.
    void validate(double weight_tolerance = 1e-3) const;
    int dimension() const { return 2 * static_cast<int>(pairs.size()); }
};

double fringe_model_eval(const FringeModelParams& params, double tau2_ps);

// Poisson realization: counts_i ~ Poisson(counts_per_point * P(tau2_i)),
// uncertainty sqrt(count). Bit-identical for a fixed seed.
FringeScan synth_scan(const FringeModelParams& params, double tau2_min_ps, double tau2_max_ps,
                      std::size_t n_points, std::int64_t counts_per_point, std::uint64_t seed);

// Poisson counts for per-point probabilities p_i (clamped to [0,1]); one
// mt19937_64 stream per seed, drawn in sample order.
std::vector<double> poisson_counts(std::span<const double> probabilities, std::int64_t counts_per_point,
                                   std::uint64_t seed);

// Noiseless probability-mode scan of the model.
FringeScan model_scan(const FringeModelParams& params, double tau2_min_ps, double tau2_max_ps,
                      std::size_t n_points);

// Starting point for a fit with m/2 pairs: detunings from the largest
// non-DC peaks of the zero-padded DFT of (data - 1/2), tau_c from the
// envelope base width, uniform A and V, phases 180 degrees. Throws
// NumericError naming the deficit when too few significant peaks exist.
FringeModelParams seed_guess(const FringeScan& scan, int m);

// 2 x the number of significant DFT peaks reaching relative_floor of the
// strongest one; the default mirrors the lobe-weight threshold used for bins.
int detect_dimension(const FringeScan& scan, double relative_floor = 0.58);

struct FitOptions {
    lm::Options solver;
};

struct FitResult {
    FringeModelParams params;
    // Free parameters in order tau_c, then (mu_j, V_j, phi_j) per pair.
    std::vector<std::string> parameter_names;
    Eigen::MatrixXd covariance;
    double residual_norm = 0.0;
    double chi2 = 0.0;
    double gradient_norm = 0.0;
    int n_iterations = 0;
    bool converged = false;
    std::string termination;
    std::size_t n_samples = 0;
};

// Weighted least squares of the closed-form model against a scan. Pair
// weights A_j are held at their initial values: the model depends on A_j
// and V_j only through the product A_j V_j. V_j stays in [0,1] through a
// logistic reparameterization and tau_c stays positive through a log.
FitResult lm_fit(const FringeScan& scan, const FringeModelParams& initial,
                 const FitOptions& options = {});

// Residual vector of the weighted fit at given parameters (for tests).
std::vector<double> fringe_residuals(const FringeScan& scan, const FringeModelParams& params);

// Monte-Carlo recovery: one Poisson scan and fit per seed, started from
// seed_guess with the true weights substituted.
struct RecoveryJob {
    FringeModelParams truth;
    double tau2_min_ps = -1.0;
    double tau2_max_ps = 1.0;
    std::size_t n_points = 401;
    std::int64_t counts_per_point = 1000;
    FitOptions options;
};

enum class Backend { serial, openmp };

std::vector<FitResult> fit_recovery_batch(const RecoveryJob& job, std::span<const std::uint64_t> seeds,
                                          Backend backend = Backend::openmp);

}  // namespace homqd
