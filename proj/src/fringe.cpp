#include "homqd/fringe.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <random>

#include "homqd/errors.hpp"
#include "homqd/units.hpp"

namespace homqd {

namespace {

constexpr double kVisibilityClamp = 1e-9;
constexpr double kPeakSignificance = 5.0;  // DFT peaks must exceed this many noise rms
constexpr std::size_t kZeroPadFactor = 16;
// Window sidelobes of the triangular envelope stay below this share of the
// main peak.
constexpr double kSidelobeFloor = 0.05;

double logistic(double u) { return 1.0 / (1.0 + std::exp(-u)); }

double logit(double v) {
    v = std::clamp(v, kVisibilityClamp, 1.0 - kVisibilityClamp);
    return std::log(v / (1.0 - v));
}

std::vector<double> pack(const FringeModelParams& p) {
    std::vector<double> x{std::log(p.coherence_time_ps)};
    for (const FringePair& q : p.pairs) {
        x.push_back(q.detuning_mu_thz);
        x.push_back(logit(q.visibility_v));
        x.push_back(q.phase_phi_deg);
    }
    return x;
}

void unpack(std::span<const double> x, FringeModelParams& p) {
    p.coherence_time_ps = std::exp(x[0]);
    for (std::size_t j = 0; j < p.pairs.size(); ++j) {
        p.pairs[j].detuning_mu_thz = x[1 + 3 * j];
        p.pairs[j].visibility_v = logistic(x[2 + 3 * j]);
        p.pairs[j].phase_phi_deg = x[3 + 3 * j];
    }
}

// Data and sigma in the units the residuals are formed in.
struct WeightedData {
    std::vector<double> tau2;
    std::vector<double> data;
    std::vector<double> sigma;
    double scale = 1.0;  // model multiplier (counts per point in counts mode)
    bool has_uncertainties = false;
};

WeightedData prepare(const FringeScan& scan) {
    scan.validate();
    WeightedData w;
    w.tau2 = scan.tau2_ps;
    w.data = scan.values;
    w.sigma.resize(scan.size());
    if (scan.counts_mode) {
        w.scale = static_cast<double>(scan.counts_per_point);
        w.has_uncertainties = true;
        for (std::size_t i = 0; i < scan.size(); ++i) {
            // Poisson sigma with a one-count floor.
            w.sigma[i] = std::max(scan.uncertainties[i], 1.0);
        }
    } else {
        w.has_uncertainties = std::any_of(scan.uncertainties.begin(), scan.uncertainties.end(),
                                          [](double s) { return s > 0.0; });
        for (std::size_t i = 0; i < scan.size(); ++i) {
            w.sigma[i] = w.has_uncertainties ? std::max(scan.uncertainties[i], 1e-12) : 1.0;
        }
    }
    return w;
}

double envelope_half_width(const std::vector<double>& tau2, const std::vector<double>& y,
                           double noise_rms) {
    double peak = 0.0;
    for (double v : y) peak = std::max(peak, std::abs(v));
    const double level = std::max(0.1 * peak, 4.0 * noise_rms);
    double reach = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (std::abs(y[i]) > level) reach = std::max(reach, std::abs(tau2[i]));
    }
    return reach;
}

}  // namespace

void FringeModelParams::validate(double weight_tolerance) const {
    if (!(coherence_time_ps > 0.0) || !std::isfinite(coherence_time_ps)) {
        throw ConfigError("coherence time must be positive");
    }
    if (pairs.empty()) {
        throw ConfigError("fringe model needs at least one pair");
    }
    double total = 0.0;
    for (const FringePair& p : pairs) {
        if (!(p.visibility_v >= 0.0 && p.visibility_v <= 1.0)) {
            throw ConfigError("visibility must lie in [0, 1]");
        }
        if (!(p.weight_a >= 0.0) || !std::isfinite(p.detuning_mu_thz) ||
            !std::isfinite(p.phase_phi_deg)) {
            throw ConfigError("fringe pair parameters must be finite, weights non-negative");
        }
        total += p.weight_a;
    }
    if (std::abs(total - 1.0) > weight_tolerance) {
        throw ConfigError("fringe pair weights must sum to one");
    }
}

double fringe_model_eval(const FringeModelParams& params, double tau2_ps) {
    const double envelope = 1.0 - std::abs(2.0 * tau2_ps / params.coherence_time_ps);
    if (envelope <= 0.0) {
        return 0.5;
    }
    double acc = 0.5;
    for (const FringePair& p : params.pairs) {
        acc -= 0.5 * p.visibility_v * p.weight_a *
               std::cos(kTwoPi * p.detuning_mu_thz * tau2_ps + deg_to_rad(p.phase_phi_deg)) *
               envelope;
    }
    return acc;
}

FringeScan model_scan(const FringeModelParams& params, double tau2_min_ps, double tau2_max_ps,
                      std::size_t n_points) {
    params.validate();
    FringeScan scan;
    scan.tau2_ps = linspace(tau2_min_ps, tau2_max_ps, n_points);
    scan.values.resize(n_points);
    scan.uncertainties.assign(n_points, 0.0);
    for (std::size_t i = 0; i < n_points; ++i) {
        scan.values[i] = fringe_model_eval(params, scan.tau2_ps[i]);
    }
    return scan;
}

std::vector<double> poisson_counts(std::span<const double> probabilities, std::int64_t counts_per_point,
                                   std::uint64_t seed) {
    if (counts_per_point < 1) {
        throw ConfigError("counts_per_point must be >= 1");
    }
    std::seed_seq seq{seed};
    std::mt19937_64 rng(seq);
    std::vector<double> counts(probabilities.size());
    for (std::size_t i = 0; i < probabilities.size(); ++i) {
        const double mean = static_cast<double>(counts_per_point) * std::clamp(probabilities[i], 0.0, 1.0);
        if (mean > 0.0) {
            std::poisson_distribution<std::int64_t> draw(mean);
            counts[i] = static_cast<double>(draw(rng));
        }
    }
    return counts;
}

FringeScan synth_scan(const FringeModelParams& params, double tau2_min_ps, double tau2_max_ps,
                      std::size_t n_points, std::int64_t counts_per_point, std::uint64_t seed) {
    params.validate();
    if (counts_per_point < 1) {
        throw ConfigError("counts_per_point must be >= 1");
    }
    FringeScan scan;
    scan.tau2_ps = linspace(tau2_min_ps, tau2_max_ps, n_points);
    scan.values.resize(n_points);
    scan.uncertainties.resize(n_points);
    scan.counts_mode = true;
    scan.counts_per_point = counts_per_point;

    std::vector<double> p(n_points);
    for (std::size_t i = 0; i < n_points; ++i) p[i] = fringe_model_eval(params, scan.tau2_ps[i]);
    scan.values = poisson_counts(p, counts_per_point, seed);
    for (std::size_t i = 0; i < n_points; ++i) scan.uncertainties[i] = std::sqrt(scan.values[i]);
    return scan;
}

namespace {

struct DftPeak {
    double freq;
    double magnitude;
};

struct DelaySpectrum {
    double dt = 0.0;
    std::vector<double> y;      // data / scale - 1/2
    double noise_var = 0.0;     // summed variance of y
    std::vector<DftPeak> peaks; // significant non-DC maxima, largest first
};

// Zero-padded direct DFT of the centered scan on [0, Nyquist].
DelaySpectrum delay_spectrum(const WeightedData& w) {
    const std::size_t n = w.tau2.size();
    DelaySpectrum out;
    out.dt = (w.tau2.back() - w.tau2.front()) / static_cast<double>(n - 1);
    if (!(out.dt > 0.0)) {
        throw ConfigError("scan delays must increase");
    }
    for (std::size_t i = 1; i < n; ++i) {
        if (std::abs((w.tau2[i] - w.tau2[i - 1]) - out.dt) > 1e-6 * out.dt) {
            throw ConfigError("seed guess needs uniformly spaced delays");
        }
    }
    out.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.y[i] = w.data[i] / w.scale - 0.5;
        if (w.has_uncertainties) {
            const double s = w.sigma[i] / w.scale;
            out.noise_var += s * s;
        }
    }

    std::size_t padded = 1;
    while (padded < kZeroPadFactor * n) padded <<= 1;
    const double df = 1.0 / (static_cast<double>(padded) * out.dt);
    const std::size_t n_freq = padded / 2 + 1;
    std::vector<double> mag(n_freq);
    for (std::size_t k = 0; k < n_freq; ++k) {
        std::complex<double> acc{0.0, 0.0};
        const double f = df * static_cast<double>(k);
        for (std::size_t i = 0; i < n; ++i) {
            acc += out.y[i] * std::polar(1.0, -kTwoPi * f * w.tau2[i]);
        }
        mag[k] = std::abs(acc);
    }

    const double noise_floor = kPeakSignificance * std::sqrt(out.noise_var);
    const double numeric_floor = 1e-9 * static_cast<double>(n);
    const double dc_cut = 1.0 / (w.tau2.back() - w.tau2.front());
    for (std::size_t k = 1; k + 1 < n_freq; ++k) {
        const double f = df * static_cast<double>(k);
        if (f < dc_cut) continue;
        if (mag[k] > mag[k - 1] && mag[k] >= mag[k + 1] && mag[k] > noise_floor &&
            mag[k] > numeric_floor) {
            out.peaks.push_back({f, mag[k]});
        }
    }
    // Largest first; equal magnitudes resolved toward lower frequency.
    std::stable_sort(out.peaks.begin(), out.peaks.end(),
                     [](const DftPeak& a, const DftPeak& b) { return a.magnitude > b.magnitude; });
    if (!out.peaks.empty()) {
        const double floor = kSidelobeFloor * out.peaks.front().magnitude;
        std::erase_if(out.peaks, [floor](const DftPeak& p) { return p.magnitude < floor; });
    }
    return out;
}

}  // namespace

int detect_dimension(const FringeScan& scan, double relative_floor) {
    const WeightedData w = prepare(scan);
    const DelaySpectrum spec = delay_spectrum(w);
    if (spec.peaks.empty()) {
        throw NumericError("no significant fringe frequency found; dimension cannot be detected");
    }
    const double cut = relative_floor * spec.peaks.front().magnitude;
    int count = 0;
    for (const DftPeak& p : spec.peaks) {
        if (p.magnitude >= cut) ++count;
    }
    return 2 * count;
}

FringeModelParams seed_guess(const FringeScan& scan, int m) {
    if (m < 2 || m % 2 != 0) {
        throw ConfigError("dimension m must be a positive even integer");
    }
    const std::size_t n_pairs = static_cast<std::size_t>(m / 2);
    const WeightedData w = prepare(scan);
    const std::size_t n = w.tau2.size();
    if (n < 2 * static_cast<std::size_t>(m) + 2) {
        throw ConfigError("scan has too few samples for " + std::to_string(m) + " dimensions");
    }
    const DelaySpectrum spec = delay_spectrum(w);
    const double dt = spec.dt;
    const std::vector<double>& y = spec.y;
    const double noise_var = spec.noise_var;
    std::vector<DftPeak> peaks = spec.peaks;
    if (peaks.size() < n_pairs) {
        throw NumericError("seed guess found " + std::to_string(peaks.size()) +
                           " significant DFT peaks but " + std::to_string(m) +
                           " dimensions need " + std::to_string(n_pairs) + " (deficit " +
                           std::to_string(n_pairs - peaks.size()) + ")");
    }
    peaks.resize(n_pairs);
    std::sort(peaks.begin(), peaks.end(), [](const DftPeak& a, const DftPeak& b) { return a.freq > b.freq; });

    FringeModelParams guess;
    double reach = envelope_half_width(w.tau2, y, std::sqrt(noise_var / static_cast<double>(n)));
    if (!(reach > dt)) {
        // Fall back to the coherence-time relation for the lowest line.
        reach = 0.5 * 0.885 * 2.0 / peaks.back().freq;
    }
    guess.coherence_time_ps = 2.0 * reach / 0.9;

    double central = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(w.tau2[i]) <= 0.1 * reach) central = std::max(central, std::abs(y[i]));
    }
    const double visibility = std::clamp(2.0 * central, 0.05, 0.95);
    for (const DftPeak& p : peaks) {
        guess.pairs.push_back({1.0 / static_cast<double>(n_pairs), p.freq, visibility, 180.0});
    }
    return guess;
}

std::vector<double> fringe_residuals(const FringeScan& scan, const FringeModelParams& params) {
    const WeightedData w = prepare(scan);
    std::vector<double> r(w.tau2.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
        r[i] = (w.data[i] - w.scale * fringe_model_eval(params, w.tau2[i])) / w.sigma[i];
    }
    return r;
}

FitResult lm_fit(const FringeScan& scan, const FringeModelParams& initial, const FitOptions& options) {
    initial.validate();
    const WeightedData w = prepare(scan);
    const std::size_t n = w.tau2.size();
    const std::size_t n_free = 1 + 3 * initial.pairs.size();
    if (n <= n_free) {
        throw ConfigError("scan has " + std::to_string(n) + " samples but the model has " +
                          std::to_string(n_free) + " free parameters");
    }

    FringeModelParams work = initial;
    const lm::ResidualFn residual = [&w, work](std::span<const double> x, std::span<double> r) mutable {
        unpack(x, work);
        for (std::size_t i = 0; i < r.size(); ++i) {
            r[i] = (w.data[i] - w.scale * fringe_model_eval(work, w.tau2[i])) / w.sigma[i];
        }
    };
    const lm::Result solved = lm::minimize(residual, pack(initial), n, options.solver);

    FitResult out;
    out.params = initial;
    unpack(solved.params, out.params);
    out.residual_norm = solved.residual_norm;
    out.chi2 = solved.cost;
    out.gradient_norm = solved.gradient_norm;
    out.n_iterations = solved.iterations;
    out.converged = solved.converged;
    out.termination = lm::to_string(solved.termination);
    out.n_samples = n;

    out.parameter_names.push_back("tau_c");
    for (std::size_t j = 0; j < initial.pairs.size(); ++j) {
        const std::string k = std::to_string(j + 1);
        out.parameter_names.push_back("mu_" + k);
        out.parameter_names.push_back("V_" + k);
        out.parameter_names.push_back("phi_" + k);
    }

    // Covariance: pseudo-inverse of J^T J, mapped through the
    // reparameterization derivatives.
    const auto p = static_cast<Eigen::Index>(n_free);
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(p, p);
    if (solved.jtj.rows() == p && solved.jtj.allFinite()) {
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(solved.jtj);
        const Eigen::VectorXd ev = eig.eigenvalues();
        const double cutoff = std::max(ev.cwiseAbs().maxCoeff(), 1e-300) * 1e-12;
        Eigen::VectorXd inv = Eigen::VectorXd::Zero(p);
        for (Eigen::Index k = 0; k < p; ++k) {
            if (ev[k] > cutoff) inv[k] = 1.0 / ev[k];
        }
        cov = eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
        Eigen::VectorXd d(p);
        d[0] = out.params.coherence_time_ps;
        for (std::size_t j = 0; j < initial.pairs.size(); ++j) {
            const double v = out.params.pairs[j].visibility_v;
            d[1 + 3 * static_cast<Eigen::Index>(j)] = 1.0;
            d[2 + 3 * static_cast<Eigen::Index>(j)] = v * (1.0 - v);
            d[3 + 3 * static_cast<Eigen::Index>(j)] = 1.0;
        }
        cov = d.asDiagonal() * cov * d.asDiagonal();
        if (!w.has_uncertainties) {
            cov *= solved.cost / static_cast<double>(n - n_free);
        }
        cov = 0.5 * (cov + cov.transpose());
    }
    out.covariance = cov;
    return out;
}

namespace {

FitResult recover_one(const RecoveryJob& job, const FringeModelParams& truth_sorted, std::uint64_t seed) {
    try {
        const FringeScan scan = synth_scan(job.truth, job.tau2_min_ps, job.tau2_max_ps, job.n_points,
                                           job.counts_per_point, seed);
        FringeModelParams guess = seed_guess(scan, truth_sorted.dimension());
        for (std::size_t j = 0; j < guess.pairs.size(); ++j) {
            guess.pairs[j].weight_a = truth_sorted.pairs[j].weight_a;
        }
        return lm_fit(scan, guess, job.options);
    } catch (const std::exception& e) {
        FitResult failed;
        failed.params = truth_sorted;
        failed.converged = false;
        failed.termination = std::string("error: ") + e.what();
        return failed;
    }
}

}  // namespace

std::vector<FitResult> fit_recovery_batch(const RecoveryJob& job, std::span<const std::uint64_t> seeds,
                                          Backend backend) {
    job.truth.validate();
    FringeModelParams sorted = job.truth;
    std::sort(sorted.pairs.begin(), sorted.pairs.end(), [](const FringePair& a, const FringePair& b) {
        return a.detuning_mu_thz > b.detuning_mu_thz;
    });
    std::vector<FitResult> out(seeds.size());
    const auto n = static_cast<std::ptrdiff_t>(seeds.size());
    if (backend == Backend::serial) {
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            out[static_cast<std::size_t>(i)] = recover_one(job, sorted, seeds[static_cast<std::size_t>(i)]);
        }
    } else {
#pragma omp parallel for schedule(dynamic)
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            out[static_cast<std::size_t>(i)] = recover_one(job, sorted, seeds[static_cast<std::size_t>(i)]);
        }
    }
    return out;
}

}  // namespace homqd
