#include <doctest.h>

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "homqd/errors.hpp"
#include "homqd/fringe.hpp"
#include "homqd/hom.hpp"

using namespace homqd;

namespace {

FringeModelParams row(double tc, std::vector<FringePair> pairs) {
    FringeModelParams p;
    p.coherence_time_ps = tc;
    p.pairs = std::move(pairs);
    return p;
}

// Table-style parameter rows for three delays.
FringeModelParams row_012() { return row(0.47, {{1.0, 4.01, 0.81, 179.83}}); }
FringeModelParams row_027() { return row(0.94, {{0.44, 5.71, 0.80, 180.03}, {0.56, 1.94, 0.86, 182.14}}); }
FringeModelParams row_037() {
    return row(1.43, {{0.20, 6.54, 0.80, 172.48}, {0.38, 4.07, 0.94, 181.23}, {0.42, 1.48, 0.93, 177.67}});
}

}  // namespace

TEST_CASE("closed-form model values") {
    const FringeModelParams p = row(1.0, {{0.4, 2.0, 0.8, 180.0}, {0.6, 1.0, 0.5, 90.0}});
    // At tau2 = 0 only the phases matter.
    const double expected0 = 0.5 - 0.5 * 0.8 * 0.4 * std::cos(std::numbers::pi) - 0.5 * 0.5 * 0.6 * 0.0;
    CHECK(fringe_model_eval(p, 0.0) == doctest::Approx(expected0).epsilon(1e-14));
    const double t = 0.2, env = 1.0 - 0.4;
    const double expected = 0.5 - 0.5 * 0.8 * 0.4 * std::cos(2 * std::numbers::pi * 2.0 * t + std::numbers::pi) * env -
                            0.5 * 0.5 * 0.6 * std::cos(2 * std::numbers::pi * 1.0 * t + std::numbers::pi / 2) * env;
    CHECK(fringe_model_eval(p, t) == doctest::Approx(expected).epsilon(1e-13));
    CHECK(fringe_model_eval(p, 0.5) == doctest::Approx(0.5));
    CHECK(fringe_model_eval(p, -3.0) == 0.5);
}

TEST_CASE("model value at zero delay") {
    CHECK(fringe_model_eval(row(0.47, {{1.0, 2.0, 0.81, 180.0}}), 0.0) == doctest::Approx(0.905).epsilon(1e-14));
    const FringeModelParams p = row_037();
    double expected = 0.5;
    for (const FringePair& q : p.pairs) {
        expected += 0.5 * q.weight_a * q.visibility_v * std::abs(std::cos(q.phase_phi_deg * std::numbers::pi / 180.0));
    }
    CHECK(fringe_model_eval(p, 0.0) == doctest::Approx(expected).epsilon(1e-14));
    // Continuous at the envelope edge.
    CHECK(fringe_model_eval(p, 0.5 * 1.43 - 1e-12) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("model is even in tau2 for 180 degree phases") {
    const FringeModelParams p = row(0.9, {{0.3, 5.0, 0.7, 180.0}, {0.7, 1.7, 0.9, 180.0}});
    for (double t = 0.0; t < 0.6; t += 0.013) {
        CHECK(std::abs(fringe_model_eval(p, t) - fringe_model_eval(p, -t)) < 1e-12);
    }
}

TEST_CASE("parameter validation") {
    FringeModelParams p = row_027();
    CHECK_NOTHROW(p.validate());
    p.pairs[0].weight_a = 0.5;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = row_027();
    p.pairs[1].visibility_v = 1.2;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = row_027();
    p.coherence_time_ps = 0.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("Poisson synthesis is reproducible and seed-dependent") {
    const FringeModelParams p = row_027();
    const FringeScan a = synth_scan(p, -1, 1, 201, 1000, 42);
    const FringeScan b = synth_scan(p, -1, 1, 201, 1000, 42);
    const FringeScan c = synth_scan(p, -1, 1, 201, 1000, 43);
    CHECK(a.values == b.values);
    CHECK(a.values != c.values);
    CHECK(a.counts_mode);
    double mean_dev = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a.uncertainties[i] == doctest::Approx(std::sqrt(a.values[i])));
        mean_dev += a.values[i] - 1000.0 * fringe_model_eval(p, a.tau2_ps[i]);
    }
    // Sample mean of the residual counts stays within a few standard errors.
    CHECK(std::abs(mean_dev / 201.0) < 5.0 * std::sqrt(500.0 / 201.0));
    CHECK_THROWS_AS(synth_scan(p, -1, 1, 201, 0, 1), ConfigError);
}

TEST_CASE("Poisson draws: large-count mean and variance") {
    const FringeModelParams p = row_012();
    const double tau2 = 0.05;
    const double model = fringe_model_eval(p, tau2);
    const std::vector<double> prob{model};
    // Mean of value / counts at 1e6 counts.
    const std::int64_t big = 1000000;
    const double frac = poisson_counts(prob, big, 9)[0] / static_cast<double>(big);
    CHECK(std::abs(frac - model) < 3.0 * std::sqrt(model / static_cast<double>(big)));
    // Variance over 1e4 repetitions.
    const int reps = 10000;
    double sum = 0.0, sum2 = 0.0;
    for (int k = 0; k < reps; ++k) {
        const double c = poisson_counts(prob, 1000, static_cast<std::uint64_t>(k + 1))[0];
        sum += c;
        sum2 += c * c;
    }
    const double mean = sum / reps;
    const double var = sum2 / reps - mean * mean;
    CHECK(mean == doctest::Approx(1000.0 * model).epsilon(0.01));
    CHECK(var == doctest::Approx(mean).epsilon(0.1));
}

TEST_CASE("seed guess on the six-dimensional row") {
    const double span = 1.2;
    const FringeScan s = model_scan(row_037(), -span, span, 601);
    const FringeModelParams g = seed_guess(s, 6);
    REQUIRE(g.pairs.size() == 3);
    const double bin = 1.0 / (2.0 * span);
    CHECK(std::abs(g.pairs[0].detuning_mu_thz - 6.54) < bin);
    CHECK(std::abs(g.pairs[1].detuning_mu_thz - 4.07) < bin);
    CHECK(std::abs(g.pairs[2].detuning_mu_thz - 1.48) < bin);
}

TEST_CASE("seed guess on a flat noisy scan has nothing to seed") {
    const FringeModelParams flat = row(1.0, {{1.0, 3.0, 0.0, 180.0}});
    const FringeScan s = synth_scan(flat, -1, 1, 201, 1000, 3);
    CHECK_THROWS_AS(seed_guess(s, 2), NumericError);
}

TEST_CASE("single pair seed is the DFT argmax") {
    const FringeScan s = model_scan(row_012(), -0.3, 0.3, 301);
    const FringeModelParams g = seed_guess(s, 2);
    REQUIRE(g.pairs.size() == 1);
    CHECK(g.pairs[0].detuning_mu_thz == doctest::Approx(4.01).epsilon(0.03));
}

TEST_CASE("perturbed start recovers the two-dimensional row") {
    const FringeModelParams truth = row_012();
    const FringeScan s = model_scan(truth, -0.3, 0.3, 301);
    for (double f : {0.8, 1.2}) {
        FringeModelParams g = truth;
        g.coherence_time_ps *= f;
        g.pairs[0].detuning_mu_thz *= f;
        g.pairs[0].visibility_v = std::min(0.99, g.pairs[0].visibility_v * f);
        g.pairs[0].phase_phi_deg *= f;
        const FitResult r = lm_fit(s, g);
        CAPTURE(f);
        CHECK(r.converged);
        CHECK(std::abs(r.params.pairs[0].visibility_v - 0.81) < 1e-4);
        CHECK(std::abs(r.params.pairs[0].detuning_mu_thz - 4.01) < 1e-4);
    }
}

TEST_CASE("seed guess finds the fringe frequencies") {
    const FringeScan s = model_scan(row_027(), -0.6, 0.6, 401);
    const FringeModelParams g = seed_guess(s, 4);
    REQUIRE(g.pairs.size() == 2);
    CHECK(g.pairs[0].detuning_mu_thz == doctest::Approx(5.71).epsilon(0.05));
    CHECK(g.pairs[1].detuning_mu_thz == doctest::Approx(1.94).epsilon(0.1));
    CHECK(detect_dimension(s) == 4);
}

TEST_CASE("seed guess names the peak deficit") {
    const FringeScan s = model_scan(row_012(), -0.3, 0.3, 301);
    try {
        (void)seed_guess(s, 6);
        FAIL("expected NumericError");
    } catch (const NumericError& e) {
        CHECK(std::string(e.what()).find("deficit") != std::string::npos);
    }
    CHECK_THROWS_AS(seed_guess(s, 3), ConfigError);
}

TEST_CASE("noiseless round trip is exact") {
    for (const FringeModelParams& truth : {row_012(), row_027()}) {
        const double half = 0.6 * truth.coherence_time_ps;
        const FringeScan s = model_scan(truth, -half, half, 401);
        FringeModelParams g = seed_guess(s, truth.dimension());
        for (std::size_t j = 0; j < g.pairs.size(); ++j) g.pairs[j].weight_a = truth.pairs[j].weight_a;
        const FitResult f = lm_fit(s, g);
        CHECK(f.converged);
        CHECK(f.residual_norm < 1e-8);
        CHECK(f.params.coherence_time_ps == doctest::Approx(truth.coherence_time_ps).epsilon(1e-7));
        for (std::size_t j = 0; j < g.pairs.size(); ++j) {
            CHECK(f.params.pairs[j].detuning_mu_thz == doctest::Approx(truth.pairs[j].detuning_mu_thz).epsilon(1e-7));
            CHECK(f.params.pairs[j].visibility_v == doctest::Approx(truth.pairs[j].visibility_v).epsilon(1e-7));
            CHECK(f.params.pairs[j].phase_phi_deg == doctest::Approx(truth.pairs[j].phase_phi_deg).epsilon(1e-7));
        }
        const std::vector<double> r = fringe_residuals(s, f.params);
        double n2 = 0.0;
        for (double v : r) n2 += v * v;
        CHECK(std::sqrt(n2) == doctest::Approx(f.residual_norm).epsilon(1e-6));
    }
}

TEST_CASE("fit covariance is symmetric and scaled by the noise") {
    const FringeScan s = synth_scan(row_027(), -0.6, 0.6, 401, 1000, 5);
    FringeModelParams g = seed_guess(s, 4);
    g.pairs[0].weight_a = 0.44;
    g.pairs[1].weight_a = 0.56;
    const FitResult f = lm_fit(s, g);
    REQUIRE(f.converged);
    CHECK(f.parameter_names.size() == 7);
    CHECK(f.covariance.rows() == 7);
    CHECK((f.covariance - f.covariance.transpose()).cwiseAbs().maxCoeff() < 1e-15);
    for (Eigen::Index k = 0; k < 7; ++k) CHECK(f.covariance(k, k) > 0.0);
    // Reduced chi-square near one for correctly weighted Poisson data.
    CHECK(f.chi2 / static_cast<double>(f.n_samples - 7) == doctest::Approx(1.0).epsilon(0.25));
    CHECK(std::sqrt(f.covariance(1, 1)) < 0.05);
}

TEST_CASE("noisy six-dimensional scan recovers the detunings") {
    const FringeModelParams truth = row_037();
    const FringeScan s = synth_scan(truth, -0.86, 0.86, 401, 1000, 11);
    FringeModelParams g = seed_guess(s, 6);
    for (std::size_t j = 0; j < 3; ++j) g.pairs[j].weight_a = truth.pairs[j].weight_a;
    const FitResult f = lm_fit(s, g);
    REQUIRE(f.converged);
    for (std::size_t j = 0; j < 3; ++j) {
        CHECK(f.params.pairs[j].detuning_mu_thz == doctest::Approx(truth.pairs[j].detuning_mu_thz).epsilon(0.02));
    }
}

TEST_CASE("fit refuses scans shorter than the parameter count") {
    const FringeScan s = model_scan(row_027(), -0.6, 0.6, 5);
    CHECK_THROWS_AS(lm_fit(s, row_027()), ConfigError);
}

TEST_CASE("fits to interference-engine scans track the predicted comb") {
    BiphotonSpectrumModel m;
    for (double tau1 : {0.12, 0.27}) {
        const double half = 0.6 * 3.54 * tau1;
        const FringeScan s = fringe_scan(m, tau1, -half, half, 401);
        const int dim = detect_dimension(s);
        const FitResult f = lm_fit(s, seed_guess(s, dim));
        CHECK(f.converged);
        CHECK(f.params.coherence_time_ps == doctest::Approx(3.54 * tau1).epsilon(0.1));
    }
}

TEST_CASE("recovery batch: serial and OpenMP agree") {
    RecoveryJob job;
    job.truth = row_027();
    const std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6};
    const auto a = fit_recovery_batch(job, seeds, Backend::serial);
    const auto b = fit_recovery_batch(job, seeds, Backend::openmp);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].converged == b[i].converged);
        CHECK(a[i].params.coherence_time_ps == b[i].params.coherence_time_ps);
        for (std::size_t j = 0; j < a[i].params.pairs.size(); ++j) {
            CHECK(a[i].params.pairs[j].detuning_mu_thz == b[i].params.pairs[j].detuning_mu_thz);
        }
    }
}
