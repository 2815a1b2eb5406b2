#include <doctest.h>

#include <cmath>
#include <vector>

#include "homqd/errors.hpp"
#include "homqd/hom.hpp"
#include "homqd/kernels.hpp"
#include "oracles.hpp"

using namespace homqd;

TEST_CASE("first-beamsplitter coincidence matches the Gaussian closed form") {
    BiphotonSpectrumModel m;
    const double sd = m.detuning_sigma_thz();
    for (double tau1 : {0.0, 0.01, 0.03, 0.12, 0.37, 10.0}) {
        CAPTURE(tau1);
        CHECK(std::abs(coincidence_probability_tau1(m, tau1) - oracle::coincidence_tau1(sd, tau1)) < 1e-8);
        CHECK(std::abs(coincidence_probability_tau1(m, tau1) + bunching_probability_tau1(m, tau1) - 1.0) < 1e-6);
    }
    CHECK(std::abs(coincidence_probability_tau1(m, 0.0)) < 1e-9);
    CHECK(std::abs(coincidence_probability_tau1(m, 10.0) - 0.5) < 0.01);
    CHECK_THROWS_AS(coincidence_probability_tau1(m, -0.1), ConfigError);
}

TEST_CASE("cascaded fringe agrees with the reduced single-integral form") {
    BiphotonSpectrumModel m;
    const double sd = m.detuning_sigma_thz();
    for (double tau1 : {0.12, 0.27}) {
        for (double tau2 : {0.0, 0.05, tau1, -0.5 * tau1, 0.3, 2.0}) {
            CAPTURE(tau1);
            CAPTURE(tau2);
            CHECK(fringe_probability(m, tau1, tau2) ==
                  doctest::Approx(oracle::reduced_fringe(sd, tau1, tau2)).epsilon(1e-7));
        }
    }
}

TEST_CASE("fringe has a unit peak at zero and quarter dips at +-tau1") {
    BiphotonSpectrumModel m;
    for (double tau1 : {0.12, 0.27, 0.37}) {
        CAPTURE(tau1);
        CHECK(fringe_probability(m, tau1, 0.0) == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(fringe_probability(m, tau1, tau1) == doctest::Approx(0.25).epsilon(1e-3));
        CHECK(fringe_probability(m, tau1, 20.0) == doctest::Approx(0.5).epsilon(1e-9));
    }
}

TEST_CASE("fringe is even in tau2") {
    BiphotonSpectrumModel m;
    const FringeScan s = fringe_scan(m, 0.27, -0.6, 0.6, 241);
    for (std::size_t i = 0; i < s.size(); ++i) {
        CHECK(std::abs(s.values[i] - s.values[s.size() - 1 - i]) < 1e-9);
    }
}

TEST_CASE("fringe at zero first delay uses the derivative limit") {
    BiphotonSpectrumModel m;
    const double p0 = fringe_probability(m, 0.0, 0.05);
    const double p_small = fringe_probability(m, 1e-6, 0.05);
    CHECK(p0 == doctest::Approx(p_small).epsilon(1e-6));
    CHECK(std::isfinite(p0));
}

TEST_CASE("coincidence map sums to the coincidence probability") {
    BiphotonSpectrumModel m;
    const FrequencyGrid g = FrequencyGrid::for_model(m, 401);
    for (double tau1 : {0.12, 0.37}) {
        const JointSpectrumMap map = coincidence_spectrum(m, tau1, g);
        double sum = 0.0;
        for (double v : map.intensity) sum += v;
        sum *= g.step() * g.step();
        CHECK(sum == doctest::Approx(coincidence_probability_tau1(m, tau1)).epsilon(2e-3));
        // Ascending wavelength axes.
        CHECK(map.signal_nm.front() < map.signal_nm.back());
        CHECK(map.idler_nm.front() < map.idler_nm.back());
    }
}

TEST_CASE("coincidence map is dark at degeneracy and anti-correlated") {
    BiphotonSpectrumModel m;
    const JointSpectrumMap map = coincidence_spectrum(m, 0.2);
    std::size_t imax = 0;
    for (std::size_t k = 0; k < map.intensity.size(); ++k) {
        if (map.intensity[k] > map.intensity[imax]) imax = k;
    }
    const double peak = map.intensity[imax];
    const std::size_t c = map.rows() / 2;
    CHECK(map.at(c, c) < 1e-2 * peak);
    // The brightest pixel pairs a red signal with a blue idler or vice versa.
    const std::size_t i = imax / map.cols(), j = imax % map.cols();
    CHECK((map.signal_nm[i] - 810.0) * (map.idler_nm[j] - 810.0) < 0.0);
    // Mirror symmetry under signal/idler exchange.
    CHECK(map.at(i, j) == doctest::Approx(map.at(j, i)).epsilon(1e-12));
}

TEST_CASE("purification bookkeeping") {
    PurificationConfig off;
    off.enabled = false;
    const ChannelWeights a = bunched_fraction(off);
    CHECK(a.anti_bunched == doctest::Approx(0.5));
    CHECK(a.bunched == doctest::Approx(0.5));
    CHECK(a.accepted_fraction == doctest::Approx(1.0));
    CHECK(a.bunched_contamination == doctest::Approx(0.5));

    const ChannelWeights b = bunched_fraction(PurificationConfig{});
    CHECK(b.accepted_fraction == doctest::Approx(0.25));
    CHECK(b.bunched_contamination == doctest::Approx(0.0));

    PurificationConfig bad;
    bad.polarizer_angles_deg = {45.0, 0.0};
    CHECK_THROWS_AS(bunched_fraction(bad), ConfigError);
}

TEST_CASE("serial and OpenMP kernels agree bit for bit") {
    BiphotonSpectrumModel m;
    const FrequencyGrid g = FrequencyGrid::for_model(m, 151);
    std::vector<double> a(g.n_points * g.n_points), b(a.size());
    kernels::serial::coincidence_map({m, g, 0.27, a});
    kernels::omp::coincidence_map({m, g, 0.27, b});
    CHECK(a == b);

    JointQuadrature q(m);
    const kernels::DetuningNodes nodes{q.detuning(), q.weights(), m.degenerate_frequency()};
    std::vector<double> tau2(97);
    for (std::size_t i = 0; i < tau2.size(); ++i) tau2[i] = -0.6 + 1.2 * static_cast<double>(i) / 96.0;
    std::vector<double> fa(tau2.size()), fb(tau2.size());
    kernels::serial::cascaded_fringe({nodes, 0.37, tau2, fa});
    kernels::omp::cascaded_fringe({nodes, 0.37, tau2, fb});
    CHECK(fa == fb);
    CHECK(kernels::omp::max_threads() >= 1);
}
