#include <doctest.h>

#include <cmath>

#include "homqd/errors.hpp"
#include "homqd/spectrum.hpp"
#include "homqd/units.hpp"
#include "oracles.hpp"

using namespace homqd;

TEST_CASE("unit conversions round trip") {
    CHECK(wavelength_to_frequency(810.0) == doctest::Approx(370.1141456790123).epsilon(1e-13));
    CHECK(frequency_to_wavelength(wavelength_to_frequency(1550.0)) == doctest::Approx(1550.0).epsilon(1e-14));
    CHECK_THROWS_AS(wavelength_to_frequency(0.0), ConfigError);
    CHECK_THROWS_AS(wavelength_to_frequency(-1.0), ConfigError);
    CHECK_THROWS_AS(frequency_to_wavelength(std::nan("")), ConfigError);
}

TEST_CASE("model widths follow the wavelength-to-frequency Jacobian") {
    BiphotonSpectrumModel m;
    const double fwhm = oracle::kC * 20.0 / (810.0 * 810.0);
    CHECK(m.marginal_fwhm_thz() == doctest::Approx(fwhm).epsilon(1e-12));
    CHECK(m.detuning_sigma_thz() == doctest::Approx(oracle::detuning_sigma(810.0, 20.0)).epsilon(1e-12));
    CHECK(m.pump_frequency() == doctest::Approx(2.0 * oracle::kC / 810.0).epsilon(1e-14));
}

TEST_CASE("model validation rejects bad fields") {
    BiphotonSpectrumModel m;
    m.marginal_fwhm_nm = 0.0;
    CHECK_THROWS_AS(m.validate(), ConfigError);
    m = {};
    m.center_wavelength_nm = -810.0;
    CHECK_THROWS_AS(m.validate(), ConfigError);
    m = {};
    m.pump_fwhm_thz = -1.0;
    CHECK_THROWS_AS(m.validate(), ConfigError);
    m = {};
    m.pump_fwhm_thz = 0.0;  // floored, still valid
    CHECK_NOTHROW(m.validate());
    CHECK(m.pump_sigma_thz() > 0.0);
}

TEST_CASE("joint intensity is normalized on the default quadrature") {
    BiphotonSpectrumModel m;
    JointQuadrature q(m);
    double sum = 0.0;
    for (double w : q.weights()) sum += w;
    CHECK(std::abs(sum - 1.0) < 1e-6);
    CHECK(std::abs(q.total_mass_2d() - 1.0) < 1e-6);
}

TEST_CASE("jsi factorizes into pump and detuning Gaussians") {
    BiphotonSpectrumModel m;
    m.pump_fwhm_thz = 0.5;
    const double nu0 = m.degenerate_frequency();
    const double sp = m.pump_sigma_thz();
    const double sd = m.marginal_sigma_thz();  // spread of the half-difference
    for (double a : {-3.0, 0.0, 1.7}) {
        for (double b : {-2.5, 0.4, 4.0}) {
            const double n1 = nu0 + a, n2 = nu0 + b;
            const double expected = oracle::gauss(n1 + n2 - 2.0 * nu0, sp) * oracle::gauss(0.5 * (n1 - n2), sd);
            CHECK(jsi_eval(m, n1, n2) == doctest::Approx(expected).epsilon(1e-12));
        }
    }
}

TEST_CASE("detuning density integrates to one and matches the Gaussian") {
    BiphotonSpectrumModel m;
    const double sd = m.detuning_sigma_thz();
    const double total = oracle::simpson([&](double d) { return detuning_density(m, d); }, -10 * sd, 10 * sd, 4000);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(detuning_density(m, 2.0) == doctest::Approx(oracle::gauss(2.0, sd)).epsilon(1e-12));
}

TEST_CASE("marginal bandwidth reproduces the source width") {
    BiphotonSpectrumModel m;
    CHECK(marginal_bandwidth(m) == doctest::Approx(20.0).epsilon(2e-3));
    m.marginal_fwhm_nm = 5.0;
    CHECK(marginal_bandwidth(m) == doctest::Approx(5.0).epsilon(1e-3));
}

TEST_CASE("frequency grid checks") {
    BiphotonSpectrumModel m;
    const FrequencyGrid g = FrequencyGrid::for_model(m, 401);
    CHECK(g.covers(m));
    CHECK(g.at(200) == doctest::Approx(m.degenerate_frequency()).epsilon(1e-14));
    CHECK_THROWS_AS(FrequencyGrid::for_model(m, 8), ConfigError);
    CHECK_THROWS_AS(FrequencyGrid::for_model(m, 401, 2.0), ConfigError);
    CHECK_FALSE(FrequencyGrid::centered(m.degenerate_frequency(), 2.0 * m.marginal_sigma_thz(), 401).covers(m));
}
