#pragma once

#include <cstdint>
#include <vector>

namespace homqd {

// Samples of a tau2 scan. In probability mode values are coincidence
// probabilities; in counts mode they are coincidence counts out of
// counts_per_point trials with Poisson uncertainties sqrt(count).
struct FringeScan {
    std::vector<double> tau2_ps;
    std::vector<double> values;
    std::vector<double> uncertainties;
    bool counts_mode = false;
    std::int64_t counts_per_point = 0;

    std::size_t size() const { return tau2_ps.size(); }
    void validate() const;
};

// Uniform samples from lo to hi inclusive. Throws ConfigError for n < 3 or an
// empty/non-finite range.
std::vector<double> linspace(double lo, double hi, std::size_t n);

}  // namespace homqd
