#include "homqd/scan.hpp"

#include <cmath>

#include "homqd/errors.hpp"

namespace homqd {

void FringeScan::validate() const {
    const std::size_t n = tau2_ps.size();
    if (values.size() != n || uncertainties.size() != n) {
        throw ConfigError("scan columns differ in length");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(tau2_ps[i]) || !std::isfinite(values[i]) ||
            !std::isfinite(uncertainties[i])) {
            throw ConfigError("scan contains non-finite values");
        }
        if (uncertainties[i] < 0.0) {
            throw ConfigError("scan uncertainties must be non-negative");
        }
    }
    if (counts_mode && counts_per_point < 1) {
        throw ConfigError("counts-mode scan needs counts_per_point >= 1");
    }
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    if (n < 3) {
        throw ConfigError("scan needs at least 3 points");
    }
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(hi > lo)) {
        throw ConfigError("scan range must be finite and non-empty");
    }
    std::vector<double> out(n);
    const double h = (hi - lo) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = lo + h * static_cast<double>(i);
    }
    out.back() = hi;
    return out;
}

}  // namespace homqd
