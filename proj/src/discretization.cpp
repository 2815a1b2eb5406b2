#include "homqd/discretization.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <string>

#include "homqd/errors.hpp"
#include "homqd/lm.hpp"
#include "homqd/units.hpp"

namespace homqd {

namespace {

constexpr double kCoherenceFactor = 0.885;
constexpr double kPeakFloor = 1e-3;  // local maxima below this share of the map max are noise

double antibunched_weight(const BiphotonSpectrumModel& model, double detuning, double tau1) {
    const double s = std::sin(std::numbers::pi * detuning * tau1);
    return detuning_density(model, detuning) * s * s;
}

double simpson(const auto& fn, double a, double b, std::size_t intervals) {
    if (intervals % 2 != 0) {
        ++intervals;
    }
    const double h = (b - a) / static_cast<double>(intervals);
    double acc = fn(a) + fn(b);
    for (std::size_t k = 1; k < intervals; ++k) {
        acc += (k % 2 == 1 ? 4.0 : 2.0) * fn(a + h * static_cast<double>(k));
    }
    return acc * h / 3.0;
}

double golden_max(const auto& fn, double a, double b) {
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - phi * (b - a);
    double d = a + phi * (b - a);
    double fc = fn(c);
    double fd = fn(d);
    for (int it = 0; it < 200 && (b - a) > 1e-13 * std::max(1.0, std::abs(b)); ++it) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = fn(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = fn(d);
        }
    }
    return 0.5 * (a + b);
}

struct Lobe {
    double detuning;
    double volume_pos;
    double volume_neg;
};

DiscreteState assemble(std::vector<Lobe> lobes, double threshold, double center_wavelength_nm,
                       std::vector<bool>* kept_mask) {
    double strongest = 0.0;
    for (const Lobe& l : lobes) {
        strongest = std::max(strongest, l.volume_pos + l.volume_neg);
    }
    if (!(strongest > 0.0)) {
        throw NumericError("no lobe carries spectral weight");
    }
    std::vector<Lobe> kept;
    if (kept_mask) {
        kept_mask->assign(lobes.size(), false);
    }
    for (std::size_t k = 0; k < lobes.size(); ++k) {
        if (lobes[k].volume_pos + lobes[k].volume_neg >= threshold * strongest) {
            kept.push_back(lobes[k]);
            if (kept_mask) {
                (*kept_mask)[k] = true;
            }
        }
    }
    std::sort(kept.begin(), kept.end(),
              [](const Lobe& a, const Lobe& b) { return a.detuning > b.detuning; });
    double total = 0.0;
    for (const Lobe& l : kept) {
        total += l.volume_pos + l.volume_neg;
    }
    DiscreteState state;
    state.center_wavelength_nm = center_wavelength_nm;
    for (std::size_t k = 0; k < kept.size(); ++k) {
        const Lobe& l = kept[k];
        const double vol = l.volume_pos + l.volume_neg;
        state.pairs.push_back(FrequencyBinPair{static_cast<int>(k + 1), l.detuning, vol / total,
                                               l.volume_pos / vol, 180.0});
    }
    state.dimension_m = 2 * static_cast<int>(state.pairs.size());
    return state;
}

void require_threshold(double threshold) {
    if (!(threshold > 0.0 && threshold < 1.0)) {
        throw ConfigError("bin threshold must lie in (0, 1)");
    }
}

}  // namespace

void DiscreteState::validate() const {
    if (pairs.empty()) {
        throw ConfigError("discrete state has no frequency-bin pairs");
    }
    if (dimension_m != 2 * static_cast<int>(pairs.size())) {
        throw ConfigError("dimension must equal twice the pair count");
    }
    double total = 0.0;
    for (const FrequencyBinPair& p : pairs) {
        if (!(p.detuning_mu_thz > 0.0) || !std::isfinite(p.detuning_mu_thz)) {
            throw ConfigError("pair detuning must be positive");
        }
        if (!(p.balance_p >= 0.0 && p.balance_p <= 1.0)) {
            throw ConfigError("pair balance must lie in [0, 1]");
        }
        if (!(p.weight_a >= 0.0) || !std::isfinite(p.weight_a)) {
            throw ConfigError("pair weight must be non-negative");
        }
        total += p.weight_a;
    }
    if (std::abs(total - 1.0) > 1e-6) {
        throw ConfigError("pair weights must sum to one");
    }
}

std::pair<double, double> DiscreteState::bin_frequencies(std::size_t k) const {
    const double nu0 = wavelength_to_frequency(center_wavelength_nm);
    const double half = 0.5 * pairs.at(k).detuning_mu_thz;
    return {nu0 - half, nu0 + half};
}

DiscreteState predict_bins(const BiphotonSpectrumModel& model, double tau1_ps, double threshold) {
    model.validate();
    require_threshold(threshold);
    if (!std::isfinite(tau1_ps) || tau1_ps < 0.0) {
        throw ConfigError("tau1 must be finite and >= 0");
    }
    if (tau1_ps == 0.0) {
        throw ConfigError("no discrete structure at zero delay");
    }
    const double period = 1.0 / tau1_ps;
    const double reach = 8.0 * model.detuning_sigma_thz();
    auto weight = [&](double d) { return antibunched_weight(model, d, tau1_ps); };

    std::vector<Lobe> lobes;
    for (int n = 0; n * period < reach; ++n) {
        const double lo = n * period;
        const double hi = (n + 1) * period;
        const double peak = golden_max(weight, lo, hi);
        const double pos = simpson(weight, lo, hi, 2000);
        const double neg = simpson(weight, -hi, -lo, 2000);
        lobes.push_back({peak, pos, neg});
    }
    return assemble(std::move(lobes), threshold, model.center_wavelength_nm, nullptr);
}

ExtractedBins extract_bins_from_map(const JointSpectrumMap& map, double threshold) {
    map.validate();
    require_threshold(threshold);
    const std::size_t rows = map.rows();
    const std::size_t cols = map.cols();
    if (rows < 3 || cols < 3) {
        throw ConfigError("spectrum map too small for peak extraction");
    }

    std::vector<double> nu_s(rows);
    std::vector<double> nu_i(cols);
    for (std::size_t i = 0; i < rows; ++i) nu_s[i] = wavelength_to_frequency(map.signal_nm[i]);
    for (std::size_t j = 0; j < cols; ++j) nu_i[j] = wavelength_to_frequency(map.idler_nm[j]);
    const double h = std::abs(nu_s.back() - nu_s.front()) / static_cast<double>(rows - 1);
    auto cell = [&](const std::vector<double>& ax, std::size_t k) {
        const std::size_t a = k == 0 ? 0 : k - 1;
        const std::size_t b = std::min(k + 1, ax.size() - 1);
        return std::abs(ax[b] - ax[a]) / static_cast<double>(b - a);
    };

    double peak_value = 0.0;
    for (double v : map.intensity) peak_value = std::max(peak_value, v);
    if (!(peak_value > 0.0)) {
        throw NumericError("no detectable peaks: spectrum map is empty");
    }

    // Detuning profile and centre-frequency estimate.
    std::map<long, double> profile;
    double mass = 0.0;
    double weighted_centre = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            const double v = map.at(i, j);
            if (v <= 0.0) continue;
            const double m = v * cell(nu_s, i) * cell(nu_i, j);
            profile[std::lround((nu_i[j] - nu_s[i]) / h)] += m;
            mass += m;
            weighted_centre += m * 0.5 * (nu_s[i] + nu_i[j]);
        }
    }
    const double nu0 = weighted_centre / mass;

    // 2D local maxima with positive detuning, recorded as profile bins.
    std::vector<long> peak_bins;
    const double floor = kPeakFloor * peak_value;
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            const double v = map.at(i, j);
            if (v < floor) continue;
            bool is_max = true;
            for (int di = -1; di <= 1 && is_max; ++di) {
                for (int dj = -1; dj <= 1; ++dj) {
                    if (di == 0 && dj == 0) continue;
                    const long ii = static_cast<long>(i) + di;
                    const long jj = static_cast<long>(j) + dj;
                    if (ii < 0 || jj < 0 || ii >= static_cast<long>(rows) ||
                        jj >= static_cast<long>(cols)) {
                        continue;
                    }
                    const double u = map.at(static_cast<std::size_t>(ii), static_cast<std::size_t>(jj));
                    const bool earlier = di < 0 || (di == 0 && dj < 0);
                    if (earlier ? u >= v : u > v) {
                        is_max = false;
                        break;
                    }
                }
            }
            if (!is_max) continue;
            const long bin = std::lround((nu_i[j] - nu_s[i]) / h);
            if (bin > 0) peak_bins.push_back(bin);
        }
    }
    std::sort(peak_bins.begin(), peak_bins.end());
    std::vector<long> peaks;
    for (long b : peak_bins) {
        if (peaks.empty() || b - peaks.back() > 2) {
            peaks.push_back(b);
        }
    }
    if (peaks.empty()) {
        throw NumericError("no detectable peaks above the noise floor at positive detuning");
    }

    auto density = [&](long bin) {
        const auto it = profile.find(bin);
        return it == profile.end() ? 0.0 : it->second / h;
    };
    const long last_bin = profile.rbegin()->first;

    // Segment boundaries: profile minima between neighbouring peaks.
    std::vector<long> bounds{0};
    for (std::size_t k = 0; k + 1 < peaks.size(); ++k) {
        long best = peaks[k];
        for (long b = peaks[k]; b <= peaks[k + 1]; ++b) {
            if (density(b) < density(best)) best = b;
        }
        bounds.push_back(best);
    }
    bounds.push_back(last_bin);

    std::vector<Lobe> lobes;
    ExtractedBins out;
    for (std::size_t k = 0; k < peaks.size(); ++k) {
        const long lo = bounds[k];
        const long hi = bounds[k + 1];
        double pos = 0.0;
        double neg = 0.0;
        std::vector<double> xs;
        std::vector<double> ys;
        for (long b = lo; b <= hi; ++b) {
            // Shared boundary bins are split between neighbouring lobes.
            const double share = (b == lo || b == hi) ? 0.5 : 1.0;
            pos += share * density(b) * h;
            neg += share * density(-b) * h;
            xs.push_back(static_cast<double>(b) * h);
            ys.push_back(density(b));
        }
        if (lo == 0) {
            // Bin 0 sits on the diagonal and belongs to no lobe.
            pos -= 0.5 * density(0) * h;
            neg -= 0.5 * density(0) * h;
        }

        const double amp0 = density(peaks[k]);
        const double width0 = std::max(0.25 * static_cast<double>(hi - lo) * h, h);
        const lm::ResidualFn gauss = [&](std::span<const double> p, std::span<double> r) {
            for (std::size_t q = 0; q < xs.size(); ++q) {
                const double z = (xs[q] - p[1]) / p[2];
                r[q] = (p[0] * std::exp(-0.5 * z * z) - ys[q]) / amp0;
            }
        };
        double centre = static_cast<double>(peaks[k]) * h;
        double sigma = width0;
        if (xs.size() > 3) {
            const lm::Result fit = lm::minimize(gauss, {amp0, centre, width0}, xs.size());
            if (fit.converged && std::isfinite(fit.params[1]) && fit.params[1] > xs.front() &&
                fit.params[1] < xs.back()) {
                centre = fit.params[1];
                sigma = std::abs(fit.params[2]);
            }
        }
        lobes.push_back({centre, pos, neg});

        LobeInfo info;
        info.detuning_thz = centre;
        info.sigma_thz = sigma;
        info.volume = pos + neg;
        info.volume_positive = pos;
        // Single-photon frequency width is half the detuning width.
        info.wavelength_fwhm_nm = kFwhmPerSigma * sigma * 0.5 * kSpeedOfLight / (nu0 * nu0);
        out.lobes.push_back(info);
    }

    std::vector<bool> kept;
    out.state = assemble(lobes, threshold, kSpeedOfLight / nu0, &kept);
    for (std::size_t k = 0; k < kept.size(); ++k) {
        out.lobes[k].kept = kept[k];
    }
    return out;
}

double coherence_time(double bandwidth_thz) {
    if (!(bandwidth_thz > 0.0) || !std::isfinite(bandwidth_thz)) {
        throw ConfigError("coherence time needs a positive bandwidth");
    }
    return kCoherenceFactor / bandwidth_thz;
}

double bandwidth_from_wavelength_detuning(double detuning_nm, double wavelength_nm) {
    if (!(detuning_nm > 0.0) || !(wavelength_nm > 0.0)) {
        throw ConfigError("detuning and wavelength must be positive");
    }
    return detuning_nm * kSpeedOfLight / (2.0 * wavelength_nm * wavelength_nm);
}

double coherence_time_from_delay(double tau1_ps) {
    if (!(tau1_ps > 0.0) || !std::isfinite(tau1_ps)) {
        throw ConfigError("no discrete structure at zero delay");
    }
    // Fundamental line 1 / (2 tau1); single-photon bandwidth is half of it.
    return coherence_time(0.5 / (2.0 * tau1_ps));
}

double coherence_time(const DiscreteState& state) {
    state.validate();
    double smallest = state.pairs.front().detuning_mu_thz;
    for (const FrequencyBinPair& p : state.pairs) {
        smallest = std::min(smallest, p.detuning_mu_thz);
    }
    return coherence_time(0.5 * smallest);
}

int dimensionality(const DiscreteState& state) {
    if (state.pairs.empty()) {
        throw ConfigError("dimensionality of a state without pairs is undefined");
    }
    return 2 * static_cast<int>(state.pairs.size());
}

}  // namespace homqd
