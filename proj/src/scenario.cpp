#include "homqd/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <type_traits>

#include "homqd/errors.hpp"

namespace homqd {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::string& where, const std::set<std::string>& known) {
    if (!obj.is_object()) {
        throw ConfigError("scenario key '" + where + "' must be an object");
    }
    for (const auto& item : obj.items()) {
        if (!known.contains(item.key())) {
            const std::string path = where.empty() ? item.key() : where + "." + item.key();
            throw ConfigError("unknown scenario key '" + path + "'");
        }
    }
}

template <typename T>
void read(const json& obj, const std::string& where, const char* key, T& out) {
    if (!obj.contains(key)) return;
    const std::string path = where.empty() ? std::string(key) : where + "." + key;
    const json& v = obj.at(key);
    if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) throw ConfigError("scenario key '" + path + "' must be an integer");
        if constexpr (std::is_unsigned_v<T>) {
            if (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0) {
                throw ConfigError("scenario key '" + path + "' must be non-negative");
            }
        }
    }
    try {
        out = v.get<T>();
    } catch (const json::exception&) {
        throw ConfigError("scenario key '" + path + "' has the wrong type");
    }
}

template <typename T>
void read_optional(const json& obj, const std::string& where, const char* key, std::optional<T>& out) {
    if (!obj.contains(key) || obj.at(key).is_null()) return;
    T value{};
    read(obj, where, key, value);
    out = value;
}

void require(bool ok, const std::string& key, const std::string& what) {
    if (!ok) throw ConfigError("scenario key '" + key + "' " + what);
}

bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

double Scenario::tau2_min() const {
    return scan.tau2_min_ps.value_or(-0.6 * coherence_time_from_delay(tau1_ps));
}

double Scenario::tau2_max() const {
    return scan.tau2_max_ps.value_or(0.6 * coherence_time_from_delay(tau1_ps));
}

void Scenario::validate() const {
    require(finite_positive(model.center_wavelength_nm), "model.center_wavelength_nm", "must be positive");
    require(finite_positive(model.marginal_fwhm_nm), "model.marginal_fwhm_nm", "must be positive");
    require(model.marginal_fwhm_nm < model.center_wavelength_nm, "model.marginal_fwhm_nm",
            "must be smaller than the center wavelength");
    require(std::isfinite(model.pump_fwhm_thz) && model.pump_fwhm_thz >= 0.0, "model.pump_fwhm_thz",
            "must be non-negative");
    require(std::isfinite(tau1_ps) && tau1_ps >= 0.0 && tau1_ps <= 100.0, "tau1_ps", "must lie in [0, 100] ps");

    require(spectrum.grid_points >= FrequencyGrid::kMinPoints && spectrum.grid_points <= 4001,
            "spectrum.grid_points", "must lie in [16, 4001]");
    require(spectrum.bin_threshold > 0.0 && spectrum.bin_threshold <= 1.0, "spectrum.bin_threshold",
            "must lie in (0, 1]");

    require(scan.n_points >= 3 && scan.n_points <= 100000, "scan.n_points", "must lie in [3, 100000]");
    require(scan.counts_per_point >= 0, "scan.counts_per_point", "must be non-negative");
    if (scan.tau2_min_ps) require(std::isfinite(*scan.tau2_min_ps), "scan.tau2_min_ps", "must be finite");
    if (scan.tau2_max_ps) require(std::isfinite(*scan.tau2_max_ps), "scan.tau2_max_ps", "must be finite");
    if (tau1_ps > 0.0 || (scan.tau2_min_ps && scan.tau2_max_ps)) {
        require(tau2_min() < tau2_max(), "scan.tau2_max_ps", "must exceed scan.tau2_min_ps");
    }

    if (fit.m) require(*fit.m >= 2 && *fit.m % 2 == 0 && *fit.m <= 64, "fit.m", "must be an even integer in [2, 64]");
    require(fit.solver.max_iterations >= 1, "fit.max_iterations", "must be at least 1");
    require(finite_positive(fit.solver.gradient_tol), "fit.gradient_tol", "must be positive");
    require(finite_positive(fit.solver.relative_cost_tol), "fit.relative_cost_tol", "must be positive");

    for (double p : analysis.balances) {
        require(p >= 0.0 && p <= 1.0, "analysis.balances", "entries must lie in [0, 1]");
    }
}

Scenario scenario_from_json(const json& doc) {
    Scenario s;
    reject_unknown(doc, "", {"model", "tau1_ps", "spectrum", "scan", "fit", "analysis"});
    read(doc, "", "tau1_ps", s.tau1_ps);
    if (doc.contains("model")) {
        const json& m = doc.at("model");
        reject_unknown(m, "model", {"center_wavelength_nm", "marginal_fwhm_nm", "pump_fwhm_thz"});
        read(m, "model", "center_wavelength_nm", s.model.center_wavelength_nm);
        read(m, "model", "marginal_fwhm_nm", s.model.marginal_fwhm_nm);
        read(m, "model", "pump_fwhm_thz", s.model.pump_fwhm_thz);
    }
    if (doc.contains("spectrum")) {
        const json& sp = doc.at("spectrum");
        reject_unknown(sp, "spectrum", {"grid_points", "bin_threshold"});
        read(sp, "spectrum", "grid_points", s.spectrum.grid_points);
        read(sp, "spectrum", "bin_threshold", s.spectrum.bin_threshold);
    }
    if (doc.contains("scan")) {
        const json& sc = doc.at("scan");
        reject_unknown(sc, "scan", {"tau2_min_ps", "tau2_max_ps", "n_points", "counts_per_point", "seed"});
        read_optional(sc, "scan", "tau2_min_ps", s.scan.tau2_min_ps);
        read_optional(sc, "scan", "tau2_max_ps", s.scan.tau2_max_ps);
        read(sc, "scan", "n_points", s.scan.n_points);
        read(sc, "scan", "counts_per_point", s.scan.counts_per_point);
        read(sc, "scan", "seed", s.scan.seed);
    }
    if (doc.contains("fit")) {
        const json& f = doc.at("fit");
        reject_unknown(f, "fit", {"m", "max_iterations", "gradient_tol", "relative_cost_tol"});
        if (f.contains("m") && f.at("m").is_string()) {
            require(f.at("m").get<std::string>() == "auto", "fit.m", "must be an even integer or \"auto\"");
        } else {
            read_optional(f, "fit", "m", s.fit.m);
        }
        read(f, "fit", "max_iterations", s.fit.solver.max_iterations);
        read(f, "fit", "gradient_tol", s.fit.solver.gradient_tol);
        read(f, "fit", "relative_cost_tol", s.fit.solver.relative_cost_tol);
    }
    if (doc.contains("analysis")) {
        const json& a = doc.at("analysis");
        reject_unknown(a, "analysis", {"mode", "balances"});
        std::string mode = to_string(s.analysis.mode);
        read(a, "analysis", "mode", mode);
        s.analysis.mode = parse_coherence_mode(mode);
        read(a, "analysis", "balances", s.analysis.balances);
    }
    s.validate();
    return s;
}

json scenario_to_json(const Scenario& s) {
    json doc;
    doc["model"] = {{"center_wavelength_nm", s.model.center_wavelength_nm},
                    {"marginal_fwhm_nm", s.model.marginal_fwhm_nm},
                    {"pump_fwhm_thz", s.model.pump_fwhm_thz}};
    doc["tau1_ps"] = s.tau1_ps;
    doc["spectrum"] = {{"grid_points", s.spectrum.grid_points}, {"bin_threshold", s.spectrum.bin_threshold}};
    doc["scan"] = {{"tau2_min_ps", s.tau2_min()},
                   {"tau2_max_ps", s.tau2_max()},
                   {"n_points", s.scan.n_points},
                   {"counts_per_point", s.scan.counts_per_point},
                   {"seed", s.scan.seed}};
    doc["fit"] = {{"m", s.fit.m ? json(*s.fit.m) : json("auto")},
                  {"max_iterations", s.fit.solver.max_iterations},
                  {"gradient_tol", s.fit.solver.gradient_tol},
                  {"relative_cost_tol", s.fit.solver.relative_cost_tol}};
    doc["analysis"] = {{"mode", to_string(s.analysis.mode)}, {"balances", s.analysis.balances}};
    return doc;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot read scenario file " + path.string());
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("scenario " + path.string() + " is not valid JSON: " + e.what());
    }
    return scenario_from_json(doc);
}

}  // namespace homqd
