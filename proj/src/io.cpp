#include "homqd/io.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "homqd/errors.hpp"

namespace homqd::io {

namespace {

using nlohmann::json;

void append_number(std::string& out, double v) {
    if (!std::isfinite(v)) {
        throw NumericError("refusing to serialize a non-finite value");
    }
    fmt::format_to(std::back_inserter(out), "{:.17g}", v);
}

void check_finite(const json& doc) {
    if (doc.is_number_float() && !std::isfinite(doc.get<double>())) {
        throw NumericError("refusing to serialize a non-finite value");
    }
    if (doc.is_structured()) {
        for (const auto& child : doc) check_finite(child);
    }
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> parts;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, sep)) parts.push_back(cell);
    if (!line.empty() && line.back() == sep) parts.emplace_back();
    return parts;
}

double parse_double(const std::string& cell, std::size_t line_no) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(cell, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    while (used < cell.size() && (cell[used] == ' ' || cell[used] == '\r')) ++used;
    if (used != cell.size() || cell.empty() || !std::isfinite(v)) {
        throw IoError("scan CSV line " + std::to_string(line_no) + ": bad number '" + cell + "'");
    }
    return v;
}

std::string trim(std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
    while (!s.empty() && s.front() == ' ') s.erase(s.begin());
    return s;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

json pair_to_json(const FringePair& p) {
    return {{"weight_a", p.weight_a},
            {"detuning_mu_thz", p.detuning_mu_thz},
            {"visibility_v", p.visibility_v},
            {"phase_phi_deg", p.phase_phi_deg}};
}

}  // namespace

Format parse_format(const std::string& text) {
    if (text == "csv") return Format::csv;
    if (text == "json") return Format::json;
    throw ConfigError("unknown format '" + text + "' (expected csv or json)");
}

std::string extension(Format format) { return format == Format::csv ? ".csv" : ".json"; }

FringeScan ScanTable::to_scan() const {
    FringeScan scan;
    scan.tau2_ps = tau2_ps;
    if (has_counts()) {
        scan.values = counts;
        scan.uncertainties = sigma;
        scan.counts_mode = true;
        scan.counts_per_point = counts_per_point;
    } else {
        scan.values = probability_model;
        scan.uncertainties.assign(tau2_ps.size(), 0.0);
    }
    scan.validate();
    return scan;
}

std::string map_to_csv(const JointSpectrumMap& map) {
    map.validate();
    std::string out = fmt::format("# schema_version={} rows={} cols={}\n", kSchemaVersion, map.rows(), map.cols());
    out += "signal_nm,idler_nm,intensity\n";
    out.reserve(out.size() + map.intensity.size() * 64);
    for (std::size_t i = 0; i < map.rows(); ++i) {
        for (std::size_t j = 0; j < map.cols(); ++j) {
            append_number(out, map.signal_nm[i]);
            out += ',';
            append_number(out, map.idler_nm[j]);
            out += ',';
            append_number(out, map.at(i, j));
            out += '\n';
        }
    }
    return out;
}

json map_to_json(const JointSpectrumMap& map) {
    map.validate();
    return {{"schema_version", kSchemaVersion},
            {"signal_nm", map.signal_nm},
            {"idler_nm", map.idler_nm},
            {"intensity_row_major", map.intensity}};
}

std::string scan_to_csv(const ScanTable& t) {
    std::string out = fmt::format("# schema_version={} counts_per_point={}\n", kSchemaVersion, t.counts_per_point);
    out += t.has_counts() ? "tau2_ps,probability_model,counts,sigma\n" : "tau2_ps,probability_model\n";
    for (std::size_t i = 0; i < t.tau2_ps.size(); ++i) {
        append_number(out, t.tau2_ps[i]);
        out += ',';
        append_number(out, t.probability_model[i]);
        if (t.has_counts()) {
            out += ',';
            append_number(out, t.counts[i]);
            out += ',';
            append_number(out, t.sigma[i]);
        }
        out += '\n';
    }
    return out;
}

json scan_to_json(const ScanTable& t) {
    json doc{{"schema_version", kSchemaVersion},
             {"counts_per_point", t.counts_per_point},
             {"tau2_ps", t.tau2_ps},
             {"probability_model", t.probability_model}};
    if (t.has_counts()) {
        doc["counts"] = t.counts;
        doc["sigma"] = t.sigma;
    }
    return doc;
}

ScanTable scan_from_csv(const std::string& text) {
    ScanTable t;
    std::istringstream in(text);
    std::string line;
    std::vector<std::string> header;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '#') {
            for (const std::string& token : split(line.substr(1), ' ')) {
                const auto eq = token.find('=');
                if (eq == std::string::npos) continue;
                const std::string key = token.substr(0, eq);
                const std::string value = token.substr(eq + 1);
                long long parsed = 0;
                try {
                    parsed = std::stoll(value);
                } catch (const std::exception&) {
                    throw IoError("scan CSV line " + std::to_string(line_no) + ": bad value for " + key);
                }
                if (key == "counts_per_point") t.counts_per_point = parsed;
                if (key == "schema_version" && parsed != kSchemaVersion) {
                    throw IoError("unsupported scan schema version " + value);
                }
            }
            continue;
        }
        if (header.empty()) {
            for (std::string& h : split(line, ',')) header.push_back(trim(h));
            continue;
        }
        const std::vector<std::string> cells = split(line, ',');
        if (cells.size() != header.size()) {
            throw IoError("scan CSV line " + std::to_string(line_no) + ": expected " +
                          std::to_string(header.size()) + " columns");
        }
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const double v = parse_double(trim(cells[c]), line_no);
            if (header[c] == "tau2_ps") t.tau2_ps.push_back(v);
            else if (header[c] == "probability_model") t.probability_model.push_back(v);
            else if (header[c] == "counts") t.counts.push_back(v);
            else if (header[c] == "sigma") t.sigma.push_back(v);
        }
    }
    if (t.tau2_ps.empty()) {
        throw IoError("scan CSV has no tau2_ps data");
    }
    if (t.probability_model.empty() && t.counts.empty()) {
        throw IoError("scan CSV needs a probability_model or counts column");
    }
    if (t.probability_model.empty()) t.probability_model.assign(t.tau2_ps.size(), 0.5);
    if (t.has_counts()) {
        if (t.sigma.empty()) {
            for (double c : t.counts) t.sigma.push_back(std::sqrt(c));
        }
        if (t.counts_per_point <= 0) {
            throw IoError("counts scan needs counts_per_point in its schema line");
        }
    }
    return t;
}

ScanTable scan_from_json(const json& doc) {
    try {
        ScanTable t;
        t.tau2_ps = doc.at("tau2_ps").get<std::vector<double>>();
        t.probability_model = doc.at("probability_model").get<std::vector<double>>();
        t.counts_per_point = doc.value("counts_per_point", std::int64_t{0});
        if (doc.contains("counts")) {
            t.counts = doc.at("counts").get<std::vector<double>>();
            t.sigma = doc.at("sigma").get<std::vector<double>>();
        }
        return t;
    } catch (const json::exception& e) {
        throw IoError(std::string("malformed scan JSON: ") + e.what());
    }
}

ScanTable read_scan(const std::filesystem::path& path) {
    const std::string text = read_text(path);
    if (path.extension() == ".json") {
        try {
            return scan_from_json(json::parse(text));
        } catch (const json::parse_error& e) {
            throw IoError("scan " + path.string() + " is not valid JSON: " + e.what());
        }
    }
    return scan_from_csv(text);
}

json bins_to_json(const ExtractedBins& bins, const DiscreteState& predicted) {
    auto state_json = [](const DiscreteState& s) {
        json pairs = json::array();
        for (const FrequencyBinPair& p : s.pairs) {
            pairs.push_back({{"index_j", p.index_j},
                             {"detuning_mu_thz", p.detuning_mu_thz},
                             {"weight_a", p.weight_a},
                             {"balance_p", p.balance_p},
                             {"phase_phi_deg", p.phase_phi_deg}});
        }
        return json{{"dimension_m", s.dimension_m},
                    {"center_wavelength_nm", s.center_wavelength_nm},
                    {"pairs", pairs}};
    };
    json lobes = json::array();
    for (const LobeInfo& l : bins.lobes) {
        lobes.push_back({{"detuning_thz", l.detuning_thz},
                         {"sigma_thz", l.sigma_thz},
                         {"volume", l.volume},
                         {"wavelength_fwhm_nm", l.wavelength_fwhm_nm},
                         {"kept", l.kept}});
    }
    return {{"schema_version", kSchemaVersion},
            {"extracted", state_json(bins.state)},
            {"predicted", state_json(predicted)},
            {"lobes", lobes},
            {"coherence_time_ps", coherence_time(bins.state)}};
}

json fit_to_json(const FitResult& fit) {
    json pairs = json::array();
    for (const FringePair& p : fit.params.pairs) pairs.push_back(pair_to_json(p));
    json errors = json::object();
    for (std::size_t k = 0; k < fit.parameter_names.size(); ++k) {
        const auto idx = static_cast<Eigen::Index>(k);
        const double var = fit.covariance.rows() > idx ? fit.covariance(idx, idx) : 0.0;
        errors[fit.parameter_names[k]] = std::sqrt(std::max(var, 0.0));
    }
    return {{"schema_version", kSchemaVersion},
            {"dimension_m", fit.params.dimension()},
            {"coherence_time_ps", fit.params.coherence_time_ps},
            {"pairs", pairs},
            {"parameter_names", fit.parameter_names},
            {"standard_errors", errors},
            {"covariance", matrix_to_json(fit.covariance)},
            {"residual_norm", fit.residual_norm},
            {"chi2", fit.chi2},
            {"gradient_norm", fit.gradient_norm},
            {"n_iterations", fit.n_iterations},
            {"n_samples", fit.n_samples},
            {"converged", fit.converged},
            {"termination", fit.termination}};
}

FitRecord fit_from_json(const json& doc) {
    try {
        FitRecord rec;
        rec.params.coherence_time_ps = doc.at("coherence_time_ps").get<double>();
        for (const json& p : doc.at("pairs")) {
            rec.params.pairs.push_back({p.at("weight_a").get<double>(), p.at("detuning_mu_thz").get<double>(),
                                        p.at("visibility_v").get<double>(), p.at("phase_phi_deg").get<double>()});
            if (p.contains("balance_p")) rec.balances.push_back(p.at("balance_p").get<double>());
        }
        rec.converged = doc.at("converged").get<bool>();
        if (!rec.balances.empty() && rec.balances.size() != rec.params.pairs.size()) {
            throw IoError("fit JSON gives balance_p for only some pairs");
        }
        return rec;
    } catch (const json::exception& e) {
        throw IoError(std::string("malformed fit JSON: ") + e.what());
    }
}

json density_matrix_to_json(const RestrictedDensityMatrix& dm) {
    return {{"schema_version", kSchemaVersion},
            {"dimension_m", dm.dimension_m},
            {"mode", to_string(dm.mode)},
            {"basis_labels", dm.basis_labels},
            {"real", matrix_to_json(dm.entries.real())},
            {"imag", matrix_to_json(dm.entries.imag())},
            {"min_eigenvalue", dm.min_eigenvalue()}};
}

json report_to_json(const EntanglementReport& report, const ReconciliationRecord& record) {
    json rec{{"dimension_m", record.dimension_m}, {"computed_ebits", record.computed}, {"mode", to_string(record.mode)}};
    rec["published_ebits"] = record.reference ? json(*record.reference) : json(nullptr);
    rec["relative_deviation"] = record.relative_deviation ? json(*record.relative_deviation) : json(nullptr);
    return {{"schema_version", kSchemaVersion},
            {"report",
             {{"eof_lower_bound", report.eof_lower_bound},
              {"b_value", report.b_value},
              {"average_visibility", report.average_visibility},
              {"dimension_m", report.dimension_m},
              {"mode", to_string(report.mode)},
              {"assumption_note", report.assumption_note}}},
            {"reconciliation", rec}};
}

std::string dump(const json& doc) {
    check_finite(doc);
    return doc.dump(2) + "\n";
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot read " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json read_json(const std::filesystem::path& path) {
    try {
        return json::parse(read_text(path));
    } catch (const json::parse_error& e) {
        throw IoError(path.string() + " is not valid JSON: " + e.what());
    }
}

void write_text(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out << content;
    if (!out.flush()) {
        throw IoError("failed writing " + path.string());
    }
}

}  // namespace homqd::io
