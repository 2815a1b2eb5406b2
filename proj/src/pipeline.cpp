#include "homqd/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <ctime>

#include <fmt/chrono.h>

#include "homqd/discretization.hpp"
#include "homqd/entanglement.hpp"
#include "homqd/errors.hpp"
#include "homqd/fringe.hpp"
#include "homqd/hom.hpp"

namespace homqd {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kClosureTolerance = 0.02;

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw IoError("cannot create output directory " + dir.string());
    }
}

std::string emit(const RunContext& ctx, CommandResult& result, const std::string& name,
                 const std::string& content) {
    io::write_text(ctx.out_dir / name, content);
    result.files.push_back(name);
    return name;
}

// Predicted comb for the scenario, or nothing when tau1 carries no comb.
std::optional<DiscreteState> predicted_state(const Scenario& s) {
    if (s.tau1_ps <= 0.0) return std::nullopt;
    return predict_bins(s.model, s.tau1_ps, s.spectrum.bin_threshold);
}

fs::path input_or(const RunContext& ctx, const std::vector<std::string>& candidates) {
    if (ctx.input) return *ctx.input;
    for (const std::string& name : candidates) {
        if (fs::exists(ctx.out_dir / name)) return ctx.out_dir / name;
    }
    throw IoError("no input given and none of the default inputs exist in " + ctx.out_dir.string());
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(now));
}

}  // namespace

CommandResult cmd_spectrum(const RunContext& ctx) {
    const Scenario& s = ctx.scenario;
    if (s.tau1_ps <= 0.0) {
        throw ConfigError("no discrete structure at zero delay");
    }
    ensure_dir(ctx.out_dir);
    CommandResult result{"spectrum", {}, json::object(), kExitOk};

    const DiscreteState predicted = predict_bins(s.model, s.tau1_ps, s.spectrum.bin_threshold);
    const FrequencyGrid grid = FrequencyGrid::for_model(s.model, s.spectrum.grid_points);
    const JointSpectrumMap map = coincidence_spectrum(s.model, s.tau1_ps, grid);
    const ExtractedBins bins = extract_bins_from_map(map, s.spectrum.bin_threshold);

    if (ctx.format == io::Format::csv) {
        emit(ctx, result, "spectrum.csv", io::map_to_csv(map));
    } else {
        emit(ctx, result, "spectrum.json", io::dump(io::map_to_json(map)));
    }
    const json bins_doc = io::bins_to_json(bins, predicted);
    emit(ctx, result, "bins.json", io::dump(bins_doc));

    std::vector<double> mus;
    for (const FrequencyBinPair& p : bins.state.pairs) mus.push_back(p.detuning_mu_thz);
    result.summary = {{"dimension_m", bins.state.dimension_m}, {"detunings_thz", mus}};
    return result;
}

CommandResult cmd_scan(const RunContext& ctx) {
    const Scenario& s = ctx.scenario;
    ensure_dir(ctx.out_dir);
    CommandResult result{"scan", {}, json::object(), kExitOk};

    const FringeScan model = fringe_scan(s.model, s.tau1_ps, s.tau2_min(), s.tau2_max(), s.scan.n_points);
    io::ScanTable table;
    table.tau2_ps = model.tau2_ps;
    table.probability_model = model.values;
    if (s.scan.counts_per_point > 0) {
        table.counts_per_point = s.scan.counts_per_point;
        table.counts = poisson_counts(model.values, s.scan.counts_per_point, s.scan.seed);
        for (double c : table.counts) table.sigma.push_back(std::sqrt(c));
    }
    if (ctx.format == io::Format::csv) {
        emit(ctx, result, "scan.csv", io::scan_to_csv(table));
    } else {
        emit(ctx, result, "scan.json", io::dump(io::scan_to_json(table)));
    }
    result.summary = {{"n_points", table.tau2_ps.size()}, {"poisson", table.has_counts()}};
    return result;
}

CommandResult cmd_fit(const RunContext& ctx) {
    const Scenario& s = ctx.scenario;
    const fs::path input = input_or(ctx, {"scan.csv", "scan.json"});
    const FringeScan scan = io::read_scan(input).to_scan();
    ensure_dir(ctx.out_dir);
    CommandResult result{"fit", {}, json::object(), kExitOk};

    const int m = s.fit.m ? *s.fit.m : detect_dimension(scan);
    FringeModelParams guess = seed_guess(scan, m);
    // Pair weights are not separable from visibilities in the fringe, so
    // they come from the predicted comb when its dimension agrees.
    std::vector<double> balances(guess.pairs.size(), 0.5);
    const std::optional<DiscreteState> predicted = predicted_state(s);
    const bool use_prediction = predicted && predicted->dimension_m == m;
    for (std::size_t j = 0; j < guess.pairs.size(); ++j) {
        if (use_prediction) {
            guess.pairs[j].weight_a = predicted->pairs[j].weight_a;
            balances[j] = predicted->pairs[j].balance_p;
        }
    }

    FitOptions options;
    options.solver = s.fit.solver;
    const FitResult fit = lm_fit(scan, guess, options);

    json doc = io::fit_to_json(fit);
    for (std::size_t j = 0; j < balances.size(); ++j) doc["pairs"][j]["balance_p"] = balances[j];
    doc["weights_source"] = use_prediction ? "predicted-comb" : "uniform";
    doc["input"] = input.filename().string();
    emit(ctx, result, "fit.json", io::dump(doc));

    std::vector<double> mus;
    for (const FringePair& p : fit.params.pairs) mus.push_back(p.detuning_mu_thz);
    result.summary = {{"dimension_m", m}, {"detunings_thz", mus}, {"converged", fit.converged},
                      {"termination", fit.termination}};
    result.exit_code = fit.converged ? kExitOk : kExitNonConvergence;
    return result;
}

CommandResult cmd_analyze(const RunContext& ctx) {
    const Scenario& s = ctx.scenario;
    const fs::path input = input_or(ctx, {"fit.json"});
    const io::FitRecord rec = io::fit_from_json(io::read_json(input));
    if (!rec.converged) {
        throw NumericError("refusing to analyze non-converged fit " + input.string());
    }
    ensure_dir(ctx.out_dir);
    CommandResult result{"analyze", {}, json::object(), kExitOk};

    std::vector<double> balances = s.analysis.balances.empty() ? rec.balances : s.analysis.balances;
    if (!balances.empty() && balances.size() != rec.params.pairs.size()) {
        throw ConfigError("scenario key 'analysis.balances' needs " + std::to_string(rec.params.pairs.size()) +
                          " entries for this fit");
    }
    const RestrictedDensityMatrix dm = build_restricted_dm(rec.params, balances, s.analysis.mode);
    const EntanglementReport report = eof_lower_bound(dm);
    const ReconciliationRecord recon = eof_paper_reconciliation(report);

    emit(ctx, result, "density_matrix.json", io::dump(io::density_matrix_to_json(dm)));
    emit(ctx, result, "report.json", io::dump(io::report_to_json(report, recon)));
    result.summary = {{"dimension_m", report.dimension_m}, {"eof_lower_bound", report.eof_lower_bound},
                      {"mode", to_string(report.mode)}};
    return result;
}

CommandResult run_pipeline(const RunContext& ctx) {
    CommandResult result{"pipeline", {}, json::object(), kExitOk};
    RunContext step = ctx;
    step.input.reset();

    const CommandResult spectrum = cmd_spectrum(step);
    const CommandResult scan = cmd_scan(step);
    step.input = ctx.out_dir / scan.files.front();
    const CommandResult fit = cmd_fit(step);
    for (const CommandResult* r : {&spectrum, &scan, &fit}) {
        result.files.insert(result.files.end(), r->files.begin(), r->files.end());
        result.summary[r->command] = r->summary;
    }
    if (fit.exit_code != kExitOk) {
        result.exit_code = fit.exit_code;
        result.summary["termination"] = fit.summary.at("termination");
        return result;
    }
    step.input = ctx.out_dir / "fit.json";
    const CommandResult analyze = cmd_analyze(step);
    result.files.insert(result.files.end(), analyze.files.begin(), analyze.files.end());
    result.summary["analyze"] = analyze.summary;

    // Closure: fitted detunings against the spectrum-extracted ones.
    const auto extracted = spectrum.summary.at("detunings_thz").get<std::vector<double>>();
    const auto fitted = fit.summary.at("detunings_thz").get<std::vector<double>>();
    json closure{{"tolerance", kClosureTolerance}};
    bool ok = extracted.size() == fitted.size();
    json deviations = json::array();
    for (std::size_t j = 0; ok && j < fitted.size(); ++j) {
        const double dev = (fitted[j] - extracted[j]) / extracted[j];
        deviations.push_back(dev);
        ok = ok && std::abs(dev) <= kClosureTolerance;
    }
    closure["relative_deviations"] = deviations;
    closure["agrees"] = ok;
    result.summary["closure"] = closure;

    json doc{{"schema_version", io::kSchemaVersion}, {"steps", result.summary}};
    emit(ctx, result, "pipeline.json", io::dump(doc));
    return result;
}

void write_manifest(const RunContext& ctx, const CommandResult& result) {
    json doc{{"schema_version", io::kSchemaVersion},
             {"tool", kToolName},
             {"version", kToolVersion},
             {"command", result.command},
             {"seed", ctx.scenario.scan.seed},
             {"timestamp_utc", utc_timestamp()},
             {"format", ctx.format == io::Format::csv ? "csv" : "json"},
             {"exit_code", result.exit_code},
             {"scenario", scenario_to_json(ctx.scenario)},
             {"outputs", {{result.command, result.files}}}};
    io::write_text(ctx.out_dir / "manifest.json", io::dump(doc));
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e)) return kExitConfig;
    if (dynamic_cast<const NumericError*>(&e)) return kExitNonConvergence;
    if (dynamic_cast<const IoError*>(&e)) return kExitIo;
    if (dynamic_cast<const std::filesystem::filesystem_error*>(&e)) return kExitIo;
    return kExitNonConvergence;
}

}  // namespace homqd
