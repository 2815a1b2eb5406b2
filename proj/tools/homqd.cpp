// homqd: HOM frequency-bin qudit simulator and analysis front end.

#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "homqd/errors.hpp"
#include "homqd/pipeline.hpp"

namespace {

struct Flags {
    std::string scenario_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::string format = "csv";
    std::string input;
};

void add_common(CLI::App* sub, Flags& f) {
    sub->add_option("--scenario", f.scenario_path, "scenario JSON (defaults when omitted)");
    sub->add_option("--out", f.out_dir, "output directory")->capture_default_str();
    sub->add_option("--seed", f.seed, "override scan.seed");
    sub->add_option("--format", f.format, "sampled-data format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
    using namespace homqd;

    CLI::App app{"Simulate and analyze HOM-interferometric frequency-bin qudits"};
    app.set_version_flag("--version", std::string(kToolName) + " " + kToolVersion);
    app.require_subcommand(1);
    Flags flags;

    CLI::App* spectrum = app.add_subcommand("spectrum", "coincidence spectrum and extracted bins");
    CLI::App* scan = app.add_subcommand("scan", "tau2 fringe scan with optional Poisson counts");
    CLI::App* fit = app.add_subcommand("fit", "fit the closed-form fringe model to a scan");
    CLI::App* analyze = app.add_subcommand("analyze", "density matrix and entanglement bound from a fit");
    CLI::App* pipeline = app.add_subcommand("pipeline", "spectrum, scan, fit and analyze in sequence");
    for (CLI::App* sub : {spectrum, scan, fit, analyze, pipeline}) add_common(sub, flags);
    fit->add_option("--input", flags.input, "scan file (default <out>/scan.csv)");
    analyze->add_option("--input", flags.input, "fit file (default <out>/fit.json)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        RunContext ctx;
        ctx.scenario = flags.scenario_path.empty() ? Scenario{} : load_scenario(flags.scenario_path);
        if (flags.seed) ctx.scenario.scan.seed = *flags.seed;
        ctx.scenario.validate();
        ctx.out_dir = flags.out_dir;
        ctx.format = io::parse_format(flags.format);
        if (!flags.input.empty()) ctx.input = flags.input;

        CommandResult result;
        if (spectrum->parsed()) result = cmd_spectrum(ctx);
        else if (scan->parsed()) result = cmd_scan(ctx);
        else if (fit->parsed()) result = cmd_fit(ctx);
        else if (analyze->parsed()) result = cmd_analyze(ctx);
        else result = run_pipeline(ctx);

        write_manifest(ctx, result);
        for (const std::string& file : result.files) {
            std::printf("%s\n", (ctx.out_dir / file).string().c_str());
        }
        if (result.exit_code == kExitNonConvergence) {
            std::fprintf(stderr, "homqd: fit did not converge (%s)\n",
                         result.summary.value("termination", std::string("unknown")).c_str());
        }
        return result.exit_code;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "homqd: %s\n", e.what());
        return exit_code_for(e);
    }
}
