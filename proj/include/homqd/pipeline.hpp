#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "homqd/io.hpp"
#include "homqd/scenario.hpp"

namespace homqd {

inline constexpr const char* kToolName = "homqd";
inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 2,
    kExitNonConvergence = 3,
    kExitIo = 4,
};

struct RunContext {
    Scenario scenario;
    std::filesystem::path out_dir = ".";
    io::Format format = io::Format::csv;
    std::optional<std::filesystem::path> input;  // scan file for fit, fit file for analyze
};

// What a command wrote and its outcome. Numeric summaries go to the result
// files; the manifest adds provenance and a timestamp.
struct CommandResult {
    std::string command;
    std::vector<std::string> files;
    nlohmann::json summary;
    int exit_code = kExitOk;
};

CommandResult cmd_spectrum(const RunContext& ctx);
CommandResult cmd_scan(const RunContext& ctx);
// Writes fit.json even when the solver does not converge; exit code 3 then.
CommandResult cmd_fit(const RunContext& ctx);
// Refuses non-converged fits with NumericError.
CommandResult cmd_analyze(const RunContext& ctx);
// spectrum -> scan -> fit -> analyze in one output directory, plus a
// closure record comparing fitted and spectrum-extracted detunings.
CommandResult run_pipeline(const RunContext& ctx);

// manifest.json: tool, version, seed, UTC timestamp, scenario echo, files.
void write_manifest(const RunContext& ctx, const CommandResult& result);

// Maps a caught exception to the documented exit code.
int exit_code_for(const std::exception& e);

}  // namespace homqd
