#pragma once

// Experiment drivers behind the command-line tool. Each subcommand turns a
// RunConfig into one or more tables, writes them under output.dir together
// with a `<subcommand>.meta` sidecar, and reports failures as a one-line
// JSON error record.
//
//   fringe-map  fringe_map.csv   omega_rad_per_ns, tau_ns, count (tau fastest)
//   sweep       sweep.csv        tau_ns, omega_f_rad_per_ns, count, beta_per_ns, stable, jumped, pass
//   steady      steady.csv       section (root | nullcline), tau_ns, omega_rad_per_ns, stable,
//                                residual, slope, branch
//   oracle      oracle.csv       per-delay oracle moments beside the mean-field steady state
//               oracle_series.ndjson   moment time series, one object per (tau, t)
//   rate        rate.csv         trion flip-rate estimate
//
// With output.format = ndjson the .csv tables are written as .ndjson instead.

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "qdnuc/config.hpp"
#include "qdnuc/error.hpp"
#include "qdnuc/table.hpp"

namespace qdnuc {

inline constexpr std::string_view kVersion = "1.0.0";

enum class ExitCode : int { kOk = 0, kConfigError = 2, kNumericError = 3 };

[[nodiscard]] std::vector<std::string> subcommand_names();

/// Tables a subcommand produces, keyed by file name. Throws Error.
[[nodiscard]] std::map<std::string, std::string> render_subcommand(std::string_view name,
                                                                   const RunConfig& cfg);

/// Key/value sidecar: subcommand, version, seed, then echo_config.
[[nodiscard]] std::string metadata_sidecar(std::string_view name, const RunConfig& cfg);

struct RunOutcome {
    ExitCode code = ExitCode::kOk;
    std::vector<std::filesystem::path> files;
    std::string error_record;  ///< empty on success
};

/// Renders and writes the outputs. Files are written under temporary names
/// and renamed once all of them exist; on failure nothing from this run is
/// left behind except `error.json`.
[[nodiscard]] RunOutcome run_subcommand(std::string_view name, const RunConfig& cfg);

[[nodiscard]] ExitCode exit_code_for(const Error& e);

/// {"status":"error","code":...,"message":...,"tau_ns":...,"subcommand":...,"exit_code":...}
[[nodiscard]] std::string error_record(const Error& e, std::string_view subcommand);

}  // namespace qdnuc
