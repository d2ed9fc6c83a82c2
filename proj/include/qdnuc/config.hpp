#pragma once

// Run configuration: a flat `key = value` document with `#` comments.
// Values are kept in the units they are written in (GHz for ordinary
// frequencies) so that serialize/parse round-trips exactly; the *_params()
// accessors convert to the internal rad/ns convention.

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qdnuc/lattice.hpp"
#include "qdnuc/meanfield.hpp"
#include "qdnuc/model.hpp"
#include "qdnuc/oracle.hpp"
#include "qdnuc/sweep.hpp"

namespace qdnuc {

struct ModelInput {
    double omega0_ghz = 10.0;
    double T = 26.0;
    std::optional<double> beta0;  ///< 3 / T when absent
    double sigma_ghz = 1.6;
    double s_p = 0.5;
    double t_rep = 143.0;

    [[nodiscard]] ModelParams params() const;
    bool operator==(const ModelInput&) const = default;
};

struct MeanFieldInput {
    double kappa = 1.0;
    double ratio = 1e4;  ///< kappa / alpha in ratio_units
    RatioUnits ratio_units = RatioUnits::kPs2;
    std::optional<double> alpha;          ///< overrides ratio when given
    std::optional<double> omega_bracket;  ///< 6 sigma when absent [rad/ns]
    double fd_step = 1e-3;
    double relax_tol = 1e-7;
    double relax_t_max = 1e5;

    [[nodiscard]] MeanFieldParams params(const ModelParams& p) const;
    bool operator==(const MeanFieldInput&) const = default;
};

struct FringeInput {
    double omega_span_sigma = 4.0;  ///< omega axis covers +-span * sigma
    std::size_t n_omega = 201;
    bool operator==(const FringeInput&) const = default;
};

struct SteadyInput {
    double tau = 0.5;        ///< delay of the root listing [ns]
    bool nullcline = true;   ///< append nullcline rows over the sweep grid
    bool operator==(const SteadyInput&) const = default;
};

/// Lattice description: n = 1 is a single boundary site with weight a_peak,
/// n > 1 a Gaussian chain (see Lattice::gaussian_chain).
struct LatticeInput {
    std::size_t n = 1;
    double a_peak = 1.0;
    double gamma_peak = 0.25;
    double width_sites = 2.0;
    double d_nn = 0.5;
    double f = 0.005;
    double d_bath = 1.0;

    [[nodiscard]] Lattice build() const;
    bool operator==(const LatticeInput&) const = default;
};

struct OracleInput {
    OracleMethod method = OracleMethod::kGrid;
    double t_end = 20.0;
    std::vector<double> taus{0.4125};
    double m_init = 0.0;  ///< every site starts here
    double grid_m_min = -4.0;
    double grid_m_max = 4.0;
    std::size_t grid_n_cells = 801;
    double grid_safety = 0.9;
    double grid_dt_floor = 1e-9;
    double grid_boundary_tol = 1e-6;
    std::size_t ensemble_n_traj = 10000;
    double ensemble_dt = 1e-3;
    double output_every = 0.5;

    [[nodiscard]] OracleConfig params(std::size_t n_sites, std::uint64_t seed) const;
    bool operator==(const OracleInput&) const = default;
};

struct HoleInput {
    double b0 = 4.0;
    double g_h = 1.0;
    double gamma_ghz = 0.1;
    double inv_r3 = 0.65;

    [[nodiscard]] HoleNuclearParams params() const;
    bool operator==(const HoleInput&) const = default;
};

enum class OutputFormat { kCsv, kNdjson };

struct OutputInput {
    std::string dir = "out";
    OutputFormat format = OutputFormat::kCsv;
    int precision = 12;
    bool operator==(const OutputInput&) const = default;
};

struct RunConfig {
    ModelInput model;
    MeanFieldInput meanfield;
    SweepSchedule sweep;
    FringeInput fringe;
    SteadyInput steady;
    LatticeInput lattice;
    OracleInput oracle;
    HoleInput hole;
    OutputInput output;
    std::uint64_t seed = 1;

    /// Keys that were written explicitly; every other key holds its default.
    std::set<std::string> explicit_keys;

    /// Checks every module invariant; throws VALIDATION_ERROR.
    void validate() const;

    /// Equality of the settings, ignoring explicit_keys.
    [[nodiscard]] bool same_settings(const RunConfig& other) const;
};

/// Parses and validates a configuration document. Throws PARSE_ERROR with
/// line and column for malformed lines, unknown or repeated keys and bad
/// values, and VALIDATION_ERROR for violated invariants.
[[nodiscard]] RunConfig parse_config(std::string_view text);

/// Applies one `key=value` override (as given to --set) to a parsed config
/// and revalidates.
void apply_override(RunConfig& cfg, std::string_view assignment);

/// Applies several overrides in order and validates once at the end, so
/// that related keys may be changed together.
void apply_overrides(RunConfig& cfg, std::span<const std::string_view> assignments);

/// Every key with its value, one `key = value` line each, in a fixed order.
/// Doubles are written in the shortest form that parses back
/// to the same settings. Derived values (beta0, alpha, omega_bracket) are
/// written only when set explicitly.
[[nodiscard]] std::string serialize_config(const RunConfig& cfg);

/// Like serialize_config but lists every key and marks defaulted ones with
/// `# default`. Derived values appear as commented-out `# key = value  # derived`
/// lines, followed by the internal parameters, so the echo parses back.
[[nodiscard]] std::string echo_config(const RunConfig& cfg);

/// All recognised keys in serialization order.
[[nodiscard]] std::vector<std::string> config_keys();

[[nodiscard]] std::string_view to_string(OutputFormat f);

}  // namespace qdnuc
