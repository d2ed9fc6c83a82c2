#include "qdnuc/config.hpp"

#include <charconv>
#include <functional>
#include <limits>
#include <map>

#include <fmt/format.h>

#include "qdnuc/error.hpp"
#include "qdnuc/units.hpp"

namespace qdnuc {

namespace {

// Thrown by value parsers; turned into a PARSE_ERROR that carries the location.
struct BadValue {
    std::string what;
};

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_double(std::string_view v) {
    double out = 0.0;
    const auto* end = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || ptr != end) {
        throw BadValue{"expected a number, got '" + std::string(v) + "'"};
    }
    return out;
}

std::uint64_t parse_u64(std::string_view v) {
    std::uint64_t out = 0;
    const auto* end = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || ptr != end) {
        throw BadValue{"expected a nonnegative integer, got '" + std::string(v) + "'"};
    }
    return out;
}

int parse_int(std::string_view v) {
    int out = 0;
    const auto* end = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || ptr != end) {
        throw BadValue{"expected an integer, got '" + std::string(v) + "'"};
    }
    return out;
}

bool parse_bool(std::string_view v) {
    if (v == "true") return true;
    if (v == "false") return false;
    throw BadValue{"expected true or false, got '" + std::string(v) + "'"};
}

std::vector<double> parse_list(std::string_view v) {
    std::vector<double> out;
    while (true) {
        const auto comma = v.find(',');
        out.push_back(parse_double(trim(v.substr(0, comma))));
        if (comma == std::string_view::npos) break;
        v.remove_prefix(comma + 1);
    }
    return out;
}

template <typename F>
auto parse_enum(std::string_view v, F from_string) {
    try {
        return from_string(v);
    } catch (const Error& e) {
        throw BadValue{e.what()};
    }
}

// Shortest text that parses back to the same double.
std::string fmt_double(double v) { return fmt::format("{}", v); }

std::string fmt_list(const std::vector<double>& v) {
    std::string s;
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (k > 0) s += ", ";
        s += fmt_double(v[k]);
    }
    return s;
}

OutputFormat output_format_from_string(std::string_view s) {
    if (s == "csv") return OutputFormat::kCsv;
    if (s == "ndjson") return OutputFormat::kNdjson;
    throw Error(ErrorCode::kValidationError, "output.format must be csv or ndjson (got '" + std::string(s) + "')");
}

struct Entry {
    std::string key;
    std::function<void(RunConfig&, std::string_view)> set;
    /// nullopt when an optional setting is absent.
    std::function<std::optional<std::string>(const RunConfig&)> get;
};

template <typename Get>
Entry number(std::string key, Get field) {
    return {std::move(key), [field](RunConfig& c, std::string_view v) { field(c) = parse_double(v); },
            [field](const RunConfig& c) -> std::optional<std::string> {
                return fmt_double(field(const_cast<RunConfig&>(c)));
            }};
}

template <typename Get>
Entry optional_number(std::string key, Get field) {
    return {std::move(key), [field](RunConfig& c, std::string_view v) { field(c) = parse_double(v); },
            [field](const RunConfig& c) -> std::optional<std::string> {
                const auto& o = field(const_cast<RunConfig&>(c));
                if (!o) return std::nullopt;
                return fmt_double(*o);
            }};
}

template <typename Get>
Entry count(std::string key, Get field) {
    return {std::move(key),
            [field](RunConfig& c, std::string_view v) {
                field(c) = static_cast<std::remove_reference_t<decltype(field(c))>>(parse_u64(v));
            },
            [field](const RunConfig& c) -> std::optional<std::string> {
                return std::to_string(field(const_cast<RunConfig&>(c)));
            }};
}

template <typename Get>
Entry flag(std::string key, Get field) {
    return {std::move(key), [field](RunConfig& c, std::string_view v) { field(c) = parse_bool(v); },
            [field](const RunConfig& c) -> std::optional<std::string> {
                return field(const_cast<RunConfig&>(c)) ? "true" : "false";
            }};
}

const std::vector<Entry>& registry() {
    static const std::vector<Entry> entries = [] {
        std::vector<Entry> e;
        e.push_back(number("model.omega0_ghz", [](RunConfig& c) -> double& { return c.model.omega0_ghz; }));
        e.push_back(number("model.T", [](RunConfig& c) -> double& { return c.model.T; }));
        e.push_back(optional_number("model.beta0", [](RunConfig& c) -> std::optional<double>& { return c.model.beta0; }));
        e.push_back(number("model.sigma_ghz", [](RunConfig& c) -> double& { return c.model.sigma_ghz; }));
        e.push_back(number("model.s_p", [](RunConfig& c) -> double& { return c.model.s_p; }));
        e.push_back(number("model.t_rep", [](RunConfig& c) -> double& { return c.model.t_rep; }));

        e.push_back(number("meanfield.kappa", [](RunConfig& c) -> double& { return c.meanfield.kappa; }));
        e.push_back(number("meanfield.ratio", [](RunConfig& c) -> double& { return c.meanfield.ratio; }));
        e.push_back({"meanfield.ratio_units",
                     [](RunConfig& c, std::string_view v) {
                         c.meanfield.ratio_units = parse_enum(v, ratio_units_from_string);
                     },
                     [](const RunConfig& c) -> std::optional<std::string> {
                         return std::string(to_string(c.meanfield.ratio_units));
                     }});
        e.push_back(optional_number("meanfield.alpha", [](RunConfig& c) -> std::optional<double>& { return c.meanfield.alpha; }));
        e.push_back(optional_number("meanfield.omega_bracket",
                                    [](RunConfig& c) -> std::optional<double>& { return c.meanfield.omega_bracket; }));
        e.push_back(number("meanfield.fd_step", [](RunConfig& c) -> double& { return c.meanfield.fd_step; }));
        e.push_back(number("meanfield.relax_tol", [](RunConfig& c) -> double& { return c.meanfield.relax_tol; }));
        e.push_back(number("meanfield.relax_t_max", [](RunConfig& c) -> double& { return c.meanfield.relax_t_max; }));

        e.push_back(number("sweep.tau_start", [](RunConfig& c) -> double& { return c.sweep.tau_start; }));
        e.push_back(number("sweep.tau_end", [](RunConfig& c) -> double& { return c.sweep.tau_end; }));
        e.push_back(number("sweep.tau_step", [](RunConfig& c) -> double& { return c.sweep.tau_step; }));
        e.push_back({"sweep.direction",
                     [](RunConfig& c, std::string_view v) {
                         c.sweep.direction = parse_enum(v, sweep_direction_from_string);
                     },
                     [](const RunConfig& c) -> std::optional<std::string> {
                         return std::string(to_string(c.sweep.direction));
                     }});
        e.push_back(number("sweep.omega_init", [](RunConfig& c) -> double& { return c.sweep.omega_init; }));
        e.push_back({"sweep.reset_omega_every",
                     [](RunConfig& c, std::string_view v) { c.sweep.reset_omega_every = parse_int(v); },
                     [](const RunConfig& c) -> std::optional<std::string> {
                         return std::to_string(c.sweep.reset_omega_every);
                     }});

        e.push_back(number("fringe.omega_span_sigma", [](RunConfig& c) -> double& { return c.fringe.omega_span_sigma; }));
        e.push_back(count("fringe.n_omega", [](RunConfig& c) -> std::size_t& { return c.fringe.n_omega; }));

        e.push_back(number("steady.tau", [](RunConfig& c) -> double& { return c.steady.tau; }));
        e.push_back(flag("steady.nullcline", [](RunConfig& c) -> bool& { return c.steady.nullcline; }));

        e.push_back(count("lattice.n", [](RunConfig& c) -> std::size_t& { return c.lattice.n; }));
        e.push_back(number("lattice.a_peak", [](RunConfig& c) -> double& { return c.lattice.a_peak; }));
        e.push_back(number("lattice.gamma_peak", [](RunConfig& c) -> double& { return c.lattice.gamma_peak; }));
        e.push_back(number("lattice.width_sites", [](RunConfig& c) -> double& { return c.lattice.width_sites; }));
        e.push_back(number("lattice.d_nn", [](RunConfig& c) -> double& { return c.lattice.d_nn; }));
        e.push_back(number("lattice.f", [](RunConfig& c) -> double& { return c.lattice.f; }));
        e.push_back(number("lattice.d_bath", [](RunConfig& c) -> double& { return c.lattice.d_bath; }));

        e.push_back({"oracle.method",
                     [](RunConfig& c, std::string_view v) {
                         c.oracle.method = parse_enum(v, oracle_method_from_string);
                     },
                     [](const RunConfig& c) -> std::optional<std::string> {
                         return std::string(to_string(c.oracle.method));
                     }});
        e.push_back(number("oracle.t_end", [](RunConfig& c) -> double& { return c.oracle.t_end; }));
        e.push_back({"oracle.taus", [](RunConfig& c, std::string_view v) { c.oracle.taus = parse_list(v); },
                     [](const RunConfig& c) -> std::optional<std::string> { return fmt_list(c.oracle.taus); }});
        e.push_back(number("oracle.m_init", [](RunConfig& c) -> double& { return c.oracle.m_init; }));
        e.push_back(number("oracle.output_every", [](RunConfig& c) -> double& { return c.oracle.output_every; }));
        e.push_back(number("oracle.grid.m_min", [](RunConfig& c) -> double& { return c.oracle.grid_m_min; }));
        e.push_back(number("oracle.grid.m_max", [](RunConfig& c) -> double& { return c.oracle.grid_m_max; }));
        e.push_back(count("oracle.grid.n_cells", [](RunConfig& c) -> std::size_t& { return c.oracle.grid_n_cells; }));
        e.push_back(number("oracle.grid.safety", [](RunConfig& c) -> double& { return c.oracle.grid_safety; }));
        e.push_back(number("oracle.grid.dt_floor", [](RunConfig& c) -> double& { return c.oracle.grid_dt_floor; }));
        e.push_back(number("oracle.grid.boundary_tol", [](RunConfig& c) -> double& { return c.oracle.grid_boundary_tol; }));
        e.push_back(count("oracle.ensemble.n_traj", [](RunConfig& c) -> std::size_t& { return c.oracle.ensemble_n_traj; }));
        e.push_back(number("oracle.ensemble.dt", [](RunConfig& c) -> double& { return c.oracle.ensemble_dt; }));

        e.push_back(number("hole.b0", [](RunConfig& c) -> double& { return c.hole.b0; }));
        e.push_back(number("hole.g_h", [](RunConfig& c) -> double& { return c.hole.g_h; }));
        e.push_back(number("hole.gamma_ghz", [](RunConfig& c) -> double& { return c.hole.gamma_ghz; }));
        e.push_back(number("hole.inv_r3", [](RunConfig& c) -> double& { return c.hole.inv_r3; }));

        e.push_back({"output.dir", [](RunConfig& c, std::string_view v) { c.output.dir = std::string(v); },
                     [](const RunConfig& c) -> std::optional<std::string> { return c.output.dir; }});
        e.push_back({"output.format",
                     [](RunConfig& c, std::string_view v) {
                         c.output.format = parse_enum(v, output_format_from_string);
                     },
                     [](const RunConfig& c) -> std::optional<std::string> {
                         return std::string(to_string(c.output.format));
                     }});
        e.push_back({"output.precision", [](RunConfig& c, std::string_view v) { c.output.precision = parse_int(v); },
                     [](const RunConfig& c) -> std::optional<std::string> {
                         return std::to_string(c.output.precision);
                     }});
        e.push_back({"seed", [](RunConfig& c, std::string_view v) { c.seed = parse_u64(v); },
                     [](const RunConfig& c) -> std::optional<std::string> { return std::to_string(c.seed); }});
        return e;
    }();
    return entries;
}

const Entry* find_entry(std::string_view key) {
    for (const auto& e : registry()) {
        if (e.key == key) return &e;
    }
    return nullptr;
}

[[noreturn]] void parse_error(std::size_t line, std::size_t column, const std::string& what) {
    throw Error(ErrorCode::kParseError, fmt::format("line {}, column {}: {}", line, column, what));
}

// Applies one assignment; `line` and `offset` locate it for error messages.
void assign(RunConfig& cfg, std::string_view text, std::size_t line, std::size_t offset) {
    const auto eq = text.find('=');
    const auto first = text.find_first_not_of(" \t");
    if (eq == std::string_view::npos) {
        parse_error(line, offset + first + 1, "expected 'key = value'");
    }
    const auto key = trim(text.substr(0, eq));
    if (key.empty()) {
        parse_error(line, offset + eq + 1, "missing key before '='");
    }
    const auto key_col = offset + first + 1;
    const Entry* entry = find_entry(key);
    if (entry == nullptr) {
        parse_error(line, key_col, "unknown key '" + std::string(key) + "'");
    }
    const auto rest = text.substr(eq + 1);
    const auto value = trim(rest);
    const auto value_pos = rest.find_first_not_of(" \t");
    const auto value_col = offset + eq + 2 + (value_pos == std::string_view::npos ? 0 : value_pos);
    if (value.empty()) {
        parse_error(line, value_col, "missing value for '" + std::string(key) + "'");
    }
    try {
        entry->set(cfg, value);
    } catch (const BadValue& bad) {
        parse_error(line, value_col, std::string(key) + ": " + bad.what);
    }
    cfg.explicit_keys.insert(std::string(key));
}

}  // namespace

std::string_view to_string(OutputFormat f) { return f == OutputFormat::kCsv ? "csv" : "ndjson"; }

ModelParams ModelInput::params() const {
    ModelParams p;
    p.omega0 = ghz_to_rad_per_ns(omega0_ghz);
    p.T = T;
    p.beta0 = beta0 ? *beta0 : 3.0 / T;
    p.sigma = ghz_to_rad_per_ns(sigma_ghz);
    p.s_p = s_p;
    p.t_rep = t_rep;
    return p;
}

MeanFieldParams MeanFieldInput::params(const ModelParams& p) const {
    MeanFieldParams mf;
    mf.kappa = kappa;
    mf.alpha = alpha ? *alpha : kappa / ratio_to_internal(ratio, ratio_units);
    mf.omega_bracket = omega_bracket ? *omega_bracket : 6.0 * p.sigma;
    mf.fd_step = fd_step;
    mf.relax_tol = relax_tol;
    mf.relax_t_max = relax_t_max;
    return mf;
}

Lattice LatticeInput::build() const {
    require(n >= 1, "lattice: n >= 1");
    if (n == 1) {
        return Lattice::single_site(a_peak, gamma_peak, f, d_bath);
    }
    return Lattice::gaussian_chain(n, a_peak, gamma_peak, width_sites, d_nn, f, d_bath);
}

OracleConfig OracleInput::params(std::size_t n_sites, std::uint64_t seed) const {
    OracleConfig c;
    c.method = method;
    c.t_end = t_end;
    c.grid.m_min = grid_m_min;
    c.grid.m_max = grid_m_max;
    c.grid.n_cells = grid_n_cells;
    c.grid.m_init.assign(n_sites, m_init);
    c.grid.output_every = output_every;
    c.grid.safety = grid_safety;
    c.grid.dt_floor = grid_dt_floor;
    c.grid.boundary_tol = grid_boundary_tol;
    c.ensemble.n_traj = ensemble_n_traj;
    c.ensemble.dt = ensemble_dt;
    c.ensemble.output_every = output_every;
    c.ensemble.seed = seed;
    c.ensemble.m_init.assign(n_sites, m_init);
    return c;
}

HoleNuclearParams HoleInput::params() const {
    HoleNuclearParams h;
    h.b0 = b0;
    h.g_h = g_h;
    h.gamma_rad = ghz_to_rad_per_ns(gamma_ghz);
    h.inv_r3_avg = inv_r3;
    return h;
}

void RunConfig::validate() const {
    const auto p = model.params();
    p.validate();

    require(!(meanfield.alpha && explicit_keys.count("meanfield.ratio") != 0),
            "meanfield: give either alpha or ratio, not both");
    if (!meanfield.alpha) {
        require(meanfield.ratio > 0.0, "meanfield: ratio > 0");
    }
    sweep.validate();
    meanfield.params(p).validate(p, sweep.tau_end);

    require(fringe.omega_span_sigma > 0.0, "fringe: omega_span_sigma > 0");
    require(fringe.n_omega >= 2, "fringe: n_omega >= 2");
    require(steady.tau >= 0.0, "steady: tau >= 0");

    require(lattice.n >= 1 && lattice.n <= 8, "lattice: 1 <= n <= 8");
    const auto lat = lattice.build();
    lat.validate();

    require(!oracle.taus.empty(), "oracle: taus nonempty");
    for (const double tau : oracle.taus) {
        require(tau >= 0.0, "oracle: taus >= 0");
    }
    require(oracle.t_end > 0.0, "oracle: t_end > 0");
    const auto oc = oracle.params(lat.size(), seed);
    if (oracle.method == OracleMethod::kGrid) {
        require(lat.size() <= 2, "oracle: grid method needs lattice.n <= 2");
        oc.grid.validate(lat.size());
    } else {
        oc.ensemble.validate(lat.size());
    }

    hole.params().validate();

    require(!output.dir.empty(), "output: dir nonempty");
    require(output.precision >= 1 && output.precision <= 17, "output: 1 <= precision <= 17");
}

bool RunConfig::same_settings(const RunConfig& o) const {
    return model == o.model && meanfield == o.meanfield && sweep == o.sweep && fringe == o.fringe &&
           steady == o.steady && lattice == o.lattice && oracle == o.oracle && hole == o.hole &&
           output == o.output && seed == o.seed;
}

RunConfig parse_config(std::string_view text) {
    RunConfig cfg;
    std::size_t line_no = 0;
    while (!text.empty() || line_no == 0) {
        ++line_no;
        const auto nl = text.find('\n');
        auto line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        const auto hash = line.find('#');
        if (hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        if (!trim(line).empty()) {
            const std::string_view key = trim(line.substr(0, line.find('=')));
            if (cfg.explicit_keys.count(std::string(key)) != 0) {
                parse_error(line_no, line.find_first_not_of(" \t") + 1,
                            "key '" + std::string(key) + "' given twice");
            }
            assign(cfg, line, line_no, 0);
        }
        if (text.empty()) break;
    }
    cfg.validate();
    return cfg;
}

void apply_override(RunConfig& cfg, std::string_view assignment) {
    apply_overrides(cfg, std::span(&assignment, 1));
}

void apply_overrides(RunConfig& cfg, std::span<const std::string_view> assignments) {
    auto copy = cfg;
    for (const auto a : assignments) {
        try {
            assign(copy, a, 1, 0);
        } catch (const Error& e) {
            throw Error(e.code(), "--set '" + std::string(a) + "': " + e.what());
        }
    }
    copy.validate();
    cfg = std::move(copy);
}

std::string serialize_config(const RunConfig& cfg) {
    std::string out;
    for (const auto& e : registry()) {
        if (const auto v = e.get(cfg)) {
            out += e.key + " = " + *v + "\n";
        }
    }
    return out;
}

std::string echo_config(const RunConfig& cfg) {
    const auto p = cfg.model.params();
    const auto mf = cfg.meanfield.params(p);
    std::string out;
    for (const auto& e : registry()) {
        auto v = e.get(cfg);
        std::string note;
        std::string lead;
        if (!v) {
            if (e.key == "model.beta0") v = fmt_double(p.beta0);
            if (e.key == "meanfield.alpha") v = fmt_double(mf.alpha);
            if (e.key == "meanfield.omega_bracket") v = fmt_double(mf.omega_bracket);
            // Commented out so the echo parses back to the same configuration.
            lead = "# ";
            note = "  # derived";
        } else if (cfg.meanfield.alpha && e.key.starts_with("meanfield.ratio")) {
            lead = "# ";
            note = "  # unused, alpha given";
        } else if (cfg.explicit_keys.count(e.key) == 0) {
            note = "  # default";
        }
        out += lead + e.key + " = " + *v + note + "\n";
    }
    out += fmt::format("# internal: omega0 = {} rad/ns, sigma = {} rad/ns, beta0 = {} 1/ns\n",
                       fmt_double(p.omega0), fmt_double(p.sigma), fmt_double(p.beta0));
    out += fmt::format("# internal: kappa = {} 1/ns, alpha = {} rad^2/ns^3, kappa/alpha = {} ns^2/rad^2\n",
                       fmt_double(mf.kappa), fmt_double(mf.alpha),
                       mf.alpha > 0.0 ? fmt_double(mf.kappa / mf.alpha) : std::string("inf"));
    return out;
}

std::vector<std::string> config_keys() {
    std::vector<std::string> keys;
    for (const auto& e : registry()) {
        keys.push_back(e.key);
    }
    return keys;
}

}  // namespace qdnuc
