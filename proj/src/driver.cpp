#include "qdnuc/driver.hpp"

#include <fstream>
#include <system_error>

#include <fmt/format.h>
#include <json.hpp>

#include "qdnuc/meanfield.hpp"
#include "qdnuc/model.hpp"
#include "qdnuc/oracle.hpp"
#include "qdnuc/sweep.hpp"
#include "qdnuc/units.hpp"

namespace qdnuc {

namespace {

namespace fs = std::filesystem;

std::string render(const Table& t, const RunConfig& cfg) {
    return cfg.output.format == OutputFormat::kCsv ? to_csv(t, cfg.output.precision)
                                                   : to_ndjson(t, cfg.output.precision);
}

std::string table_name(std::string_view stem, const RunConfig& cfg) {
    return std::string(stem) + "." + std::string(to_string(cfg.output.format));
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t k = 0; k < n; ++k) {
        v[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
    }
    return v;
}

std::map<std::string, std::string> fringe_map_files(const RunConfig& cfg) {
    const auto p = cfg.model.params();
    const double span = cfg.fringe.omega_span_sigma * p.sigma;
    const auto omegas = linspace(-span, span, cfg.fringe.n_omega);
    const auto taus = cfg.sweep.tau_grid();
    const auto map = fringe_map(omegas, taus, p);
    Table t{{"omega_rad_per_ns", "tau_ns", "count"}, {}};
    t.rows.reserve(map.values.size());
    for (std::size_t i = 0; i < omegas.size(); ++i) {
        for (std::size_t j = 0; j < taus.size(); ++j) {
            t.rows.push_back({omegas[i], taus[j], map.at(i, j)});
        }
    }
    return {{table_name("fringe_map", cfg), render(t, cfg)}};
}

std::map<std::string, std::string> sweep_files(const RunConfig& cfg) {
    const auto p = cfg.model.params();
    const auto mf = cfg.meanfield.params(p);
    const auto trace = run_sweep(cfg.sweep, p, mf);
    Table t{{"tau_ns", "omega_f_rad_per_ns", "count", "beta_per_ns", "stable", "jumped", "pass"}, {}};
    for (const auto& s : trace) {
        t.rows.push_back({s.tau, s.omega_f, s.count, s.beta_f, s.stable, s.jumped, std::string(to_string(s.pass))});
    }
    return {{table_name("sweep", cfg), render(t, cfg)}};
}

std::map<std::string, std::string> steady_files(const RunConfig& cfg) {
    const auto p = cfg.model.params();
    const auto mf = cfg.meanfield.params(p);
    Table t{{"section", "tau_ns", "omega_rad_per_ns", "stable", "residual", "slope", "branch"}, {}};
    std::vector<SteadyState> roots;
    try {
        roots = steady_states(cfg.steady.tau, p, mf);
    } catch (const Error& e) {
        throw e.at_tau(cfg.steady.tau);
    }
    for (const auto& r : roots) {
        t.rows.push_back({std::string("root"), cfg.steady.tau, r.omega_f, r.stable, r.residual, r.slope,
                          std::int64_t{-1}});
    }
    if (cfg.steady.nullcline) {
        const auto taus = cfg.sweep.tau_grid();
        const auto nc = nullcline(taus, p, mf);
        for (const auto& slice : nc.slices) {
            for (std::size_t k = 0; k < slice.roots.size(); ++k) {
                const auto& r = slice.roots[k];
                t.rows.push_back({std::string("nullcline"), slice.tau, r.omega_f, r.stable, r.residual, r.slope,
                                  std::int64_t{slice.branch[k]}});
            }
        }
    }
    return {{table_name("steady", cfg), render(t, cfg)}};
}

std::map<std::string, std::string> oracle_files(const RunConfig& cfg) {
    const auto p = cfg.model.params();
    const auto lat = cfg.lattice.build();
    auto mf = cfg.meanfield.params(p);
    if (lat.size() == 1) {
        mf = meanfield_for_single_site(lat, mf);
    }
    const auto oc = cfg.oracle.params(lat.size(), cfg.seed);
    const auto rows = compare_meanfield(lat, cfg.oracle.taus, p, mf, oc);

    Table summary{{"tau_ns", "method", "mean_omega", "var_omega", "se_mean", "se_var", "mass",
                   "trion_drift_exact", "trion_drift_closed", "trion_drift_meanfield", "remainder",
                   "flatness_error", "omega_f", "omega_f_stable", "relative_difference"},
                  {}};
    Table series{{"tau_ns", "t_ns", "mean_omega", "var_omega", "se_mean", "se_var", "mass",
                  "trion_drift_exact", "trion_drift_closed", "trion_drift_meanfield", "remainder",
                  "flatness_error"},
                 {}};
    for (const auto& row : rows) {
        const auto& o = row.oracle;
        summary.rows.push_back({row.tau, std::string(to_string(row.method)), o.mean_omega, o.var_omega, o.se_mean,
                                o.se_var, o.mass, o.trion_drift_exact, o.trion_drift_closed,
                                o.trion_drift_meanfield, o.remainder, o.flatness_error, row.omega_f,
                                row.omega_f_stable, row.relative_difference});
        for (const auto& m : row.series) {
            series.rows.push_back({row.tau, m.t, m.mean_omega, m.var_omega, m.se_mean, m.se_var, m.mass,
                                   m.trion_drift_exact, m.trion_drift_closed, m.trion_drift_meanfield,
                                   m.remainder, m.flatness_error});
        }
    }
    return {{table_name("oracle", cfg), render(summary, cfg)},
            {"oracle_series.ndjson", to_ndjson(series, cfg.output.precision)}};
}

std::map<std::string, std::string> rate_files(const RunConfig& cfg) {
    const auto h = cfg.hole.params();
    const double rate = trion_flip_rate(h);
    const auto lat = cfg.lattice.build();
    Table t{{"b0_T", "g_h", "gamma_rad_per_ns", "inv_r3_per_nm3", "flip_rate_per_ns", "flip_time_ms",
             "lattice_alpha_rad2_per_ns3"},
            {}};
    t.rows.push_back({h.b0, h.g_h, h.gamma_rad, h.inv_r3_avg, rate, 1.0 / rate * 1e-6, alpha_from_lattice(lat)});
    return {{table_name("rate", cfg), render(t, cfg)}};
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    out.close();
    if (!out) {
        throw Error(ErrorCode::kValidationError, "cannot write " + path.string());
    }
}

}  // namespace

std::vector<std::string> subcommand_names() { return {"fringe-map", "sweep", "steady", "oracle", "rate"}; }

std::map<std::string, std::string> render_subcommand(std::string_view name, const RunConfig& cfg) {
    cfg.validate();
    if (name == "fringe-map") return fringe_map_files(cfg);
    if (name == "sweep") return sweep_files(cfg);
    if (name == "steady") return steady_files(cfg);
    if (name == "oracle") return oracle_files(cfg);
    if (name == "rate") return rate_files(cfg);
    throw Error(ErrorCode::kValidationError, "unknown subcommand '" + std::string(name) + "'");
}

std::string metadata_sidecar(std::string_view name, const RunConfig& cfg) {
    std::string out = "# run metadata\n";
    out += fmt::format("subcommand = {}\n", name);
    out += fmt::format("version = {}\n", kVersion);
    out += fmt::format("compiler = {}\n", __VERSION__);
    out += fmt::format("seed = {}\n", cfg.seed);
    out += "# effective configuration\n";
    out += echo_config(cfg);
    if (name == "oracle" && cfg.lattice.n == 1) {
        const auto mf = meanfield_for_single_site(cfg.lattice.build(), cfg.meanfield.params(cfg.model.params()));
        out += fmt::format("# internal: oracle comparison uses kappa = d_bath = {} 1/ns, alpha = gamma a^2 = {} rad^2/ns^3\n",
                           mf.kappa, mf.alpha);
    }
    return out;
}

ExitCode exit_code_for(const Error& e) {
    return e.is_config_error() ? ExitCode::kConfigError : ExitCode::kNumericError;
}

std::string error_record(const Error& e, std::string_view subcommand) {
    nlohmann::ordered_json j;
    j["status"] = "error";
    j["code"] = std::string(to_string(e.code()));
    j["message"] = e.what();
    if (e.tau()) {
        j["tau_ns"] = *e.tau();
    } else {
        j["tau_ns"] = nullptr;
    }
    j["subcommand"] = std::string(subcommand);
    j["exit_code"] = static_cast<int>(exit_code_for(e));
    return j.dump();
}

RunOutcome run_subcommand(std::string_view name, const RunConfig& cfg) {
    RunOutcome outcome;
    const fs::path dir = cfg.output.dir;
    std::vector<fs::path> partial;
    std::vector<fs::path> done;
    const auto cleanup = [&] {
        std::error_code ec;
        for (const auto& f : partial) fs::remove(f, ec);
        for (const auto& f : done) fs::remove(f, ec);
    };
    try {
        auto files = render_subcommand(name, cfg);
        files.emplace(std::string(name) + ".meta", metadata_sidecar(name, cfg));
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec) {
            throw Error(ErrorCode::kValidationError, "cannot create output directory " + dir.string());
        }
        fs::remove(dir / "error.json", ec);
        for (const auto& [file, text] : files) {
            const auto tmp = dir / (file + ".partial");
            partial.push_back(tmp);
            write_text(tmp, text);
        }
        for (const auto& [file, text] : files) {
            const auto tmp = dir / (file + ".partial");
            fs::rename(tmp, dir / file);
            done.push_back(dir / file);
        }
        outcome.files = done;
        return outcome;
    } catch (const Error& e) {
        cleanup();
        outcome.code = exit_code_for(e);
        outcome.error_record = error_record(e, name);
    } catch (const std::exception& e) {
        cleanup();
        const Error wrapped(ErrorCode::kValidationError, e.what());
        outcome.code = ExitCode::kConfigError;
        outcome.error_record = error_record(wrapped, name);
    }
    std::error_code ec;
    if (fs::is_directory(dir, ec)) {
        std::ofstream(dir / "error.json", std::ios::trunc) << outcome.error_record << '\n';
    }
    return outcome;
}

}  // namespace qdnuc
