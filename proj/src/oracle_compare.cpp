#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "qdnuc/error.hpp"
#include "qdnuc/oracle.hpp"

namespace qdnuc {

std::string_view to_string(OracleMethod m) { return m == OracleMethod::kGrid ? "grid" : "ensemble"; }

OracleMethod oracle_method_from_string(std::string_view s) {
    if (s == "grid") return OracleMethod::kGrid;
    if (s == "ensemble") return OracleMethod::kEnsemble;
    throw Error(ErrorCode::kValidationError,
                "oracle.method must be grid or ensemble (got '" + std::string(s) + "')");
}

MeanFieldParams meanfield_for_single_site(const Lattice& lat, const MeanFieldParams& base) {
    lat.validate();
    require(lat.size() == 1 && lat.on_boundary[0] != 0, "single-site mean field: one boundary site");
    MeanFieldParams mf = base;
    mf.kappa = lat.d_bath;
    mf.alpha = alpha_from_lattice(lat);
    return mf;
}

std::vector<CompareRow> compare_meanfield(const Lattice& lat, std::span<const double> tau_grid,
                                          const ModelParams& p, const MeanFieldParams& mf,
                                          const OracleConfig& cfg) {
    lat.validate();
    require(cfg.t_end > 0.0, "oracle: t_end > 0");
    require(cfg.method == OracleMethod::kEnsemble || lat.size() <= 2, "oracle: grid method needs n <= 2");
    require(lat.size() <= 8, "oracle: at most 8 sites");

    std::vector<CompareRow> rows;
    rows.reserve(tau_grid.size());
    for (const double tau : tau_grid) {
        CompareRow row;
        row.tau = tau;
        row.method = cfg.method;
        try {
            if (cfg.method == OracleMethod::kGrid) {
                row.series = fp_grid_solve(lat, tau, cfg.t_end, cfg.grid, p).series;
            } else {
                row.series = langevin_ensemble(lat, tau, cfg.t_end, cfg.ensemble, p);
            }
            row.oracle = row.series.back();
            const double seed = std::clamp(row.oracle.mean_omega, -mf.omega_bracket, mf.omega_bracket);
            const auto st = relax_to_steady(seed, tau, p, mf);
            row.omega_f = st.omega_f;
            row.omega_f_stable = st.stable;
        } catch (const Error& e) {
            throw e.at_tau(tau);
        }
        const double diff = std::abs(row.oracle.mean_omega - row.omega_f);
        row.relative_difference = row.omega_f != 0.0 ? diff / std::abs(row.omega_f)
                                  : diff == 0.0     ? 0.0
                                                    : std::numeric_limits<double>::infinity();
        rows.push_back(row);
    }
    return rows;
}

}  // namespace qdnuc
