#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "oracle_field.hpp"
#include "qdnuc/error.hpp"
#include "qdnuc/oracle.hpp"

namespace qdnuc {

namespace {

constexpr std::size_t kMaxGridDims = 2;

std::size_t ipow(std::size_t base, std::size_t e) {
    std::size_t r = 1;
    for (std::size_t k = 0; k < e; ++k) {
        r *= base;
    }
    return r;
}

std::array<std::size_t, kMaxGridDims> unflatten(std::size_t c, std::size_t n, std::size_t dims) {
    std::array<std::size_t, kMaxGridDims> idx{};
    for (std::size_t d = 0; d < dims; ++d) {
        idx[d] = c % n;
        c /= n;
    }
    return idx;
}

void check_grid_sites(const Lattice& lat) {
    lat.validate();
    require(lat.size() <= kMaxGridDims, "grid oracle: at most 2 sites (got " +
                                            std::to_string(lat.size()) + ")");
}

}  // namespace

double PdfGrid::cell_volume() const { return std::pow(dm(), static_cast<double>(dims)); }

double PdfGrid::mass() const {
    double s = 0.0;
    for (const double v : values) {
        s += v;
    }
    return s * cell_volume();
}

double PdfGrid::boundary_mass() const {
    double s = 0.0;
    for (std::size_t c = 0; c < values.size(); ++c) {
        const auto idx = unflatten(c, n_cells, dims);
        for (std::size_t d = 0; d < dims; ++d) {
            if (idx[d] == 0 || idx[d] + 1 == n_cells) {
                s += values[c];
                break;
            }
        }
    }
    return s * cell_volume();
}

void GridConfig::validate(std::size_t n_sites) const {
    require(m_min < m_max, "grid: m_min < m_max");
    require(n_cells >= 3, "grid: n_cells >= 3");
    require(output_every > 0.0, "grid: output_every > 0");
    require(safety > 0.0 && safety <= 1.0, "grid: 0 < safety <= 1");
    require(dt_floor > 0.0, "grid: dt_floor > 0");
    require(boundary_tol > 0.0, "grid: boundary_tol > 0");
    require(m_init.empty() || m_init.size() == n_sites, "grid: m_init needs one value per site");
    for (const double m : m_init) {
        require(m > m_min && m < m_max, "grid: m_init inside [m_min, m_max]");
    }
    if (frozen_count) {
        require(*frozen_count >= 0.0, "grid: frozen_count >= 0");
    }
}

double flatness_floor(double alpha, double tau, const ModelParams& p) {
    return 1e-3 * alpha * p.s_p * (tau + 1.0 / p.sigma);
}

FpOperator::FpOperator(const Lattice& lat, double tau, const PdfGrid& shape, const ModelParams& p,
                       std::optional<double> frozen_count)
    : dims_(shape.dims), n_(shape.n_cells), total_(shape.values.size()), dm_(shape.dm()) {
    require(lat.size() == dims_, "grid oracle: lattice size must match grid dimension");
    right_.assign(dims_, std::vector<double>(total_));
    left_.assign(dims_, std::vector<double>(total_));

    std::size_t upwind = 0;
    std::vector<double> m(dims_);
    for (std::size_t c = 0; c < total_; ++c) {
        const auto idx = unflatten(c, n_, dims_);
        for (std::size_t d = 0; d < dims_; ++d) {
            m[d] = shape.centre(idx[d]);
        }
        const auto cf = detail::count_field(lat, m, tau, p, frozen_count);
        for (std::size_t d = 0; d < dims_; ++d) {
            const double g = detail::site_diffusion(lat, d, cf);
            const double u = detail::site_trion_drift(lat, d, m[d], cf) - detail::restoring_rate(lat, m, d);
            double r = 0.5 * u;
            double l = 0.5 * u;
            if (std::abs(u) * dm_ >= 2.0 * g) {
                r = std::max(u, 0.0);
                l = std::min(u, 0.0);
                ++upwind;
            }
            right_[d][c] = r + g / dm_;
            left_[d][c] = l - g / dm_;
        }
    }
    upwind_fraction_ = static_cast<double>(upwind) / static_cast<double>(total_ * dims_);

    double worst = 0.0;
    for (std::size_t c = 0; c < total_; ++c) {
        const auto idx = unflatten(c, n_, dims_);
        double out = 0.0;
        for (std::size_t d = 0; d < dims_; ++d) {
            if (idx[d] + 1 < n_) out += right_[d][c];
            if (idx[d] > 0) out -= left_[d][c];
        }
        worst = std::max(worst, out / dm_);
    }
    max_dt_ = worst > 0.0 ? 1.0 / worst : INFINITY;
}

void FpOperator::apply(std::span<const double> f, std::span<double> out) const {
    std::fill(out.begin(), out.end(), 0.0);
    const double inv_dm = 1.0 / dm_;
    std::size_t stride = 1;
    for (std::size_t d = 0; d < dims_; ++d) {
        const auto& r = right_[d];
        const auto& l = left_[d];
        for (std::size_t c = 0; c < total_; ++c) {
            if ((c / stride) % n_ + 1 == n_) {
                continue;
            }
            const std::size_t e = c + stride;
            const double flux = (r[c] * f[c] + l[e] * f[e]) * inv_dm;
            out[c] -= flux;
            out[e] += flux;
        }
        stride *= n_;
    }
}

PdfGrid initial_grid(std::size_t dims, const GridConfig& cfg) {
    cfg.validate(dims);
    PdfGrid g;
    g.dims = dims;
    g.m_min = cfg.m_min;
    g.m_max = cfg.m_max;
    g.n_cells = cfg.n_cells;
    g.values.assign(ipow(cfg.n_cells, dims), 0.0);
    std::size_t c = 0;
    std::size_t stride = 1;
    for (std::size_t d = 0; d < dims; ++d) {
        const double m0 = cfg.m_init.empty() ? 0.0 : cfg.m_init[d];
        const auto i = static_cast<std::size_t>(std::clamp(std::floor((m0 - g.m_min) / g.dm()), 0.0,
                                                           static_cast<double>(g.n_cells - 1)));
        c += i * stride;
        stride *= g.n_cells;
    }
    g.values[c] = 1.0 / g.cell_volume();
    return g;
}

MomentReport grid_moments(const PdfGrid& g, const Lattice& lat, double tau, const ModelParams& p,
                          std::optional<double> frozen_count) {
    const double alpha = alpha_from_lattice(lat);
    const double vol = g.cell_volume();
    std::vector<double> m(g.dims);

    MomentReport r;
    r.t = g.t;
    double mass = 0.0;
    double s1 = 0.0;
    double exact = 0.0;
    double closed = 0.0;
    for (std::size_t c = 0; c < g.values.size(); ++c) {
        const double w = g.values[c] * vol;
        if (w == 0.0) continue;
        const auto idx = unflatten(c, g.n_cells, g.dims);
        for (std::size_t d = 0; d < g.dims; ++d) {
            m[d] = g.centre(idx[d]);
        }
        const auto cf = detail::count_field(lat, m, tau, p, frozen_count);
        mass += w;
        s1 += w * cf.omega;
        double site_sum = 0.0;
        for (std::size_t d = 0; d < g.dims; ++d) {
            site_sum += lat.a[d] * detail::site_trion_drift(lat, d, m[d], cf);
        }
        exact += w * site_sum;
        closed += w * alpha * (2.0 * cf.c1 + cf.omega * cf.c2);
    }
    r.mass = mass;
    r.mean_omega = s1 / mass;

    double s2 = 0.0;
    for (std::size_t c = 0; c < g.values.size(); ++c) {
        const double w = g.values[c] * vol;
        if (w == 0.0) continue;
        const auto idx = unflatten(c, g.n_cells, g.dims);
        double omega = 0.0;
        for (std::size_t d = 0; d < g.dims; ++d) {
            omega += lat.a[d] * g.centre(idx[d]);
        }
        s2 += w * (omega - r.mean_omega) * (omega - r.mean_omega);
    }
    r.var_omega = s2 / mass;
    r.trion_drift_exact = exact / mass;
    r.trion_drift_closed = closed / mass;
    r.trion_drift_meanfield = frozen_count ? 0.0 : alpha * d2_omega_C(r.mean_omega, tau, p);
    r.remainder = r.trion_drift_exact - r.trion_drift_closed;
    const double scale = std::max({std::abs(r.trion_drift_meanfield), std::abs(r.trion_drift_closed),
                                   flatness_floor(alpha, tau, p)});
    r.flatness_error = scale > 0.0 ? std::abs(r.trion_drift_closed - r.trion_drift_meanfield) / scale : 0.0;
    return r;
}

void fp_grid_evolve(PdfGrid& g, const Lattice& lat, double tau, double duration,
                    const GridConfig& cfg, const ModelParams& p, std::vector<MomentReport>* series) {
    check_grid_sites(lat);
    cfg.validate(lat.size());
    require(duration >= 0.0, "grid: duration >= 0");
    require(g.dims == lat.size(), "grid: density dimension must match lattice size");

    const FpOperator op(lat, tau, g, p, cfg.frozen_count);
    const double dt_bound = cfg.safety * op.positivity_step();
    if (dt_bound < cfg.dt_floor) {
        throw Error(ErrorCode::kCflViolation,
                    "grid: positivity step " + std::to_string(dt_bound) + " ns is below dt_floor " +
                        std::to_string(cfg.dt_floor) + " ns; refine the grid or narrow the range",
                    tau);
    }

    const std::size_t total = g.values.size();
    std::vector<double> k(total);
    std::vector<double> f1(total);
    std::vector<double> f2(total);
    auto& f = g.values;

    const auto check_edges = [&] {
        const double edge = g.boundary_mass();
        if (edge > cfg.boundary_tol * g.mass()) {
            throw Error(ErrorCode::kGridTooSmall,
                        "grid: " + std::to_string(edge) + " of the probability sits in edge cells at t = " +
                            std::to_string(g.t) + " ns; widen [m_min, m_max]",
                        tau);
        }
    };

    const double t0 = g.t;
    const double t_end = t0 + duration;
    const auto n_out = static_cast<std::size_t>(std::ceil(duration / cfg.output_every - 1e-9));
    if (series) {
        series->push_back(grid_moments(g, lat, tau, p, cfg.frozen_count));
    }
    for (std::size_t o = 1; o <= n_out; ++o) {
        const double target = std::min(t0 + static_cast<double>(o) * cfg.output_every, t_end);
        const double interval = target - g.t;
        const auto steps = static_cast<std::size_t>(std::ceil(interval / dt_bound));
        const double dt = interval / static_cast<double>(std::max<std::size_t>(steps, 1));
        for (std::size_t s = 0; s < steps; ++s) {
            op.apply(f, k);
            for (std::size_t c = 0; c < total; ++c) f1[c] = f[c] + dt * k[c];
            op.apply(f1, k);
            for (std::size_t c = 0; c < total; ++c) f2[c] = 0.75 * f[c] + 0.25 * (f1[c] + dt * k[c]);
            op.apply(f2, k);
            for (std::size_t c = 0; c < total; ++c) f[c] = (f[c] + 2.0 * (f2[c] + dt * k[c])) / 3.0;
        }
        g.t = target;
        check_edges();
        if (series) {
            series->push_back(grid_moments(g, lat, tau, p, cfg.frozen_count));
        }
    }
}

GridSolution fp_grid_solve(const Lattice& lat, double tau, double t_end, const GridConfig& cfg,
                           const ModelParams& p) {
    check_grid_sites(lat);
    require(tau >= 0.0, "grid: tau >= 0");
    require(t_end > 0.0, "grid: t_end > 0");
    GridSolution sol;
    sol.grid = initial_grid(lat.size(), cfg);
    fp_grid_evolve(sol.grid, lat, tau, t_end, cfg, p, &sol.series);
    return sol;
}

PdfGrid fp_grid_stationary(const Lattice& lat, double tau, const GridConfig& cfg, const ModelParams& p) {
    lat.validate();
    require(lat.size() == 1, "stationary grid: single site only");
    require(lat.f[0] > 0.0, "stationary grid: F > 0");
    PdfGrid g = initial_grid(1, cfg);
    const FpOperator op(lat, tau, g, p, cfg.frozen_count);

    // Zero flux through every face: r_i f_i + l_{i+1} f_{i+1} = 0. Recover
    // r and l from the operator by applying it to unit vectors.
    const std::size_t n = g.n_cells;
    std::vector<double> e(n, 0.0);
    std::vector<double> col(n);
    std::vector<double> right(n, 0.0);
    std::vector<double> left(n, 0.0);
    const double dm = g.dm();
    for (std::size_t i = 0; i < n; ++i) {
        e[i] = 1.0;
        op.apply(e, col);
        if (i + 1 < n) right[i] = col[i + 1] * dm;
        if (i > 0) left[i] = -col[i - 1] * dm;
        e[i] = 0.0;
    }

    std::vector<double> logf(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        logf[i + 1] = logf[i] + std::log(right[i]) - std::log(-left[i + 1]);
    }
    const double top = *std::max_element(logf.begin(), logf.end());
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        g.values[i] = std::exp(logf[i] - top);
        sum += g.values[i];
    }
    for (auto& v : g.values) {
        v /= sum * dm;
    }
    g.t = INFINITY;
    if (g.boundary_mass() > cfg.boundary_tol) {
        throw Error(ErrorCode::kGridTooSmall,
                    "stationary grid: edge cells hold " + std::to_string(g.boundary_mass()) +
                        " of the probability; widen [m_min, m_max]",
                    tau);
    }
    return g;
}

std::vector<OracleSweepSample> fp_grid_sweep(const Lattice& lat, std::span<const double> tau_grid,
                                             double dwell, const GridConfig& cfg, const ModelParams& p) {
    check_grid_sites(lat);
    require(!tau_grid.empty(), "grid sweep: nonempty tau grid");
    require(dwell > 0.0, "grid sweep: dwell > 0");
    PdfGrid g = initial_grid(lat.size(), cfg);
    std::vector<OracleSweepSample> out;
    out.reserve(2 * tau_grid.size());
    const auto visit = [&](double tau, bool forward) {
        try {
            fp_grid_evolve(g, lat, tau, dwell, cfg, p);
        } catch (const Error& e) {
            throw e.at_tau(tau);
        }
        const auto r = grid_moments(g, lat, tau, p, cfg.frozen_count);
        out.push_back({tau, r.mean_omega, r.var_omega, r.flatness_error, forward});
    };
    for (const double tau : tau_grid) {
        visit(tau, true);
    }
    for (auto it = tau_grid.rbegin(); it != tau_grid.rend(); ++it) {
        visit(*it, false);
    }
    return out;
}

}  // namespace qdnuc
