#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include <tbb/blocked_range.h>
#include <tbb/parallel_for.h>

#include "oracle_field.hpp"
#include "qdnuc/error.hpp"
#include "qdnuc/oracle.hpp"

namespace qdnuc {

namespace {

// Per-trajectory values kept at each output time.
struct Snapshot {
    double omega = 0.0;
    double exact = 0.0;
    double closed = 0.0;
};

std::mt19937_64 trajectory_engine(std::uint64_t seed, std::uint64_t k) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
    return std::mt19937_64(seq);
}

Snapshot snapshot(const Lattice& lat, std::span<const double> m, double alpha, double tau,
                  const ModelParams& p, std::optional<double> frozen) {
    const auto cf = detail::count_field(lat, m, tau, p, frozen);
    Snapshot s;
    s.omega = cf.omega;
    for (std::size_t j = 0; j < lat.size(); ++j) {
        s.exact += lat.a[j] * detail::site_trion_drift(lat, j, m[j], cf);
    }
    s.closed = alpha * (2.0 * cf.c1 + cf.omega * cf.c2);
    return s;
}

}  // namespace

void EnsembleConfig::validate(std::size_t n_sites) const {
    require(n_traj >= 100, "ensemble: n_traj >= 100");
    require(dt > 0.0, "ensemble: dt > 0");
    require(output_every >= dt, "ensemble: output_every >= dt");
    const double ratio = output_every / dt;
    require(std::abs(ratio - std::round(ratio)) <= 1e-9 * ratio,
            "ensemble: output_every must be a whole number of dt steps");
    require(m_init.empty() || m_init.size() == n_sites, "ensemble: m_init needs one value per site");
    if (frozen_count) {
        require(*frozen_count >= 0.0, "ensemble: frozen_count >= 0");
    }
}

std::vector<MomentReport> langevin_ensemble(const Lattice& lat, double tau, double t_end,
                                            const EnsembleConfig& cfg, const ModelParams& p) {
    lat.validate();
    cfg.validate(lat.size());
    require(tau >= 0.0, "ensemble: tau >= 0");
    require(t_end > 0.0, "ensemble: t_end > 0");

    const std::size_t n = lat.size();
    const auto per_output = static_cast<std::size_t>(std::llround(cfg.output_every / cfg.dt));
    const auto n_out = static_cast<std::size_t>(std::llround(t_end / cfg.output_every));
    require(n_out >= 1 && std::abs(static_cast<double>(n_out) * cfg.output_every - t_end) <= 1e-9 * t_end,
            "ensemble: t_end must be a whole number of output intervals");
    const double alpha = alpha_from_lattice(lat);
    const double sqrt_dt = std::sqrt(cfg.dt);

    // snaps[o * n_traj + k]: trajectory k at output o.
    std::vector<Snapshot> snaps((n_out + 1) * cfg.n_traj);
    std::vector<unsigned char> diverged(cfg.n_traj, 0);

    tbb::parallel_for(tbb::blocked_range<std::size_t>(0, cfg.n_traj), [&](const auto& range) {
        std::vector<double> m(n);
        std::vector<double> step(n);
        for (std::size_t k = range.begin(); k != range.end(); ++k) {
            auto engine = trajectory_engine(cfg.seed, k);
            std::normal_distribution<double> normal;
            for (std::size_t j = 0; j < n; ++j) {
                m[j] = cfg.m_init.empty() ? 0.0 : cfg.m_init[j];
            }
            snaps[k] = snapshot(lat, m, alpha, tau, p, cfg.frozen_count);
            for (std::size_t o = 1; o <= n_out; ++o) {
                for (std::size_t s = 0; s < per_output; ++s) {
                    const auto cf = detail::count_field(lat, m, tau, p, cfg.frozen_count);
                    for (std::size_t j = 0; j < n; ++j) {
                        const double drift =
                            detail::site_trion_drift(lat, j, m[j], cf) - detail::restoring_rate(lat, m, j);
                        const double g = detail::site_diffusion(lat, j, cf);
                        step[j] = drift * cfg.dt + std::sqrt(2.0 * g) * sqrt_dt * normal(engine);
                    }
                    for (std::size_t j = 0; j < n; ++j) {
                        m[j] += step[j];
                    }
                }
                for (std::size_t j = 0; j < n; ++j) {
                    if (!std::isfinite(m[j])) diverged[k] = 1;
                }
                snaps[o * cfg.n_traj + k] = snapshot(lat, m, alpha, tau, p, cfg.frozen_count);
            }
        }
    });

    for (std::size_t k = 0; k < cfg.n_traj; ++k) {
        if (diverged[k] != 0) {
            throw Error(ErrorCode::kCflViolation,
                        "ensemble: trajectory " + std::to_string(k) + " diverged; reduce dt", tau);
        }
    }

    const double count = static_cast<double>(cfg.n_traj);
    std::vector<MomentReport> series;
    series.reserve(n_out + 1);
    for (std::size_t o = 0; o <= n_out; ++o) {
        const Snapshot* row = snaps.data() + o * cfg.n_traj;
        // Sums about the first trajectory, so that identical trajectories give
        // their common value and zero variance exactly.
        const double shift = row[0].omega;
        double s1 = 0.0;
        double exact = 0.0;
        double closed = 0.0;
        for (std::size_t k = 0; k < cfg.n_traj; ++k) {
            s1 += row[k].omega - shift;
            exact += row[k].exact;
            closed += row[k].closed;
        }
        MomentReport r;
        r.t = static_cast<double>(o) * cfg.output_every;
        const double mean_shifted = s1 / count;
        r.mean_omega = shift + mean_shifted;
        double m2 = 0.0;
        double m4 = 0.0;
        for (std::size_t k = 0; k < cfg.n_traj; ++k) {
            const double d = (row[k].omega - shift) - mean_shifted;
            m2 += d * d;
            m4 += d * d * d * d;
        }
        m2 /= count;
        m4 /= count;
        r.var_omega = m2 * count / (count - 1.0);
        r.se_mean = std::sqrt(r.var_omega / count);
        r.se_var = std::sqrt(std::max(m4 - m2 * m2, 0.0) / count);
        r.trion_drift_exact = exact / count;
        r.trion_drift_closed = closed / count;
        r.trion_drift_meanfield = cfg.frozen_count ? 0.0 : alpha * d2_omega_C(r.mean_omega, tau, p);
        r.remainder = r.trion_drift_exact - r.trion_drift_closed;
        const double scale = std::max({std::abs(r.trion_drift_meanfield), std::abs(r.trion_drift_closed),
                                       flatness_floor(alpha, tau, p)});
        r.flatness_error = scale > 0.0 ? std::abs(r.trion_drift_closed - r.trion_drift_meanfield) / scale : 0.0;
        series.push_back(r);
    }
    return series;
}

}  // namespace qdnuc
