#pragma once

// Small-N oracles for the nuclear magnetization density: a finite-volume
// Fokker-Planck solver on a grid (one or two sites), an Euler-Maruyama
// trajectory ensemble (any small n), and the moment bookkeeping that tests
// the reduction to the mean-field drift.
//
// Site j carries magnetization m_j and the Overhauser shift is
// Omega = sum_j A_j m_j. The trion walk enters with diffusion coefficient
// G_j = F_j + Gamma_j C(Omega, tau). The density obeys
//
//   df/dt = sum_j d_j [ (k_j(m) - V_j(m)) f ] + d_j^2 [ G_j f ],
//   V_j = d^2/dm_j^2 [ m_j G_j ] = Gamma_j A_j (2 C' + A_j m_j C''),
//
// where k_j(m) = sum_k D_jk (m_j - m_k) + d_bath m_j [boundary site]. This
// conserves probability and gives every site the mean drift
// Gamma_j <d^2/dm_j^2 [m_j C]> of the coefficient-outside form G_j f''.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "qdnuc/lattice.hpp"
#include "qdnuc/meanfield.hpp"
#include "qdnuc/model.hpp"

namespace qdnuc {

/// Density on a uniform grid shared by every site. Values are ordered with
/// site 0 fastest: index = i_0 + n_cells * i_1.
struct PdfGrid {
    std::size_t dims = 1;
    double m_min = 0.0;
    double m_max = 0.0;
    std::size_t n_cells = 0;  ///< per site
    std::vector<double> values;
    double t = 0.0;  ///< [ns]

    [[nodiscard]] double dm() const { return (m_max - m_min) / static_cast<double>(n_cells); }
    [[nodiscard]] double centre(std::size_t i) const {
        return m_min + (static_cast<double>(i) + 0.5) * dm();
    }
    [[nodiscard]] double cell_volume() const;
    [[nodiscard]] double mass() const;
    /// Probability held by cells that touch the edge of the grid.
    [[nodiscard]] double boundary_mass() const;
};

struct GridConfig {
    double m_min = -6.0;
    double m_max = 6.0;
    std::size_t n_cells = 601;
    std::vector<double> m_init;    ///< initial point mass per site; empty means all zero
    double output_every = 0.5;     ///< moment report spacing [ns]
    double safety = 0.9;           ///< fraction of the positivity step bound
    double dt_floor = 1e-9;        ///< CFL_VIOLATION below this step [ns]
    double boundary_tol = 1e-6;    ///< GRID_TOO_SMALL above this edge mass
    std::optional<double> frozen_count;  ///< replace C(Omega, tau) by a constant

    void validate(std::size_t n_sites) const;
};

struct MomentReport {
    double t = 0.0;           ///< [ns]
    double mean_omega = 0.0;  ///< <Omega> [rad/ns]
    double var_omega = 0.0;   ///< [rad^2/ns^2]
    double se_mean = 0.0;     ///< standard error, 0 for the grid
    double se_var = 0.0;
    double mass = 1.0;
    /// sum_j A_j Gamma_j <d^2/dm_j^2 [m_j C]> [rad/ns^2]
    double trion_drift_exact = 0.0;
    /// alpha <d^2/dOmega^2 [Omega C]>, the closed form after averaging
    double trion_drift_closed = 0.0;
    /// alpha d^2/dOmega^2 [Omega C] evaluated at <Omega>
    double trion_drift_meanfield = 0.0;
    /// trion_drift_exact - trion_drift_closed = sum_j Gamma_j A_j^2 <(A_j m_j - Omega) C''>
    double remainder = 0.0;
    /// |closed - meanfield| / max(|meanfield|, |closed|, flatness_floor)
    double flatness_error = 0.0;
};

/// Scale below which trion drifts count as zero in flatness_error:
/// 1e-3 alpha s_p (tau + 1/sigma).
[[nodiscard]] double flatness_floor(double alpha, double tau, const ModelParams& p);

/// The discretized right-hand side at one delay. Each cell hands its
/// advective flux u f to its two faces half and half when the cell Peclet
/// number |u| dm / (2 G) is below one, and to the downwind face otherwise.
/// Either way sum_c m_c (L f)_c = sum_c u_c f_c exactly away from the edges.
class FpOperator {
public:
    FpOperator(const Lattice& lat, double tau, const PdfGrid& shape, const ModelParams& p,
               std::optional<double> frozen_count = std::nullopt);

    /// out = L f.
    void apply(std::span<const double> f, std::span<double> out) const;

    /// Largest forward-Euler step that keeps every cell nonnegative [ns].
    [[nodiscard]] double positivity_step() const { return max_dt_; }

    /// Fraction of (cell, site) pairs that fell back to upwinding.
    [[nodiscard]] double upwind_fraction() const { return upwind_fraction_; }

private:
    std::size_t dims_;
    std::size_t n_;
    std::size_t total_;
    double dm_;
    // Face flux between c and c + stride_d: right_[d][c] f_c + left_[d][c + stride_d] f_{c + stride_d}.
    std::vector<std::vector<double>> right_;
    std::vector<std::vector<double>> left_;
    double max_dt_ = 0.0;
    double upwind_fraction_ = 0.0;
};

/// Grid of the configured shape holding a point mass at cfg.m_init.
[[nodiscard]] PdfGrid initial_grid(std::size_t dims, const GridConfig& cfg);

/// Moments of a grid density at one delay.
[[nodiscard]] MomentReport grid_moments(const PdfGrid& g, const Lattice& lat, double tau,
                                        const ModelParams& p,
                                        std::optional<double> frozen_count = std::nullopt);

struct GridSolution {
    PdfGrid grid;
    std::vector<MomentReport> series;  ///< t = 0, output_every, ..., t_end
};

/// Evolves the density from cfg.m_init for t_end ns with SSP-RK3 steps at
/// the positivity bound. One or two sites.
/// Throws GRID_TOO_SMALL when edge mass exceeds cfg.boundary_tol at an
/// output time and CFL_VIOLATION when the step bound drops below dt_floor.
[[nodiscard]] GridSolution fp_grid_solve(const Lattice& lat, double tau, double t_end,
                                         const GridConfig& cfg, const ModelParams& p);

/// Continues an existing density for `duration` ns at delay tau.
void fp_grid_evolve(PdfGrid& g, const Lattice& lat, double tau, double duration,
                    const GridConfig& cfg, const ModelParams& p,
                    std::vector<MomentReport>* series = nullptr);

/// Zero-flux stationary density of the discrete single-site operator, found
/// by the two-term recursion between neighbouring cells. Requires F > 0.
[[nodiscard]] PdfGrid fp_grid_stationary(const Lattice& lat, double tau, const GridConfig& cfg,
                                         const ModelParams& p);

struct EnsembleConfig {
    std::size_t n_traj = 10000;
    double dt = 1e-3;           ///< [ns]
    double output_every = 0.5;  ///< must be a whole number of steps [ns]
    std::uint64_t seed = 1;
    std::vector<double> m_init;  ///< empty means all zero
    std::optional<double> frozen_count;

    void validate(std::size_t n_sites) const;
};

/// Euler-Maruyama ensemble of the Ito process
///   dm_j = (V_j - k_j(m)) dt + sqrt(2 G_j) dW_j,
/// whose forward equation is the one solved by the grid. Trajectory k draws
/// from its own generator seeded with (seed, k), so the moments do not depend
/// on how trajectories are scheduled across threads.
[[nodiscard]] std::vector<MomentReport> langevin_ensemble(const Lattice& lat, double tau,
                                                          double t_end, const EnsembleConfig& cfg,
                                                          const ModelParams& p);

enum class OracleMethod { kGrid, kEnsemble };

[[nodiscard]] std::string_view to_string(OracleMethod m);
[[nodiscard]] OracleMethod oracle_method_from_string(std::string_view s);

struct OracleConfig {
    OracleMethod method = OracleMethod::kGrid;
    double t_end = 20.0;  ///< [ns]
    GridConfig grid;
    EnsembleConfig ensemble;
};

struct CompareRow {
    double tau = 0.0;
    OracleMethod method = OracleMethod::kGrid;
    MomentReport oracle;       ///< moments at t_end
    std::vector<MomentReport> series;
    double omega_f = 0.0;      ///< mean-field steady state relaxed from the oracle mean
    bool omega_f_stable = false;
    double relative_difference = 0.0;  ///< |<Omega> - omega_f| / |omega_f|
};

/// Runs the oracle at each delay and sets it beside the mean-field steady
/// state reached from the oracle's final mean.
[[nodiscard]] std::vector<CompareRow> compare_meanfield(const Lattice& lat,
                                                        std::span<const double> tau_grid,
                                                        const ModelParams& p,
                                                        const MeanFieldParams& mf,
                                                        const OracleConfig& cfg);

/// kappa = d_bath and alpha = Gamma A^2 for a single boundary site, other
/// solver settings from `base`.
[[nodiscard]] MeanFieldParams meanfield_for_single_site(const Lattice& lat,
                                                        const MeanFieldParams& base);

struct OracleSweepSample {
    double tau = 0.0;
    double mean_omega = 0.0;
    double var_omega = 0.0;
    double flatness_error = 0.0;
    bool forward = true;
};

/// Round trip over tau_grid for the grid oracle: the density is carried from
/// one delay to the next and relaxed for `dwell` ns at each.
[[nodiscard]] std::vector<OracleSweepSample> fp_grid_sweep(const Lattice& lat,
                                                           std::span<const double> tau_grid,
                                                           double dwell, const GridConfig& cfg,
                                                           const ModelParams& p);

}  // namespace qdnuc
