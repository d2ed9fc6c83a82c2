#pragma once

// Mean-field Overhauser drift
//   d omega / dt = g(omega) = -kappa omega + alpha d^2/d omega^2 [omega C(omega, tau)]
// with relaxation to quasi-equilibrium and exhaustive steady-state enumeration.

#include <string_view>
#include <vector>

#include "qdnuc/model.hpp"

namespace qdnuc {

/// Unit convention attached to a bare kappa/alpha ratio. Internally the ratio
/// is in ns^2/rad^2 (omega in rad/ns).
enum class RatioUnits {
    kNs2,     ///< rho given in ns^2 / rad^2
    kGhzNs2,  ///< rho given with omega in GHz: (2 pi ns)^2
    kPs2,     ///< rho given with omega in rad/ps: ps^2 / rad^2
};

[[nodiscard]] std::string_view to_string(RatioUnits u);
[[nodiscard]] RatioUnits ratio_units_from_string(std::string_view s);

/// Converts a ratio expressed in `units` to ns^2/rad^2.
[[nodiscard]] double ratio_to_internal(double rho, RatioUnits units);

struct MeanFieldParams {
    double kappa = 1.0;          ///< boundary-diffusion decay rate [1/ns]
    double alpha = 0.0;          ///< trion-walk strength [rad^2/ns^3]
    double omega_bracket = 0.0;  ///< search half-width W [rad/ns]
    double fd_step = 1e-3;       ///< finite-difference step [rad/ns]
    double relax_tol = 1e-7;     ///< steady when |g| <= relax_tol * rate_scale * sigma
    double relax_t_max = 1e5;    ///< relaxation cap in units of 1/rate_scale

    /// kappa fixed, alpha = kappa / rho_internal, W = 6 sigma.
    [[nodiscard]] static MeanFieldParams from_ratio(double rho, RatioUnits units,
                                                    const ModelParams& p, double kappa = 1.0);

    /// Rate that sets the relaxation time unit: kappa, or alpha / sigma^2 when kappa = 0.
    [[nodiscard]] double rate_scale(const ModelParams& p) const;

    /// Absolute drift tolerance relax_tol * rate_scale * sigma [rad/ns^2].
    [[nodiscard]] double drift_tolerance(const ModelParams& p) const;

    /// Checks the parameter invariants; `tau_max` bounds the finite-difference step.
    void validate(const ModelParams& p, double tau_max) const;
};

struct SteadyState {
    double omega_f = 0.0;
    bool stable = false;
    double residual = 0.0;    ///< |g(omega_f)| [rad/ns^2]
    double slope = 0.0;       ///< dg/domega at omega_f, central difference with fd_step
    double basin_seed = 0.0;  ///< initial omega of the relaxation (the root itself when enumerated)
};

/// d^2/d omega^2 [omega C(omega, tau)] = 2 C' + omega C'', closed form.
[[nodiscard]] double d2_omega_C(double omega, double tau, const ModelParams& p);

/// g(omega) = -kappa omega + alpha d2_omega_C(omega, tau).
[[nodiscard]] double drift(double omega, double tau, const ModelParams& p, const MeanFieldParams& mf);

/// Integrates the drift ODE in rescaled time t' = rate_scale * t with an
/// adaptive embedded Runge-Kutta 4(5) scheme until |g| <= drift_tolerance.
/// Steps move omega by at most local_scan_step so the trajectory does not
/// jump across a root of g: the
/// result is the attractor of the basin that contains `omega_init`. Once the
/// drift is within 1e3 tolerances the root is bracketed and bisected.
/// Throws NO_CONVERGENCE past relax_t_max and BRACKET_ESCAPE if |omega| > W.
[[nodiscard]] SteadyState relax_to_steady(double omega_init, double tau, const ModelParams& p,
                                          const MeanFieldParams& mf);

/// Every root of g in [-W, W], sorted by omega. The scan follows
/// local_scan_step, so it is never coarser than 1/40 of the fringe period
/// 2 pi / tau or of sigma; each sign change is bisected. Roots are stable
/// where g crosses from + to -.
/// Throws BRACKET_ESCAPE if g(-W) <= 0 or g(W) >= 0.
[[nodiscard]] std::vector<SteadyState> steady_states(double tau, const ModelParams& p,
                                                     const MeanFieldParams& mf);

/// Uniform scan spacing: 1/40 of the smaller of the fringe period and sigma.
[[nodiscard]] double root_scan_step(double tau, const ModelParams& p);

/// Scan spacing at omega. Near a fringe node the count rate dips to zero over
/// a width w = sqrt(2 u) / tau, u = 1 - exp(-beta T), which is far narrower
/// than the fringe where the pumping is weak; the spacing shrinks to w / 16
/// there and grows by 5% of the distance to the node away from it.
[[nodiscard]] double local_scan_step(double omega, double tau, const ModelParams& p);

}  // namespace qdnuc
