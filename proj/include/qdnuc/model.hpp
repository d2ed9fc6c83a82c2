#pragma once

// Closed-form physics of one pulse period: optical pumping, the steady-state
// Ramsey/trion count rate, the pulse-map oracle for it, and the trion-hole
// nuclear flip-rate estimate.

#include "qdnuc/lattice.hpp"

namespace qdnuc {

/// Pulse-sequence and optical constants. Angular frequencies in rad/ns, times in ns.
struct ModelParams {
    double omega0 = 0.0;  ///< bare electron Larmor frequency [rad/ns]
    double T = 0.0;       ///< optical pumping duration [ns]
    double beta0 = 0.0;   ///< peak pumping rate [1/ns]
    double sigma = 0.0;   ///< Gaussian width of the pumping profile [rad/ns]
    double s_p = 0.0;     ///< saturation polarization, 1/2 for perfect pumping
    double t_rep = 0.0;   ///< sequence repetition period [ns]

    /// T = 26 ns, beta0 = 3/T, sigma = 2 pi 1.6 GHz, s_p = 1/2, t_rep = 143 ns,
    /// omega0 = 2 pi 10 GHz (the Larmor frequency is a free choice).
    [[nodiscard]] static ModelParams defaults();

    void validate() const;
};

/// Inputs of the trion-hole dipolar flip-rate estimate.
struct HoleNuclearParams {
    double b0 = 0.0;          ///< external field [T]
    double g_h = 0.0;         ///< hole g-factor
    double gamma_rad = 0.0;   ///< trion radiative linewidth, angular [rad/ns]
    double inv_r3_avg = 0.0;  ///< <|r - r_h|^-3> over the hole wavefunction [1/nm^3]

    /// B0 = 4 T, gamma/2pi = 0.1 GHz, g_h = 1 and <r^-3> = 0.65 nm^-3. The last
    /// two are not measured values: they were picked by inverting the estimate
    /// so that Gamma lands at 1/(20 ms).
    [[nodiscard]] static HoleNuclearParams defaults();

    void validate() const;
};

struct PulseMapState {
    double s_f = 0.0;  ///< polarization at the end of pumping
    double s_i = 0.0;  ///< polarization after the second rotation
};

struct PulseMapResult {
    PulseMapState state;
    double count = 0.0;     ///< s_f - s_i
    double residual = 0.0;  ///< one-period fixed-point residual
    int periods_log2 = 0;   ///< the map was applied 2^periods_log2 - 1 times
    bool converged = false;
};

/// Value and first two omega-derivatives of the count rate at fixed tau.
struct CountRateJet {
    double value = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
};

/// beta(omega) = beta0 exp(-omega^2 / (2 sigma^2)).
[[nodiscard]] double pump_rate(double omega, const ModelParams& p);

/// Steady-state count rate
///   C = s_p (1 - q)(1 - cos th) / (1 - q cos th),  q = exp(-beta(omega) T),
///   th = (omega0 + omega) tau.
/// Evaluated in the form s_p u v / (u + v - u v) with u = 1 - q and
/// v = 1 - cos th so that it stays accurate near the fringe nodes; the
/// 0/0 point u = v = 0 resolves to 0.
[[nodiscard]] double count_rate(double omega, double tau, const ModelParams& p);

/// Analytic omega-derivatives of count_rate.
[[nodiscard]] CountRateJet count_rate_jet(double omega, double tau, const ModelParams& p);

/// Iterates the per-period map (pump toward s_p, then rotate/precess/rotate)
/// from an unpolarized spin until it stops moving. The map is affine, so it is
/// composed with itself by repeated squaring: 2^k - 1 periods after k rounds.
/// Does not use count_rate. When the map is neutral (no pumping and cos th = 1)
/// the result is flagged unconverged and the count is 0.
[[nodiscard]] PulseMapResult pulse_map_fixed_point(double omega, double tau,
                                                   const ModelParams& p);

/// Fermi-golden-rule rate at which the trion hole flips one nucleus,
///   Gamma = (9 mu0^2 / 128 pi) (mu_B g_h / B0)^2 gamma <r^-3>^2,
/// with SI constants and <r^-3> converted from nm^-3. Returns 1/ns.
[[nodiscard]] double trion_flip_rate(const HoleNuclearParams& h);

/// alpha = sum_j Gamma_j A_j^2 [rad^2/ns^3].
[[nodiscard]] double alpha_from_lattice(const Lattice& lat);

}  // namespace qdnuc
