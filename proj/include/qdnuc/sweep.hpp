#pragma once

// Delay-scan protocol: forward/backward tau sweeps that carry the nuclear
// state from one delay to the next, the (omega, tau) fringe map, and the
// nullcline of the mean-field drift.

#include <span>
#include <string_view>
#include <vector>

#include "qdnuc/meanfield.hpp"

namespace qdnuc {

enum class SweepDirection { kForward, kBackward, kRoundTrip };
enum class Pass { kForward, kBackward };

[[nodiscard]] std::string_view to_string(SweepDirection d);
[[nodiscard]] std::string_view to_string(Pass p);
[[nodiscard]] SweepDirection sweep_direction_from_string(std::string_view s);

struct SweepSchedule {
    double tau_start = 0.05;  ///< [ns]
    double tau_end = 1.5;     ///< [ns]
    double tau_step = 0.002;  ///< [ns]
    SweepDirection direction = SweepDirection::kRoundTrip;
    double omega_init = 0.0;  ///< Overhauser shift before the first delay [rad/ns]
    /// Reseed omega with omega_init every this many samples of a pass; 0 disables.
    int reset_omega_every = 0;

    void validate() const;

    /// tau_start + k tau_step for k = 0 .. round((tau_end - tau_start) / tau_step).
    [[nodiscard]] std::vector<double> tau_grid() const;

    bool operator==(const SweepSchedule&) const = default;
};

struct TraceSample {
    double tau = 0.0;
    double omega_f = 0.0;
    double count = 0.0;   ///< count_rate(omega_f, tau)
    double beta_f = 0.0;  ///< pump_rate(omega_f)
    bool stable = false;
    bool jumped = false;  ///< |omega_f - previous omega_f| > pi / tau
    Pass pass = Pass::kForward;
};

/// Relaxes to steady state at each delay in schedule order, seeding each
/// relaxation with the previous result. A round trip runs forward and then
/// backward over the same grid, the backward pass starting from the last
/// forward state. Numeric errors are rethrown with the delay attached.
[[nodiscard]] std::vector<TraceSample> run_sweep(const SweepSchedule& s, const ModelParams& p,
                                                 const MeanFieldParams& mf);

/// Samples of one pass, in increasing tau.
[[nodiscard]] std::vector<TraceSample> pass_samples(std::span<const TraceSample> trace, Pass pass);

/// Integral over tau of |count_fwd - count_bwd| (trapezoid). Both passes must
/// share the same tau grid.
[[nodiscard]] double hysteresis_loop_area(std::span<const TraceSample> trace);

/// Same as hysteresis_loop_area but on omega_f [rad/ns * ns].
[[nodiscard]] double hysteresis_loop_area_omega(std::span<const TraceSample> trace);

/// Row-major count-rate table, tau fastest: values[i_omega * tau.size() + i_tau].
struct FringeMap {
    std::vector<double> omega;
    std::vector<double> tau;
    std::vector<double> values;

    [[nodiscard]] double at(std::size_t i_omega, std::size_t i_tau) const {
        return values[i_omega * tau.size() + i_tau];
    }
};

[[nodiscard]] FringeMap fringe_map(std::span<const double> omega_grid, std::span<const double> tau_grid,
                                   const ModelParams& p);

struct NullclinePoint {
    double tau = 0.0;
    double omega = 0.0;
    bool stable = false;
};

struct NullclineSlice {
    double tau = 0.0;
    std::vector<SteadyState> roots;
    std::vector<int> branch;  ///< branch id of each root
};

struct Nullcline {
    std::vector<NullclineSlice> slices;
    std::vector<std::vector<NullclinePoint>> branches;
};

/// steady_states at every delay, linked into branches by nearest-neighbour
/// continuation between consecutive delays (same stability, within a
/// quarter fringe period pi / (2 tau)).
[[nodiscard]] Nullcline nullcline(std::span<const double> tau_grid, const ModelParams& p,
                                  const MeanFieldParams& mf);

/// A stable/unstable root pair that appears or disappears between two delays.
struct FoldEvent {
    double tau_before = 0.0;
    double tau_after = 0.0;
    double omega_stable = 0.0;
    double omega_unstable = 0.0;
    bool appears = false;
};

/// Explains every change in root count between neighbouring slices as
/// saddle-node pairs. Returns false in `complete` if some change could not
/// be paired into adjacent stable/unstable roots.
struct FoldReport {
    std::vector<FoldEvent> events;
    bool complete = true;
};

[[nodiscard]] FoldReport detect_folds(const Nullcline& nc);

}  // namespace qdnuc
