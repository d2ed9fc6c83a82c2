#include "qdnuc/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>

#include "qdnuc/error.hpp"
#include "qdnuc/units.hpp"

namespace qdnuc {

std::string_view to_string(SweepDirection d) {
    switch (d) {
    case SweepDirection::kForward: return "forward";
    case SweepDirection::kBackward: return "backward";
    case SweepDirection::kRoundTrip: return "round-trip";
    }
    return "round-trip";
}

std::string_view to_string(Pass p) { return p == Pass::kForward ? "fwd" : "bwd"; }

SweepDirection sweep_direction_from_string(std::string_view s) {
    if (s == "forward") return SweepDirection::kForward;
    if (s == "backward") return SweepDirection::kBackward;
    if (s == "round-trip") return SweepDirection::kRoundTrip;
    throw Error(ErrorCode::kValidationError,
                "sweep.direction must be forward, backward or round-trip (got '" + std::string(s) + "')");
}

void SweepSchedule::validate() const {
    require(tau_step > 0.0, "sweep: tau_step > 0");
    require(tau_start >= 0.0, "sweep: tau_start >= 0");
    require(tau_start < tau_end, "sweep: tau_start < tau_end");
    require(reset_omega_every >= 0, "sweep: reset_omega_every >= 0");
    require(std::isfinite(omega_init), "sweep: omega_init finite");
}

std::vector<double> SweepSchedule::tau_grid() const {
    const auto n = static_cast<std::size_t>(std::llround((tau_end - tau_start) / tau_step)) + 1;
    std::vector<double> grid(n);
    for (std::size_t k = 0; k < n; ++k) {
        grid[k] = tau_start + static_cast<double>(k) * tau_step;
    }
    return grid;
}

namespace {

void run_pass(std::span<const double> taus, Pass pass, double& omega, const SweepSchedule& s,
              const ModelParams& p, const MeanFieldParams& mf, std::vector<TraceSample>& out) {
    double previous = omega;
    for (std::size_t k = 0; k < taus.size(); ++k) {
        const double tau = taus[k];
        if (s.reset_omega_every > 0 && k > 0 && k % static_cast<std::size_t>(s.reset_omega_every) == 0) {
            omega = s.omega_init;
        }
        SteadyState st;
        try {
            st = relax_to_steady(omega, tau, p, mf);
        } catch (const Error& e) {
            throw e.at_tau(tau);
        }
        TraceSample sample;
        sample.tau = tau;
        sample.omega_f = st.omega_f;
        sample.count = count_rate(st.omega_f, tau, p);
        sample.beta_f = pump_rate(st.omega_f, p);
        sample.stable = st.stable;
        sample.jumped = tau > 0.0 && std::abs(st.omega_f - previous) > kPi / tau;
        sample.pass = pass;
        out.push_back(sample);
        omega = st.omega_f;
        previous = st.omega_f;
    }
}

template <typename Field>
double loop_area(std::span<const TraceSample> trace, Field field) {
    const auto fwd = pass_samples(trace, Pass::kForward);
    const auto bwd = pass_samples(trace, Pass::kBackward);
    require(fwd.size() == bwd.size() && fwd.size() >= 2, "loop area: both passes on the same grid");
    double area = 0.0;
    for (std::size_t k = 1; k < fwd.size(); ++k) {
        const double d0 = std::abs(field(fwd[k - 1]) - field(bwd[k - 1]));
        const double d1 = std::abs(field(fwd[k]) - field(bwd[k]));
        area += 0.5 * (d0 + d1) * (fwd[k].tau - fwd[k - 1].tau);
    }
    return area;
}

}  // namespace

std::vector<TraceSample> run_sweep(const SweepSchedule& s, const ModelParams& p,
                                   const MeanFieldParams& mf) {
    s.validate();
    const auto grid = s.tau_grid();
    std::vector<double> reversed(grid.rbegin(), grid.rend());

    std::vector<TraceSample> out;
    out.reserve(2 * grid.size());
    double omega = s.omega_init;
    switch (s.direction) {
    case SweepDirection::kForward:
        run_pass(grid, Pass::kForward, omega, s, p, mf, out);
        break;
    case SweepDirection::kBackward:
        run_pass(reversed, Pass::kBackward, omega, s, p, mf, out);
        break;
    case SweepDirection::kRoundTrip:
        run_pass(grid, Pass::kForward, omega, s, p, mf, out);
        run_pass(reversed, Pass::kBackward, omega, s, p, mf, out);
        break;
    }
    return out;
}

std::vector<TraceSample> pass_samples(std::span<const TraceSample> trace, Pass pass) {
    std::vector<TraceSample> out;
    for (const auto& t : trace) {
        if (t.pass == pass) {
            out.push_back(t);
        }
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.tau < b.tau; });
    return out;
}

double hysteresis_loop_area(std::span<const TraceSample> trace) {
    return loop_area(trace, [](const TraceSample& t) { return t.count; });
}

double hysteresis_loop_area_omega(std::span<const TraceSample> trace) {
    return loop_area(trace, [](const TraceSample& t) { return t.omega_f; });
}

FringeMap fringe_map(std::span<const double> omega_grid, std::span<const double> tau_grid,
                     const ModelParams& p) {
    require(std::is_sorted(omega_grid.begin(), omega_grid.end()), "fringe_map: omega grid monotone");
    require(std::is_sorted(tau_grid.begin(), tau_grid.end()), "fringe_map: tau grid monotone");
    FringeMap map;
    map.omega.assign(omega_grid.begin(), omega_grid.end());
    map.tau.assign(tau_grid.begin(), tau_grid.end());
    map.values.reserve(omega_grid.size() * tau_grid.size());
    for (const double w : omega_grid) {
        for (const double tau : tau_grid) {
            map.values.push_back(count_rate(w, tau, p));
        }
    }
    return map;
}

Nullcline nullcline(std::span<const double> tau_grid, const ModelParams& p, const MeanFieldParams& mf) {
    Nullcline nc;
    nc.slices.reserve(tau_grid.size());
    for (const double tau : tau_grid) {
        NullclineSlice slice;
        slice.tau = tau;
        try {
            slice.roots = steady_states(tau, p, mf);
        } catch (const Error& e) {
            throw e.at_tau(tau);
        }
        slice.branch.assign(slice.roots.size(), -1);

        if (!nc.slices.empty()) {
            const auto& prev = nc.slices.back();
            const double reach = kPi / (2.0 * tau);
            std::vector<std::tuple<double, std::size_t, std::size_t>> candidates;
            for (std::size_t i = 0; i < prev.roots.size(); ++i) {
                for (std::size_t j = 0; j < slice.roots.size(); ++j) {
                    const double dist = std::abs(prev.roots[i].omega_f - slice.roots[j].omega_f);
                    if (prev.roots[i].stable == slice.roots[j].stable && dist <= reach) {
                        candidates.emplace_back(dist, i, j);
                    }
                }
            }
            std::sort(candidates.begin(), candidates.end());
            std::vector<bool> used_prev(prev.roots.size(), false);
            for (const auto& [dist, i, j] : candidates) {
                if (!used_prev[i] && slice.branch[j] < 0) {
                    used_prev[i] = true;
                    slice.branch[j] = prev.branch[i];
                }
            }
        }
        for (std::size_t j = 0; j < slice.roots.size(); ++j) {
            if (slice.branch[j] < 0) {
                slice.branch[j] = static_cast<int>(nc.branches.size());
                nc.branches.emplace_back();
            }
            nc.branches[static_cast<std::size_t>(slice.branch[j])].push_back(
                {tau, slice.roots[j].omega_f, slice.roots[j].stable});
        }
        nc.slices.push_back(std::move(slice));
    }
    return nc;
}

namespace {

// Pairs the flagged roots of one slice into adjacent stable/unstable couples.
bool pair_up(const NullclineSlice& slice, const std::vector<std::size_t>& flagged, bool appears,
             double tau_before, double tau_after, std::vector<FoldEvent>& events) {
    if (flagged.size() % 2 != 0) {
        return false;
    }
    for (std::size_t k = 0; k + 1 < flagged.size(); k += 2) {
        const std::size_t i = flagged[k];
        const std::size_t j = flagged[k + 1];
        if (j != i + 1 || slice.roots[i].stable == slice.roots[j].stable) {
            return false;
        }
        const auto& st = slice.roots[i].stable ? slice.roots[i] : slice.roots[j];
        const auto& un = slice.roots[i].stable ? slice.roots[j] : slice.roots[i];
        events.push_back({tau_before, tau_after, st.omega_f, un.omega_f, appears});
    }
    return true;
}

}  // namespace

FoldReport detect_folds(const Nullcline& nc) {
    FoldReport report;
    for (std::size_t s = 1; s < nc.slices.size(); ++s) {
        const auto& before = nc.slices[s - 1];
        const auto& after = nc.slices[s];

        std::vector<std::size_t> born;
        for (std::size_t j = 0; j < after.roots.size(); ++j) {
            if (std::find(before.branch.begin(), before.branch.end(), after.branch[j]) == before.branch.end()) {
                born.push_back(j);
            }
        }
        std::vector<std::size_t> died;
        for (std::size_t i = 0; i < before.roots.size(); ++i) {
            if (std::find(after.branch.begin(), after.branch.end(), before.branch[i]) == after.branch.end()) {
                died.push_back(i);
            }
        }
        report.complete = pair_up(after, born, true, before.tau, after.tau, report.events) && report.complete;
        report.complete = pair_up(before, died, false, before.tau, after.tau, report.events) && report.complete;
    }
    return report;
}

}  // namespace qdnuc
