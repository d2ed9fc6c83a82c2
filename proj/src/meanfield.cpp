#include "qdnuc/meanfield.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "qdnuc/error.hpp"
#include "qdnuc/units.hpp"

namespace qdnuc {

namespace {

constexpr int kMaxBisections = 200;
constexpr double kPolishFactor = 1e3;
constexpr long kStallSteps = 200;
constexpr long kMaxAttempts = 10'000'000;

int sign_of(double x) { return (x > 0.0) - (x < 0.0); }

// Bisects a sign change of g on [lo, hi] down to the drift tolerance.
double bisect_root(double lo, double g_lo, double hi, double tau, const ModelParams& p,
                   const MeanFieldParams& mf, double tol) {
    double mid = 0.5 * (lo + hi);
    for (int i = 0; i < kMaxBisections; ++i) {
        mid = 0.5 * (lo + hi);
        const double g_mid = drift(mid, tau, p, mf);
        if (std::abs(g_mid) <= tol || mid == lo || mid == hi) {
            break;
        }
        if (sign_of(g_mid) == sign_of(g_lo)) {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    return mid;
}

struct Polish {
    double omega;
    bool found;
};

// End-game of the relaxation. The flow is monotone in 1-D, so the attractor
// is the first root met when walking from omega in the direction of g.
// Walks at most max_move; reports the last probe when no root was met.
Polish polish_root(double omega, double g, double max_move, double tau, const ModelParams& p,
                   const MeanFieldParams& mf, double tol) {
    const double dir = g > 0.0 ? 1.0 : -1.0;
    const double start = omega;
    double step = 1e-13 * std::max(1.0, std::abs(omega));
    while (std::abs(omega - start) < max_move) {
        const double probe = omega + dir * std::min(step, max_move);
        const double g_probe = drift(probe, tau, p, mf);
        if (std::abs(g_probe) <= tol) {
            return {probe, true};
        }
        if (sign_of(g_probe) != sign_of(g)) {
            return {bisect_root(omega, g, probe, tau, p, mf, tol), true};
        }
        omega = probe;
        g = g_probe;
        step *= 2.0;
    }
    return {omega, false};
}

SteadyState classify(double omega, double tau, const ModelParams& p, const MeanFieldParams& mf) {
    SteadyState s;
    s.omega_f = omega;
    s.residual = std::abs(drift(omega, tau, p, mf));
    const double h = mf.fd_step;
    s.slope = (drift(omega + h, tau, p, mf) - drift(omega - h, tau, p, mf)) / (2.0 * h);
    s.stable = s.slope <= 0.0;
    return s;
}

// Dormand-Prince 5(4) tableau.
constexpr std::array<double, 7> kC = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
constexpr std::array<double, 7> kB5 = {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192,
                                       -2187.0 / 6784, 11.0 / 84, 0.0};
constexpr std::array<double, 7> kB4 = {5179.0 / 57600, 0.0, 7571.0 / 16695, 393.0 / 640,
                                       -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

}  // namespace

std::string_view to_string(RatioUnits u) {
    switch (u) {
    case RatioUnits::kNs2: return "ns2";
    case RatioUnits::kGhzNs2: return "ghz_ns2";
    case RatioUnits::kPs2: return "ps2";
    }
    return "ns2";
}

RatioUnits ratio_units_from_string(std::string_view s) {
    if (s == "ns2") return RatioUnits::kNs2;
    if (s == "ghz_ns2") return RatioUnits::kGhzNs2;
    if (s == "ps2") return RatioUnits::kPs2;
    throw Error(ErrorCode::kValidationError,
                "meanfield.ratio_units must be one of ns2, ghz_ns2, ps2 (got '" + std::string(s) + "')");
}

double ratio_to_internal(double rho, RatioUnits units) {
    switch (units) {
    case RatioUnits::kNs2: return rho;
    // omega_GHz = omega / 2 pi, so alpha_rad = (2 pi)^2 alpha_GHz.
    case RatioUnits::kGhzNs2: return rho / (kTwoPi * kTwoPi);
    // omega_ps = omega / 1000, so alpha_rad = 1e6 alpha_ps.
    case RatioUnits::kPs2: return rho * 1e-6;
    }
    return rho;
}

MeanFieldParams MeanFieldParams::from_ratio(double rho, RatioUnits units, const ModelParams& p,
                                            double kappa) {
    require(rho > 0.0, "meanfield: rho > 0");
    MeanFieldParams mf;
    mf.kappa = kappa;
    mf.alpha = kappa / ratio_to_internal(rho, units);
    mf.omega_bracket = 6.0 * p.sigma;
    return mf;
}

double MeanFieldParams::rate_scale(const ModelParams& p) const {
    return kappa > 0.0 ? kappa : alpha / (p.sigma * p.sigma);
}

double MeanFieldParams::drift_tolerance(const ModelParams& p) const {
    return relax_tol * rate_scale(p) * p.sigma;
}

void MeanFieldParams::validate(const ModelParams& p, double tau_max) const {
    require(kappa >= 0.0, "meanfield: kappa >= 0");
    require(alpha >= 0.0, "meanfield: alpha >= 0");
    require(kappa > 0.0 || alpha > 0.0, "meanfield: kappa and alpha not both zero");
    require(omega_bracket >= 4.0 * p.sigma, "meanfield: omega_bracket >= 4 sigma");
    require(fd_step > 0.0, "meanfield: fd_step > 0");
    if (tau_max > 0.0) {
        require(fd_step < kTwoPi / (10.0 * tau_max), "meanfield: fd_step < 2 pi / (10 tau_max)");
    }
    require(relax_tol > 0.0, "meanfield: relax_tol > 0");
    require(relax_t_max > 0.0, "meanfield: relax_t_max > 0");
}

double d2_omega_C(double omega, double tau, const ModelParams& p) {
    const auto jet = count_rate_jet(omega, tau, p);
    return 2.0 * jet.d1 + omega * jet.d2;
}

double drift(double omega, double tau, const ModelParams& p, const MeanFieldParams& mf) {
    const double trion = mf.alpha != 0.0 ? mf.alpha * d2_omega_C(omega, tau, p) : 0.0;
    return -mf.kappa * omega + trion;
}

double root_scan_step(double tau, const ModelParams& p) {
    const double fringe = tau > 0.0 ? kTwoPi / tau : p.sigma;
    return std::min(fringe, p.sigma) / 40.0;
}

double local_scan_step(double omega, double tau, const ModelParams& p) {
    const double base = root_scan_step(tau, p);
    if (tau <= 0.0) {
        return base;
    }
    // Where the pumping is weak, C dips to zero at each fringe node over a
    // width sqrt(2 u) / tau, and the drift follows on that scale.
    const double node = kTwoPi * std::round((p.omega0 + omega) * tau / kTwoPi) / tau - p.omega0;
    const double u = -std::expm1(-pump_rate(node, p) * p.T);
    if (!(u > 0.0)) {
        return base;
    }
    const double width = std::sqrt(2.0 * u) / tau;
    return std::min(base, std::max(width / 16.0, 0.05 * std::abs(omega - node)));
}

SteadyState relax_to_steady(double omega_init, double tau, const ModelParams& p,
                            const MeanFieldParams& mf) {
    const double bracket = mf.omega_bracket;
    require(std::abs(omega_init) <= bracket, "relax_to_steady: |omega_init| <= omega_bracket");

    const double rate = mf.rate_scale(p);
    const double tol = mf.drift_tolerance(p);
    const auto rhs = [&](double w) { return drift(w, tau, p, mf) / rate; };

    double omega = omega_init;
    double g = drift(omega, tau, p, mf);
    double t = 0.0;
    double h = 1e-2;
    long attempts = 0;
    long stalled = 0;  // accepted steps since |g| last halved
    double g_mark = std::abs(g);

    while (std::abs(g) > tol) {
        const double max_move = local_scan_step(omega, tau, p);
        const double err_tol = 1e-8 * max_move;
        if (t > mf.relax_t_max || ++attempts > kMaxAttempts) {
            throw Error(ErrorCode::kNoConvergence,
                        "relax_to_steady: no steady state within relax_t_max = " +
                            std::to_string(mf.relax_t_max),
                        tau);
        }
        if (std::abs(g) <= kPolishFactor * tol || stalled > kStallSteps) {
            // Close to the attractor, or held back by the explicit stability limit.
            const auto pol = polish_root(omega, g, max_move, tau, p, mf, tol);
            omega = pol.omega;
            g = drift(omega, tau, p, mf);
            if (pol.found) {
                break;
            }
            stalled = 0;
            g_mark = std::abs(g);
            continue;
        }

        std::array<double, 7> k{};
        k[0] = g / rate;
        for (int s = 1; s < 7; ++s) {
            double w = omega;
            for (int j = 0; j < s; ++j) {
                w += h * kA[s][j] * k[j];
            }
            k[s] = rhs(w);
        }
        double y5 = omega;
        double y4 = omega;
        for (int s = 0; s < 7; ++s) {
            y5 += h * kB5[s] * k[s];
            y4 += h * kB4[s] * k[s];
        }
        const double err = std::abs(y5 - y4);
        const double move = std::abs(y5 - omega);

        if (!std::isfinite(y5) || err > err_tol || move > max_move) {
            const double by_err = err > 0.0 ? 0.9 * std::pow(err_tol / err, 0.2) : 0.5;
            const double by_move = move > max_move ? 0.5 * max_move / move : 1.0;
            h *= std::clamp(std::min(by_err, by_move), 0.1, 0.5);
            continue;
        }

        const double g_new = drift(y5, tau, p, mf);
        if (sign_of(g_new) != sign_of(g) && std::abs(g_new) > tol) {
            // Overshot the attracting root of this basin; it lies between the two points.
            omega = bisect_root(omega, g, y5, tau, p, mf, tol);
            g = drift(omega, tau, p, mf);
            break;
        }

        omega = y5;
        g = g_new;
        t += h;
        if (std::abs(g) <= 0.5 * g_mark) {
            g_mark = std::abs(g);
            stalled = 0;
        } else {
            ++stalled;
        }
        if (std::abs(omega) > bracket) {
            throw Error(ErrorCode::kBracketEscape,
                        "relax_to_steady: |omega| left the bracket W = " + std::to_string(bracket),
                        tau);
        }
        const double grow = err > 0.0 ? 0.9 * std::pow(err_tol / err, 0.2) : 5.0;
        h *= std::clamp(grow, 1.0, 5.0);
    }

    auto s = classify(omega, tau, p, mf);
    s.basin_seed = omega_init;
    return s;
}

std::vector<SteadyState> steady_states(double tau, const ModelParams& p, const MeanFieldParams& mf) {
    const double bracket = mf.omega_bracket;
    std::vector<double> omega_at;
    for (double w = -bracket; w < bracket;) {
        omega_at.push_back(w);
        const double next = w + local_scan_step(w, tau, p);
        if (w < 0.0 && next > 0.0) {
            omega_at.push_back(0.0);
        }
        w = next;
    }
    omega_at.push_back(bracket);
    const auto n_points = static_cast<long>(omega_at.size());

    std::vector<double> g(omega_at.size());
    for (std::size_t k = 0; k < omega_at.size(); ++k) {
        g[k] = drift(omega_at[k], tau, p, mf);
    }
    if (!(g.front() > 0.0 && g.back() < 0.0)) {
        throw Error(ErrorCode::kBracketEscape,
                    "steady_states: drift must point inward at +-W; increase omega_bracket", tau);
    }

    const double tol = mf.drift_tolerance(p);
    std::vector<SteadyState> roots;
    long prev = 0;
    for (long k = 1; k < n_points; ++k) {
        const int s = sign_of(g[static_cast<std::size_t>(k)]);
        if (s == 0) {
            continue;
        }
        const int s_prev = sign_of(g[static_cast<std::size_t>(prev)]);
        if (s != s_prev) {
            double omega = 0.0;
            if (k - prev > 1) {
                omega = omega_at[static_cast<std::size_t>(prev + (k - prev) / 2)];
            } else {
                omega = bisect_root(omega_at[static_cast<std::size_t>(prev)], g[static_cast<std::size_t>(prev)],
                                    omega_at[static_cast<std::size_t>(k)], tau, p, mf, tol);
            }
            auto root = classify(omega, tau, p, mf);
            // The crossing direction decides; the finite-difference slope is only reported.
            root.stable = s_prev > 0;
            root.basin_seed = omega;
            roots.push_back(root);
        }
        prev = k;
    }
    return roots;
}

}  // namespace qdnuc
