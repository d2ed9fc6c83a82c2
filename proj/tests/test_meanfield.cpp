#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "qdnuc/error.hpp"
#include "qdnuc/meanfield.hpp"
#include "qdnuc/units.hpp"

using namespace qdnuc;

namespace {

double omega_c(double w, double tau, const ModelParams& p) { return w * count_rate(w, tau, p); }

double fd5(double w, double tau, double h, const ModelParams& p) {
    return (-omega_c(w + 2 * h, tau, p) + 16 * omega_c(w + h, tau, p) - 30 * omega_c(w, tau, p) +
            16 * omega_c(w - h, tau, p) - omega_c(w - 2 * h, tau, p)) /
           (12 * h * h);
}

MeanFieldParams default_mf(const ModelParams& p) { return MeanFieldParams::from_ratio(1e4, RatioUnits::kPs2, p); }

// |g| within tolerance, or g changes sign between the neighbouring doubles:
// where |g'| ulp(omega) exceeds the tolerance no double meets it.
bool resolved_root(double w, double tau, const ModelParams& p, const MeanFieldParams& mf) {
    if (std::abs(drift(w, tau, p, mf)) <= mf.drift_tolerance(p)) return true;
    const double lo = drift(std::nextafter(w, -INFINITY), tau, p, mf);
    const double hi = drift(std::nextafter(w, INFINITY), tau, p, mf);
    const double mid = drift(w, tau, p, mf);
    return (lo > 0) != (mid > 0) || (hi > 0) != (mid > 0);
}

void expect_odd_alternating(const std::vector<SteadyState>& roots) {
    ASSERT_FALSE(roots.empty());
    EXPECT_EQ(roots.size() % 2, 1u);
    for (std::size_t k = 0; k < roots.size(); ++k) {
        EXPECT_EQ(roots[k].stable, k % 2 == 0) << "root " << k;
    }
}

}  // namespace

TEST(RatioUnits, Conversions) {
    EXPECT_DOUBLE_EQ(ratio_to_internal(3.0, RatioUnits::kNs2), 3.0);
    EXPECT_DOUBLE_EQ(ratio_to_internal(1e4, RatioUnits::kPs2), 1e-2);
    EXPECT_NEAR(ratio_to_internal(1.0, RatioUnits::kGhzNs2), 1.0 / (kTwoPi * kTwoPi), 1e-16);
    for (auto u : {RatioUnits::kNs2, RatioUnits::kGhzNs2, RatioUnits::kPs2}) {
        EXPECT_EQ(ratio_units_from_string(to_string(u)), u);
    }
    EXPECT_THROW((void)ratio_units_from_string("furlongs"), Error);
}

TEST(D2OmegaC, MatchesFiniteDifferences) {
    const auto p = ModelParams::defaults();
    const double h = 1e-3;
    double worst = 0;
    for (int i = 0; i < 50; ++i) {
        const double w = -4 * p.sigma + 8 * p.sigma * (i + 0.5) / 50.0;
        for (int j = 0; j < 50; ++j) {
            const double tau = 0.03 + 1.47 * j / 49.0;
            const double a = d2_omega_C(w, tau, p);
            const double f = fd5(w, tau, h, p);
            worst = std::max(worst, std::abs(a - f) / std::max(1e-2, std::abs(a)));
        }
    }
    EXPECT_LE(worst, 1e-4);
}

TEST(D2OmegaC, TrivialCases) {
    auto p = ModelParams::defaults();
    for (double w = -30; w < 30; w += 3.3) {
        EXPECT_EQ(d2_omega_C(w, 0.0, p), 0.0);
    }
    // Saturated pumping over a flat profile and tau = 0 freezes C.
    p.beta0 = 1e3;
    p.sigma = 1e9;
    EXPECT_NEAR(d2_omega_C(2.0, 0.0, p), 0.0, 1e-15);
}

TEST(Drift, PureDecayAndTails) {
    const auto p = ModelParams::defaults();
    auto mf = default_mf(p);
    mf.alpha = 0;
    mf.kappa = 2.5;
    EXPECT_DOUBLE_EQ(drift(1.0, 0.4, p, mf), -2.5);
    const auto full = default_mf(p);
    for (double tau : {0.1, 0.5, 1.3}) {
        EXPECT_LT(drift(full.omega_bracket, tau, p, full), 0);
        EXPECT_GT(drift(-full.omega_bracket, tau, p, full), 0);
    }
}

TEST(Drift, ZeroAtOriginOnSymmetricDelays) {
    const auto p = ModelParams::defaults();
    const auto mf = default_mf(p);
    for (int k = 1; k <= 30; ++k) {
        const double tau = k * kPi / p.omega0;
        EXPECT_NEAR(drift(0.0, tau, p, mf), 0.0, 1e-9) << tau;
        // C even in omega at these delays, so d2_omega_C is odd.
        EXPECT_NEAR(d2_omega_C(1.7, tau, p), -d2_omega_C(-1.7, tau, p), 1e-9);
    }
}

TEST(SteadyStates, AlphaZeroSingleRoot) {
    const auto p = ModelParams::defaults();
    auto mf = default_mf(p);
    mf.alpha = 0;
    for (double tau : {0.2, 0.77, 1.4}) {
        const auto roots = steady_states(tau, p, mf);
        ASSERT_EQ(roots.size(), 1u);
        EXPECT_NEAR(roots[0].omega_f, 0.0, mf.fd_step);
        EXPECT_TRUE(roots[0].stable);
        const auto r = relax_to_steady(5.0, tau, p, mf);
        EXPECT_NEAR(r.omega_f, 0.0, 1e-6);
        EXPECT_TRUE(r.stable);
    }
}

TEST(SteadyStates, LargeKappaPinsToOrigin) {
    const auto p = ModelParams::defaults();
    auto mf = default_mf(p);
    mf.kappa = 1e6;
    mf.alpha = 1.0;
    const auto roots = steady_states(0.9, p, mf);
    ASSERT_EQ(roots.size(), 1u);
    EXPECT_LE(std::abs(roots[0].omega_f), mf.fd_step);
}

TEST(SteadyStates, RandomDrawsAreSound) {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> logrho(2, 6), tau_d(0.05, 1.5), sig(1.0, 2.5), tt(10, 40);
    for (int draw = 0; draw < 20; ++draw) {
        auto p = ModelParams::defaults();
        p.sigma = ghz_to_rad_per_ns(sig(rng));
        p.T = tt(rng);
        p.beta0 = 3 / p.T;
        p.t_rep = 143;
        const auto mf = MeanFieldParams::from_ratio(std::pow(10.0, logrho(rng)), RatioUnits::kPs2, p);
        const double tau = tau_d(rng);
        const auto roots = steady_states(tau, p, mf);
        expect_odd_alternating(roots);
        for (std::size_t k = 0; k < roots.size(); ++k) {
            EXPECT_TRUE(resolved_root(roots[k].omega_f, tau, p, mf))
                << "draw " << draw << " tau " << tau << " omega " << roots[k].omega_f << " residual "
                << roots[k].residual;
            if (k > 0) {
                EXPECT_LT(roots[k - 1].omega_f, roots[k].omega_f);
            }
        }
    }
}

TEST(RelaxToSteady, LandsOnAnEnumeratedRoot) {
    const auto p = ModelParams::defaults();
    const auto mf = default_mf(p);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> w0(-2 * p.sigma, 2 * p.sigma);
    for (double tau : {0.31, 0.62, 0.93, 1.24}) {
        const auto roots = steady_states(tau, p, mf);
        for (int k = 0; k < 8; ++k) {
            const auto r = relax_to_steady(w0(rng), tau, p, mf);
            double best = INFINITY;
            const SteadyState* hit = nullptr;
            for (const auto& s : roots) {
                if (std::abs(s.omega_f - r.omega_f) < best) {
                    best = std::abs(s.omega_f - r.omega_f);
                    hit = &s;
                }
            }
            EXPECT_LE(best, 10 * mf.fd_step);
            EXPECT_TRUE(hit->stable);
            EXPECT_LE(r.residual, mf.drift_tolerance(p));
        }
        for (const auto& s : roots) {
            if (!s.stable) continue;
            const auto r = relax_to_steady(s.omega_f, tau, p, mf);
            EXPECT_NEAR(r.omega_f, s.omega_f, 10 * mf.fd_step);
        }
    }
}

TEST(SteadyStates, OnlyTheRatioMatters) {
    const auto p = ModelParams::defaults();
    const auto mf = default_mf(p);
    auto scaled = mf;
    scaled.kappa *= 7.5;
    scaled.alpha *= 7.5;
    for (double tau : {0.45, 0.8, 1.3}) {
        const auto a = steady_states(tau, p, mf);
        const auto b = steady_states(tau, p, scaled);
        ASSERT_EQ(a.size(), b.size());
        for (std::size_t k = 0; k < a.size(); ++k) {
            EXPECT_NEAR(a[k].omega_f, b[k].omega_f, 1e-6);
            EXPECT_EQ(a[k].stable, b[k].stable);
        }
    }
}

TEST(MeanFieldParams, Invariants) {
    const auto p = ModelParams::defaults();
    auto mf = default_mf(p);
    EXPECT_NO_THROW(mf.validate(p, 1.5));
    auto bad = mf;
    bad.kappa = 0;
    bad.alpha = 0;
    EXPECT_THROW(bad.validate(p, 1.5), Error);
    bad = mf;
    bad.omega_bracket = 3 * p.sigma;
    EXPECT_THROW(bad.validate(p, 1.5), Error);
    bad = mf;
    bad.fd_step = 1.0;
    EXPECT_THROW(bad.validate(p, 1.5), Error);
    bad = mf;
    bad.kappa = -1;
    EXPECT_THROW(bad.validate(p, 1.5), Error);
}

TEST(RelaxToSteady, ErrorsCarryCodes) {
    const auto p = ModelParams::defaults();
    auto mf = default_mf(p);
    mf.relax_t_max = 1e-9;
    try {
        (void)relax_to_steady(10.0, 0.7, p, mf);
        FAIL() << "expected NO_CONVERGENCE";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::kNoConvergence);
    }
}
