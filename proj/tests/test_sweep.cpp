#include <cmath>

#include <gtest/gtest.h>

#include "qdnuc/error.hpp"
#include "qdnuc/sweep.hpp"
#include "qdnuc/units.hpp"

using namespace qdnuc;

namespace {

MeanFieldParams default_mf(const ModelParams& p) { return MeanFieldParams::from_ratio(1e4, RatioUnits::kPs2, p); }

SweepSchedule schedule(double a, double b, double step) {
    SweepSchedule s;
    s.tau_start = a;
    s.tau_end = b;
    s.tau_step = step;
    return s;
}

}  // namespace

TEST(Schedule, GridAndValidation) {
    const auto s = schedule(0.05, 1.5, 0.002);
    const auto g = s.tau_grid();
    ASSERT_EQ(g.size(), 726u);
    EXPECT_DOUBLE_EQ(g.front(), 0.05);
    EXPECT_NEAR(g.back(), 1.5, 1e-12);
    EXPECT_THROW(schedule(1.0, 0.5, 0.1).validate(), Error);
    EXPECT_THROW(schedule(0.1, 0.5, 0.0).validate(), Error);
    for (auto d : {SweepDirection::kForward, SweepDirection::kBackward, SweepDirection::kRoundTrip}) {
        EXPECT_EQ(sweep_direction_from_string(to_string(d)), d);
    }
}

TEST(RunSweep, AlphaZeroIsTheBareFringe) {
    const auto p = ModelParams::defaults();
    auto mf = default_mf(p);
    mf.alpha = 0;
    const auto trace = run_sweep(schedule(0.05, 1.5, 0.01), p, mf);
    ASSERT_EQ(trace.size(), 2 * 146u);
    for (const auto& s : trace) {
        EXPECT_EQ(s.omega_f, 0.0);
        EXPECT_EQ(s.count, count_rate(0.0, s.tau, p));
        EXPECT_EQ(s.beta_f, p.beta0);
        EXPECT_FALSE(s.jumped);
    }
    EXPECT_EQ(hysteresis_loop_area(trace), 0.0);
}

TEST(RunSweep, PassesAndSampleInvariants) {
    const auto p = ModelParams::defaults();
    const auto mf = default_mf(p);
    const auto s = schedule(0.05, 1.2, 0.01);
    const auto trace = run_sweep(s, p, mf);
    const auto fwd = pass_samples(trace, Pass::kForward);
    const auto bwd = pass_samples(trace, Pass::kBackward);
    ASSERT_EQ(fwd.size(), s.tau_grid().size());
    ASSERT_EQ(bwd.size(), fwd.size());
    for (std::size_t k = 0; k < fwd.size(); ++k) {
        EXPECT_EQ(fwd[k].tau, bwd[k].tau);
    }
    for (const auto& t : trace) {
        EXPECT_EQ(t.count, count_rate(t.omega_f, t.tau, p));
        EXPECT_EQ(t.beta_f, pump_rate(t.omega_f, p));
        EXPECT_TRUE(t.stable);
        EXPECT_LE(std::abs(drift(t.omega_f, t.tau, p, mf)), mf.drift_tolerance(p));
    }
    // First forward sample starts from omega_init; the backward pass carries on from the last forward state.
    EXPECT_EQ(trace.front().pass, Pass::kForward);
    EXPECT_EQ(trace[fwd.size()].pass, Pass::kBackward);
    EXPECT_EQ(trace[fwd.size()].tau, trace[fwd.size() - 1].tau);
}

TEST(RunSweep, Deterministic) {
    const auto p = ModelParams::defaults();
    const auto mf = default_mf(p);
    const auto s = schedule(0.05, 1.0, 0.005);
    const auto a = run_sweep(s, p, mf);
    const auto b = run_sweep(s, p, mf);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        EXPECT_EQ(a[k].omega_f, b[k].omega_f);
        EXPECT_EQ(a[k].jumped, b[k].jumped);
    }
}

TEST(RunSweep, SamplesLieOnTheNullcline) {
    const auto p = ModelParams::defaults();
    const auto mf = default_mf(p);
    const auto s = schedule(0.05, 1.5, 0.025);
    const auto trace = run_sweep(s, p, mf);
    const auto taus = s.tau_grid();
    const auto nc = nullcline(taus, p, mf);
    ASSERT_EQ(nc.slices.size(), taus.size());
    for (const auto& t : trace) {
        const auto& slice = nc.slices[static_cast<std::size_t>(std::lround((t.tau - s.tau_start) / s.tau_step))];
        ASSERT_EQ(slice.tau, t.tau);
        double best = INFINITY;
        for (const auto& r : slice.roots) {
            if (r.stable) best = std::min(best, std::abs(r.omega_f - t.omega_f));
        }
        EXPECT_LE(best, 10 * mf.fd_step) << t.tau;
    }
}

TEST(RunSweep, ForwardAndBackwardSitOnDifferentRoots) {
    const auto p = ModelParams::defaults();
    const auto mf = default_mf(p);
    const auto s = schedule(0.05, 1.5, 0.002);
    const auto trace = run_sweep(s, p, mf);
    const auto fwd = pass_samples(trace, Pass::kForward);
    const auto bwd = pass_samples(trace, Pass::kBackward);
    std::size_t split = 0;
    for (std::size_t k = 0; k < fwd.size(); ++k) {
        if (std::abs(fwd[k].omega_f - bwd[k].omega_f) > 1.0) {
            const auto roots = steady_states(fwd[k].tau, p, mf);
            ASSERT_GE(roots.size(), 3u);
            int fi = -1;
            int bi = -1;
            for (std::size_t r = 0; r < roots.size(); ++r) {
                if (std::abs(roots[r].omega_f - fwd[k].omega_f) < 10 * mf.fd_step) fi = static_cast<int>(r);
                if (std::abs(roots[r].omega_f - bwd[k].omega_f) < 10 * mf.fd_step) bi = static_cast<int>(r);
            }
            EXPECT_GE(fi, 0);
            EXPECT_GE(bi, 0);
            EXPECT_NE(fi, bi);
            ++split;
        }
    }
    EXPECT_GT(split, 10u);
    EXPECT_GT(hysteresis_loop_area(trace), 1e-3);
}

TEST(RunSweep, SmallDelaysHaveNoHysteresis) {
    const auto p = ModelParams::defaults();
    const auto mf = default_mf(p);
    const auto trace = run_sweep(schedule(0.05, 0.3, 0.002), p, mf);
    const auto fwd = pass_samples(trace, Pass::kForward);
    const auto bwd = pass_samples(trace, Pass::kBackward);
    std::size_t unique = 0;
    while (unique < fwd.size() && steady_states(fwd[unique].tau, p, mf).size() == 1) ++unique;
    EXPECT_GE(unique, 10u);
    EXPECT_LT(unique, fwd.size());
    for (std::size_t k = 0; k < unique; ++k) {
        EXPECT_NEAR(fwd[k].count, bwd[k].count, 1e-6) << fwd[k].tau;
        EXPECT_FALSE(fwd[k].jumped);
    }
}

TEST(RunSweep, ResetReseedsOmega) {
    const auto p = ModelParams::defaults();
    const auto mf = default_mf(p);
    auto s = schedule(0.05, 1.5, 0.01);
    s.direction = SweepDirection::kForward;
    s.reset_omega_every = 20;
    const auto a = run_sweep(s, p, mf);
    ASSERT_EQ(a.size(), s.tau_grid().size());
    const auto r = relax_to_steady(s.omega_init, a[40].tau, p, mf);
    EXPECT_EQ(a[40].omega_f, r.omega_f);
}

TEST(RunSweep, BackwardOnly) {
    const auto p = ModelParams::defaults();
    const auto mf = default_mf(p);
    auto s = schedule(0.05, 0.5, 0.01);
    s.direction = SweepDirection::kBackward;
    const auto a = run_sweep(s, p, mf);
    ASSERT_EQ(a.size(), s.tau_grid().size());
    EXPECT_NEAR(a.front().tau, 0.5, 1e-12);
    for (const auto& t : a) EXPECT_EQ(t.pass, Pass::kBackward);
}

TEST(RunSweep, ErrorsCarryTheDelay) {
    const auto p = ModelParams::defaults();
    auto mf = default_mf(p);
    mf.relax_t_max = 1e-9;
    try {
        (void)run_sweep(schedule(0.05, 1.0, 0.01), p, mf);
        FAIL() << "expected NO_CONVERGENCE";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::kNoConvergence);
        ASSERT_TRUE(e.tau().has_value());
        EXPECT_GE(*e.tau(), 0.05);
    }
}

TEST(FringeMap, CellsAndEnvelope) {
    const auto p = ModelParams::defaults();
    std::vector<double> w;
    for (int i = 0; i < 41; ++i) w.push_back(-3 * p.sigma + 6 * p.sigma * i / 40.0);
    std::vector<double> tau;
    for (int j = 0; j < 400; ++j) tau.push_back(0.001 * j);
    const auto m = fringe_map(w, tau, p);
    ASSERT_EQ(m.values.size(), w.size() * tau.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        for (std::size_t j = 0; j < tau.size(); j += 37) {
            EXPECT_EQ(m.at(i, j), count_rate(w[i], tau[j], p));
        }
    }
    // Over a full fringe the maximum sits at cos = -1: 2 s_p (1 - q) / (1 + q).
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double q = std::exp(-pump_rate(w[i], p) * p.T);
        const double period = kTwoPi / (p.omega0 + w[i]);
        const double tau_peak = 0.5 * period;
        EXPECT_NEAR(count_rate(w[i], tau_peak, p), 2 * p.s_p * (1 - q) / (1 + q), 1e-13);
        double best = 0;
        for (std::size_t j = 0; j < tau.size(); ++j) best = std::max(best, m.at(i, j));
        EXPECT_LE(best, 2 * p.s_p * (1 - q) / (1 + q) + 1e-15);
        EXPECT_GE(best, 2 * p.s_p * (1 - q) / (1 + q) * 0.999);
    }
}

TEST(FringeMap, ZeroShiftRowIsPeriodic) {
    const auto p = ModelParams::defaults();
    const double period = kTwoPi / p.omega0;
    std::vector<double> w{0.0};
    std::vector<double> tau;
    for (int j = 0; j < 200; ++j) tau.push_back(0.0037 * j);
    std::vector<double> shifted = tau;
    for (auto& t : shifted) t += 4 * period;
    const auto a = fringe_map(w, tau, p);
    const auto b = fringe_map(w, shifted, p);
    for (std::size_t j = 0; j < tau.size(); ++j) EXPECT_NEAR(a.at(0, j), b.at(0, j), 1e-12);
}

TEST(Nullcline, AlphaZeroSingleBranch) {
    const auto p = ModelParams::defaults();
    auto mf = default_mf(p);
    mf.alpha = 0;
    std::vector<double> tau;
    for (int j = 0; j < 30; ++j) tau.push_back(0.05 + 0.05 * j);
    const auto nc = nullcline(tau, p, mf);
    ASSERT_EQ(nc.branches.size(), 1u);
    EXPECT_EQ(nc.branches[0].size(), tau.size());
    for (const auto& pt : nc.branches[0]) {
        EXPECT_NEAR(pt.omega, 0.0, mf.fd_step);
        EXPECT_TRUE(pt.stable);
    }
}

TEST(Nullcline, RootCountChangesOnlyAtFolds) {
    const auto p = ModelParams::defaults();
    const auto mf = default_mf(p);
    std::vector<double> tau;
    for (int j = 0; j < 400; ++j) tau.push_back(0.05 + 0.0025 * j);
    const auto nc = nullcline(tau, p, mf);
    const auto folds = detect_folds(nc);
    EXPECT_TRUE(folds.complete);
    EXPECT_FALSE(folds.events.empty());
    std::size_t explained = 0;
    for (std::size_t k = 1; k < nc.slices.size(); ++k) {
        const long d = static_cast<long>(nc.slices[k].roots.size()) - static_cast<long>(nc.slices[k - 1].roots.size());
        explained += static_cast<std::size_t>(std::abs(d)) / 2;
    }
    EXPECT_LE(explained, folds.events.size());
    for (const auto& e : folds.events) {
        EXPECT_LT(e.tau_before, e.tau_after);
        // The merging pair is close together relative to the fringe spacing.
        EXPECT_LT(std::abs(e.omega_stable - e.omega_unstable), kPi / e.tau_after);
    }
}

TEST(Nullcline, BranchesKeepStability) {
    const auto p = ModelParams::defaults();
    const auto mf = default_mf(p);
    std::vector<double> tau;
    for (int j = 0; j < 200; ++j) tau.push_back(0.3 + 0.005 * j);
    const auto nc = nullcline(tau, p, mf);
    for (const auto& b : nc.branches) {
        for (std::size_t k = 1; k < b.size(); ++k) {
            EXPECT_EQ(b[k].stable, b[0].stable);
            EXPECT_GT(b[k].tau, b[k - 1].tau);
        }
    }
}
