#include <string>

#include <gtest/gtest.h>

#include "qdnuc/config.hpp"
#include "qdnuc/error.hpp"
#include "qdnuc/units.hpp"

using namespace qdnuc;

namespace {

ErrorCode code_of(std::string_view text) {
    try {
        (void)parse_config(text);
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error for: " << text;
    return ErrorCode::kNonConverged;
}

std::string message_of(std::string_view text) {
    try {
        (void)parse_config(text);
    } catch (const Error& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST(Config, EmptyDocumentGivesDefaults) {
    const auto cfg = parse_config("");
    const auto p = cfg.model.params();
    EXPECT_EQ(p.T, 26.0);
    EXPECT_DOUBLE_EQ(p.beta0, 3.0 / 26.0);
    EXPECT_DOUBLE_EQ(p.sigma, kTwoPi * 1.6);
    EXPECT_EQ(p.t_rep, 143.0);
    EXPECT_EQ(p.s_p, 0.5);
    EXPECT_DOUBLE_EQ(p.omega0, kTwoPi * 10);
    EXPECT_TRUE(cfg.explicit_keys.empty());
    EXPECT_TRUE(cfg.same_settings(RunConfig{}));
    const auto mf = cfg.meanfield.params(p);
    EXPECT_DOUBLE_EQ(mf.kappa / mf.alpha, 1e-2);
    EXPECT_DOUBLE_EQ(mf.omega_bracket, 6 * p.sigma);
}

TEST(Config, CommentsAndWhitespace) {
    const auto cfg = parse_config("# header\n\n  model.T = 30   # pumping\r\nseed=7\n");
    EXPECT_EQ(cfg.model.T, 30.0);
    EXPECT_DOUBLE_EQ(cfg.model.params().beta0, 0.1);
    EXPECT_EQ(cfg.seed, 7u);
    EXPECT_EQ(cfg.explicit_keys.size(), 2u);
}

TEST(Config, SigmaInGigahertz) {
    const auto cfg = parse_config("model.sigma_ghz = 1.6\n");
    EXPECT_DOUBLE_EQ(cfg.model.params().sigma, 2 * kPi * 1.6);
    const auto c2 = parse_config("model.sigma_ghz = 2.5\nhole.gamma_ghz = 0.2\n");
    EXPECT_DOUBLE_EQ(c2.model.params().sigma, 2 * kPi * 2.5);
    EXPECT_DOUBLE_EQ(c2.hole.params().gamma_rad, 2 * kPi * 0.2);
}

TEST(Config, NegativePumpingTime) {
    EXPECT_EQ(code_of("model.T = -1\n"), ErrorCode::kValidationError);
    EXPECT_NE(message_of("model.T = -1\n").find("T > 0"), std::string::npos);
}

TEST(Config, UnknownKeyHasLocation) {
    const std::string text = "model.T = 26\n\nmodel.bogus = 3\n";
    EXPECT_EQ(code_of(text), ErrorCode::kParseError);
    EXPECT_NE(message_of(text).find("line 3, column 1"), std::string::npos) << message_of(text);
    EXPECT_NE(message_of(text).find("model.bogus"), std::string::npos);
}

TEST(Config, MalformedLines) {
    EXPECT_EQ(code_of("model.T 26\n"), ErrorCode::kParseError);
    EXPECT_EQ(code_of("model.T = \n"), ErrorCode::kParseError);
    EXPECT_EQ(code_of("model.T = 2x6\n"), ErrorCode::kParseError);
    EXPECT_NE(message_of("seed = 1\nmodel.T = abc\n").find("line 2, column"), std::string::npos);
    EXPECT_EQ(code_of("model.T = 26\nmodel.T = 27\n"), ErrorCode::kParseError);
    EXPECT_EQ(code_of("sweep.direction = sideways\n"), ErrorCode::kParseError);
    EXPECT_EQ(code_of("steady.nullcline = maybe\n"), ErrorCode::kParseError);
}

TEST(Config, InvariantViolations) {
    EXPECT_EQ(code_of("meanfield.ratio = 100\nmeanfield.alpha = 2\n"), ErrorCode::kValidationError);
    EXPECT_EQ(code_of("meanfield.ratio = 0\n"), ErrorCode::kValidationError);
    EXPECT_EQ(code_of("model.s_p = 0.7\n"), ErrorCode::kValidationError);
    EXPECT_EQ(code_of("model.t_rep = 10\n"), ErrorCode::kValidationError);
    EXPECT_EQ(code_of("sweep.tau_start = 2\n"), ErrorCode::kValidationError);
    EXPECT_EQ(code_of("lattice.n = 9\n"), ErrorCode::kValidationError);
    EXPECT_EQ(code_of("lattice.n = 3\n"), ErrorCode::kValidationError);  // grid oracle is 1-D or 2-D
    EXPECT_NO_THROW((void)parse_config("lattice.n = 3\noracle.method = ensemble\n"));
    EXPECT_EQ(code_of("output.precision = 0\n"), ErrorCode::kValidationError);
    EXPECT_EQ(code_of("meanfield.omega_bracket = 10\n"), ErrorCode::kValidationError);
}

TEST(Config, RatioUnitsAndExplicitAlpha) {
    const auto ns = parse_config("meanfield.ratio = 4\nmeanfield.ratio_units = ns2\n");
    const auto p = ns.model.params();
    EXPECT_DOUBLE_EQ(ns.meanfield.params(p).alpha, 0.25);
    const auto ghz = parse_config("meanfield.ratio = 1\nmeanfield.ratio_units = ghz_ns2\n");
    EXPECT_NEAR(ghz.meanfield.params(p).alpha, kTwoPi * kTwoPi, 1e-12);
    const auto a = parse_config("meanfield.kappa = 2\nmeanfield.alpha = 0\n");
    EXPECT_EQ(a.meanfield.params(p).alpha, 0.0);
    EXPECT_EQ(a.meanfield.params(p).kappa, 2.0);
}

TEST(Config, SerializationRoundTrips) {
    const std::string text =
        "model.omega0_ghz = 9.7\nmodel.T = 21.3\nmodel.beta0 = 0.2\nmeanfield.ratio = 3162.2776601683795\n"
        "meanfield.ratio_units = ghz_ns2\nsweep.tau_step = 0.0013\nsweep.direction = backward\n"
        "sweep.omega_init = -1.1\nlattice.n = 2\nlattice.d_nn = 0.3\noracle.method = ensemble\n"
        "oracle.taus = 0.2125, 0.3125,0.1\noutput.format = ndjson\noutput.precision = 9\nseed = 18446744073709551615\n"
        "steady.nullcline = false\nfringe.n_omega = 33\nhole.inv_r3 = 0.1\n";
    const auto cfg = parse_config(text);
    const auto again = parse_config(serialize_config(cfg));
    EXPECT_TRUE(cfg.same_settings(again));
    EXPECT_EQ(serialize_config(again), serialize_config(cfg));
    EXPECT_EQ(again.oracle.taus.size(), 3u);
    EXPECT_EQ(again.seed, 18446744073709551615ull);

    // Values that do not have a short decimal form survive too.
    RunConfig odd;
    odd.model.T = 1.0 / 3.0 * 70;
    odd.sweep.tau_step = 0.1 / 7;
    odd.explicit_keys = {"model.T", "sweep.tau_step"};
    EXPECT_TRUE(parse_config(serialize_config(odd)).same_settings(odd));
}

TEST(Config, EchoListsEveryKey) {
    const auto cfg = parse_config("model.T = 30\nmeanfield.alpha = 5\n");
    const auto echo = "\n" + echo_config(cfg);
    for (const auto& key : config_keys()) {
        const bool live = echo.find("\n" + key + " = ") != std::string::npos;
        const bool derived = echo.find("\n# " + key + " = ") != std::string::npos;
        EXPECT_TRUE(live || derived) << key;
    }
    EXPECT_NE(echo.find("model.T = 30\n"), std::string::npos);
    EXPECT_NE(echo.find("model.s_p = 0.5  # default"), std::string::npos);
    EXPECT_NE(echo.find("\n# model.beta0 = 0.1  # derived"), std::string::npos);
    EXPECT_NE(echo.find("# internal:"), std::string::npos);
    EXPECT_TRUE(parse_config(echo).same_settings(cfg));
}

TEST(Config, Overrides) {
    auto cfg = parse_config("model.T = 30\n");
    apply_override(cfg, "model.T=20");
    EXPECT_EQ(cfg.model.T, 20.0);
    EXPECT_THROW(apply_override(cfg, "model.T=-3"), Error);
    EXPECT_EQ(cfg.model.T, 20.0);
    try {
        apply_override(cfg, "nope=1");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::kParseError);
    }
    // Related keys change together.
    const std::vector<std::string_view> both{"sweep.tau_start=2", "sweep.tau_end=3"};
    apply_overrides(cfg, both);
    EXPECT_EQ(cfg.sweep.tau_start, 2.0);
}
