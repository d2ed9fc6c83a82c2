#include "qdnuc/model.hpp"

#include <cmath>

#include "qdnuc/error.hpp"
#include "qdnuc/units.hpp"

namespace qdnuc {

namespace {

constexpr int kMaxSquarings = 64;

struct FringeFactors {
    double u;   // 1 - q
    double q;
    double v;   // 1 - cos(theta)
    double c;   // cos(theta)
    double s;   // sin(theta)
};

FringeFactors fringe_factors(double omega, double tau, const ModelParams& p) {
    const double b = pump_rate(omega, p) * p.T;
    const double theta = (p.omega0 + omega) * tau;
    const double half = std::sin(0.5 * theta);
    return {-std::expm1(-b), std::exp(-b), 2.0 * half * half, std::cos(theta), std::sin(theta)};
}

}  // namespace

ModelParams ModelParams::defaults() {
    ModelParams p;
    p.T = 26.0;
    p.beta0 = 3.0 / p.T;
    p.sigma = ghz_to_rad_per_ns(1.6);
    p.s_p = 0.5;
    p.t_rep = 143.0;
    p.omega0 = ghz_to_rad_per_ns(10.0);
    return p;
}

void ModelParams::validate() const {
    require(std::isfinite(omega0), "model: omega0 must be finite");
    require(T > 0.0, "model: T > 0");
    require(beta0 >= 0.0, "model: beta0 >= 0");
    require(sigma > 0.0, "model: sigma > 0");
    require(s_p > 0.0 && s_p <= 0.5, "model: 0 < s_p <= 1/2");
    require(t_rep >= T, "model: t_rep >= T");
}

HoleNuclearParams HoleNuclearParams::defaults() {
    HoleNuclearParams h;
    h.b0 = 4.0;
    h.g_h = 1.0;
    h.gamma_rad = ghz_to_rad_per_ns(0.1);
    h.inv_r3_avg = 0.65;
    return h;
}

void HoleNuclearParams::validate() const {
    require(b0 > 0.0, "hole: b0 > 0");
    require(g_h > 0.0, "hole: g_h > 0");
    require(gamma_rad > 0.0, "hole: gamma_rad > 0");
    require(inv_r3_avg > 0.0, "hole: inv_r3_avg > 0");
}

double pump_rate(double omega, const ModelParams& p) {
    const double x = omega / p.sigma;
    return p.beta0 * std::exp(-0.5 * x * x);
}

double count_rate(double omega, double tau, const ModelParams& p) {
    const auto ff = fringe_factors(omega, tau, p);
    const double den = ff.u + ff.v - ff.u * ff.v;
    if (den <= 0.0) {
        return 0.0;
    }
    return p.s_p * ff.u * ff.v / den;
}

CountRateJet count_rate_jet(double omega, double tau, const ModelParams& p) {
    const auto ff = fringe_factors(omega, tau, p);
    const double u = ff.u;
    const double v = ff.v;
    const double den = u + v - u * v;
    if (den <= 0.0) {
        return {};
    }

    // b = beta T is Gaussian in omega; u = 1 - exp(-b).
    const double inv_s2 = 1.0 / (p.sigma * p.sigma);
    const double b = pump_rate(omega, p) * p.T;
    const double b1 = -omega * inv_s2 * b;
    const double b2 = (omega * omega * inv_s2 - 1.0) * inv_s2 * b;
    const double u1 = b1 * ff.q;
    const double u2 = (b2 - b1 * b1) * ff.q;

    const double v1 = tau * ff.s;
    const double v2 = tau * tau * ff.c;

    // Partials of F(u, v) = u v / (u + v - u v).
    const double inv_d = 1.0 / den;
    const double inv_d2 = inv_d * inv_d;
    const double inv_d3 = inv_d2 * inv_d;
    const double fu = v * v * inv_d2;
    const double fv = u * u * inv_d2;
    const double fuu = -2.0 * v * v * (1.0 - v) * inv_d3;
    const double fvv = -2.0 * u * u * (1.0 - u) * inv_d3;
    const double fuv = 2.0 * u * v * inv_d3;

    CountRateJet jet;
    jet.value = p.s_p * u * v * inv_d;
    jet.d1 = p.s_p * (fu * u1 + fv * v1);
    jet.d2 = p.s_p * (fuu * u1 * u1 + 2.0 * fuv * u1 * v1 + fvv * v1 * v1 + fu * u2 + fv * v2);
    return jet;
}

PulseMapResult pulse_map_fixed_point(double omega, double tau, const ModelParams& p) {
    const double q = std::exp(-pump_rate(omega, p) * p.T);
    const double c = std::cos((p.omega0 + omega) * tau);
    const double pump_gain = p.s_p * (1.0 - q);

    // One period acting on s_f: s_i = c s_f, then s_f' = s_p + (s_i - s_p) q.
    const auto one_period = [&](double s_f) { return q * c * s_f + pump_gain; };

    double a = q * c;
    double b = pump_gain;
    double s_f = 0.0;
    PulseMapResult r;
    for (int k = 0; k < kMaxSquarings; ++k) {
        s_f = a * s_f + b;
        b = a * b + b;
        a = a * a;
        r.periods_log2 = k + 1;
        if (a == 0.0) {
            break;
        }
    }

    r.residual = std::abs(one_period(s_f) - s_f);
    r.converged = (a == 0.0) && r.residual <= 1e-13;
    if (!r.converged) {
        // Neutral map: no pumping and no net precession, so nothing is measured.
        r.state = {s_f, c * s_f};
        r.count = 0.0;
        return r;
    }
    r.state = {s_f, c * s_f};
    r.count = r.state.s_f - r.state.s_i;
    return r;
}

double trion_flip_rate(const HoleNuclearParams& h) {
    using namespace constants;
    const double prefactor = 9.0 * kMu0 * kMu0 / (128.0 * kPi);
    const double zeeman = kBohrMagneton * h.g_h / h.b0;
    const double r3 = h.inv_r3_avg * kPerNm3ToPerM3;
    // gamma in rad/ns gives the rate directly in 1/ns.
    return prefactor * zeeman * zeeman * h.gamma_rad * r3 * r3;
}

double alpha_from_lattice(const Lattice& lat) {
    require(lat.size() >= 1 && lat.gamma.size() == lat.size(), "lattice: nonempty with gamma per site");
    double alpha = 0.0;
    for (std::size_t j = 0; j < lat.size(); ++j) {
        alpha += lat.gamma[j] * lat.a[j] * lat.a[j];
    }
    return alpha;
}

}  // namespace qdnuc
