#pragma once

// Pointwise coefficients shared by the grid and trajectory oracles.

#include <optional>
#include <span>

#include "qdnuc/lattice.hpp"
#include "qdnuc/model.hpp"

namespace qdnuc::detail {

struct CountField {
    double omega = 0.0;
    double c = 0.0;
    double c1 = 0.0;
    double c2 = 0.0;
};

inline CountField count_field(const Lattice& lat, std::span<const double> m, double tau,
                              const ModelParams& p, std::optional<double> frozen) {
    CountField cf;
    for (std::size_t j = 0; j < lat.size(); ++j) {
        cf.omega += lat.a[j] * m[j];
    }
    if (frozen) {
        cf.c = *frozen;
        return cf;
    }
    const auto jet = count_rate_jet(cf.omega, tau, p);
    cf.c = jet.value;
    cf.c1 = jet.d1;
    cf.c2 = jet.d2;
    return cf;
}

/// sum_k D_jk (m_j - m_k) + d_bath m_j on boundary sites.
inline double restoring_rate(const Lattice& lat, std::span<const double> m, std::size_t j) {
    double r = 0.0;
    for (std::size_t k = 0; k < lat.size(); ++k) {
        r += lat.d(j, k) * (m[j] - m[k]);
    }
    if (lat.on_boundary[j] != 0) {
        r += lat.d_bath * m[j];
    }
    return r;
}

inline double site_diffusion(const Lattice& lat, std::size_t j, const CountField& cf) {
    return lat.f[j] + lat.gamma[j] * cf.c;
}

/// d^2/dm_j^2 [m_j Gamma_j C(Omega)].
inline double site_trion_drift(const Lattice& lat, std::size_t j, double m_j, const CountField& cf) {
    return lat.gamma[j] * lat.a[j] * (2.0 * cf.c1 + lat.a[j] * m_j * cf.c2);
}

}  // namespace qdnuc::detail
