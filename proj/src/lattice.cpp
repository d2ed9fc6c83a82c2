#include "qdnuc/lattice.hpp"

#include <cmath>
#include <string>

#include "qdnuc/error.hpp"

namespace qdnuc {

void Lattice::validate() const {
    const std::size_t n = size();
    require(n >= 1, "lattice: n >= 1");
    require(gamma.size() == n && f.size() == n && on_boundary.size() == n,
            "lattice: per-site arrays must have n entries");
    require(coupling.size() == n * n, "lattice: coupling must be n x n");
    require(d_bath >= 0.0, "lattice: d_bath >= 0");
    for (std::size_t j = 0; j < n; ++j) {
        require(std::isfinite(a[j]), "lattice: a[" + std::to_string(j) + "] finite");
        require(gamma[j] >= 0.0, "lattice: gamma[" + std::to_string(j) + "] >= 0");
        require(f[j] >= 0.0, "lattice: f[" + std::to_string(j) + "] >= 0");
        require(d(j, j) == 0.0, "lattice: coupling diagonal must be zero");
        for (std::size_t k = 0; k < n; ++k) {
            require(d(j, k) >= 0.0, "lattice: coupling rates >= 0");
            require(d(j, k) == d(k, j), "lattice: coupling must be symmetric");
        }
    }
}

Lattice Lattice::single_site(double a, double gamma, double f, double d_bath) {
    Lattice lat;
    lat.a = {a};
    lat.gamma = {gamma};
    lat.f = {f};
    lat.coupling = {0.0};
    lat.on_boundary = {1};
    lat.d_bath = d_bath;
    return lat;
}

Lattice Lattice::gaussian_chain(std::size_t n, double a_peak, double gamma_peak,
                                double width_sites, double d_nn, double f, double d_bath) {
    require(n >= 1, "lattice: n >= 1");
    require(width_sites > 0.0, "lattice: envelope width > 0");
    Lattice lat;
    lat.a.resize(n);
    lat.gamma.resize(n);
    lat.f.assign(n, f);
    lat.coupling.assign(n * n, 0.0);
    lat.on_boundary.assign(n, 0);
    lat.d_bath = d_bath;

    const double centre = 0.5 * static_cast<double>(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
        const double x = (static_cast<double>(j) - centre) / width_sites;
        const double env = std::exp(-0.5 * x * x);
        lat.a[j] = a_peak * env;
        lat.gamma[j] = gamma_peak * env;
        if (j + 1 < n) {
            lat.coupling[j * n + j + 1] = d_nn;
            lat.coupling[(j + 1) * n + j] = d_nn;
        }
    }
    lat.on_boundary.front() = 1;
    lat.on_boundary.back() = 1;
    return lat;
}

}  // namespace qdnuc
