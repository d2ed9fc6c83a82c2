#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace qdnuc {

/// Nuclear sites seen by the electron. Site magnetizations are dimensionless;
/// the Overhauser shift is sum_j a[j] * m[j].
struct Lattice {
    std::vector<double> a;      ///< hyperfine weight [rad/ns per unit magnetization]
    std::vector<double> gamma;  ///< trion-induced flip rate [1/ns]
    std::vector<double> f;      ///< fluctuating spin-diffusion constant [1/ns]
    /// Symmetric site-to-site diffusion rates, row-major n x n, zero diagonal [1/ns].
    std::vector<double> coupling;
    /// Nonzero for sites that exchange magnetization with the unpolarized bath.
    std::vector<std::uint8_t> on_boundary;
    double d_bath = 0.0;  ///< boundary-to-bath rate [1/ns]

    [[nodiscard]] std::size_t size() const noexcept { return a.size(); }
    [[nodiscard]] double d(std::size_t j, std::size_t k) const { return coupling[j * size() + k]; }

    /// Throws VALIDATION_ERROR on inconsistent sizes, negative rates, or asymmetric coupling.
    void validate() const;

    [[nodiscard]] static Lattice single_site(double a, double gamma, double f, double d_bath);

    /// 1-D chain with a Gaussian hyperfine envelope centred on the chain and
    /// trion rates following the same envelope. Both chain ends touch the bath.
    [[nodiscard]] static Lattice gaussian_chain(std::size_t n, double a_peak, double gamma_peak,
                                                double width_sites, double d_nn, double f,
                                                double d_bath);
};

}  // namespace qdnuc
