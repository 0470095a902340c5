#pragma once

#include <span>
#include <vector>

#include "snb/radial.hpp"

namespace snb::spectra {

/// Linearization of the ground-state equation restricted to the spherical
/// harmonic sector l:
///   A_l f = -f'' - (2/rho) f' + l(l+1) f/rho^2 + f - Psi f - U K_l[U f].
struct SectorOperator {
    int l = 0;
    radial::RadialGrid grid;
    std::vector<double> U, Psi; ///< profiles sampled on `grid`

    /// Strong-form application on radial samples (f ~ rho^l at the origin,
    /// Dirichlet truncation at the last node).
    std::vector<double> apply(std::span<const double> f) const;
};

/// Downsamples the ground state onto a coarser grid; gs.grid.h must divide h.
SectorOperator make_sector_operator(const radial::GroundState& gs, int l,
                                    double h, double r_max);

struct SectorSpectrum {
    int l = 0;
    std::vector<double> eigenvalues; ///< k smallest-magnitude, sorted by |mu|
    std::vector<double> residuals;   ///< ||A f - mu f|| / ||f|| per pair
    double kernel_overlap = 0.0;     ///< |<f, U'>| / (||f|| ||U'||), weight rho^2
    std::vector<double> vectors;     ///< eigenvectors in g = rho f variables,
                                     ///< column c at [c*vec_len, (c+1)*vec_len)
    std::size_t vec_len = 0;
};

/// Smallest-magnitude eigenpairs of one sector, computed from the symmetric
/// discretization in g = rho f variables (dense factorization plus inverse
/// subspace iteration).
SectorSpectrum sector_spectrum(const SectorOperator& op, int k, unsigned seed = 12345);

struct SpectrumReport {
    std::vector<SectorSpectrum> sectors;
    double h = 0, r_max = 0;
    double tol_zero = 0;       ///< eigenvalue scale counted as numerically zero
    bool nondegenerate = false;
};

struct SpectraConfig {
    double h = 1e-2;
    double r_max = 40.0;
    double overlap_min = 0.999;
    unsigned seed = 12345;
};

/// Verifies the nondegeneracy statement: exactly one near-zero eigenvalue in
/// l = 1 (the translation kernel U'), none in the other sectors up to l_max.
/// Throws KernelCountMismatch when the kernel counts disagree.
SpectrumReport nondegeneracy_report(const radial::GroundState& gs, int l_max, int k,
                                    double tol = 0.0, const SpectraConfig& cfg = {});

} // namespace snb::spectra
