#pragma once

// Spatial-Fourier diagnostics of a field state.
//
// Transforms use the continuous-transform normalisation
//   f^(k) = dz * sum_j f_j exp(-i k z_j),   z_j = (j + 1/2) dz,
// on the wavenumbers k_m = 2 pi m / L, m = -floor(n/2) .. ceil(n/2) - 1, so that
// sum_m |f^(k_m)|^2 / L equals dz * sum_j |f_j|^2.

#include <vector>

#include "gemsim/core.hpp"

namespace gemsim {

struct PolaritonSpectrum {
    double time = 0.0;
    RealVector k;              // ascending
    ComplexVector psi;         // k E^ + N sigma^
    ComplexVector coherence;   // sigma^
    ComplexVector field;       // E^
    double sample_length = 0.0;

    double spacing() const { return 2.0 * kPi / sample_length; }
    /// sum |psi|^2 / L
    double energy() const;
};

struct ModePopulations {
    std::vector<int> orders;
    std::vector<double> weights;
    double residual = 0.0;

    double weight(int order) const;
};

/// Ascending DFT wavenumbers for the sample grid.
RealVector wavenumbers(const SimulationParams& params);

/// Forward transform of a cell-centred profile, ascending-k order.
ComplexVector spatial_transform(const ComplexVector& profile, const SimulationParams& params);
/// Inverse of spatial_transform().
ComplexVector inverse_spatial_transform(const ComplexVector& spectrum, const SimulationParams& params);

/// Builds Psi(k) = k E^(k) + N sigma^(k). Throws Error(Domain) if the state does
/// not live on the parameter grid and Error(Numerical) if Parseval fails.
PolaritonSpectrum to_spectrum(const FieldState& state, const SimulationParams& params);

/// Jacobi-Anger prediction of a phase-grating window of area nu * tau:
///   out(k) = sum_{|n| <= n_trunc} i^n J_n(nu tau) e^{i n phi} in(k - n k_R)
/// with cyclic wrap on the DFT grid (sign-flipped per wrap, matching pointwise
/// multiplication of cell-centred samples). Applies to psi, coherence and field alike.
/// Throws Error(Domain) when k_R is not a multiple of the grid spacing.
PolaritonSpectrum kd_oracle(const PolaritonSpectrum& spectrum, double nu, double tau, double grating_wavenumber,
                            double phase, int n_trunc);

/// Smallest truncation the oracle accepts for a given modulation depth.
int kd_truncation(double depth);

/// Fraction of sum |psi|^2 in the bins |k - k_center - n k_R| < k_R / 2 for |n| <= n_max.
ModePopulations mode_populations(const PolaritonSpectrum& spectrum, double grating_wavenumber, double k_center,
                                 int n_max);

/// |psi|^2-weighted mean wavenumber.
double spectral_centroid(const PolaritonSpectrum& spectrum);

}  // namespace gemsim
