#pragma once

// Spectral calculus on periodic grids. Derivatives multiply mode k by i*k_j;
// on even axes the Nyquist mode is zeroed by every odd-order derivative,
// since i*k is sign-ambiguous there.

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "pcno/spectral/field.hpp"

namespace pcno {

/// Per-axis angular wavenumbers k = 2*pi*n / L with n in FFT order.
struct Wavenumbers
{
  std::vector<Eigen::ArrayXd> axes;
};

/// Wavenumbers with the even-axis Nyquist frequency carried as -pi*N/L.
Wavenumbers wavenumbers(const GridSpec& grid);

/// Wavenumbers used by first derivatives: identical except Nyquist -> 0.
Wavenumbers derivative_wavenumbers(const GridSpec& grid);

/// k along `axis` evaluated at every flat point of the grid.
Eigen::ArrayXd wavenumber_field(const GridSpec& grid, std::size_t axis, bool derivative);

/// |k|^2 at every flat point (full wavenumbers).
Eigen::ArrayXd wavenumber_norm2(const GridSpec& grid);

SpectralField spectral_gradient(const SpectralField& s, std::size_t axis);

/// Sum_j i k_j v_j; channel j is differentiated along axis j.
SpectralField spectral_divergence(const SpectralField& v);

SpectralField spectral_laplacian(const SpectralField& s);

/// Divides by -|k|^2; the zero mode maps to zero.
SpectralField spectral_laplacian_inverse(const SpectralField& s);

/// Real-space conveniences built from the spectral operators.
RealField gradient(const RealField& f, std::size_t axis);
RealField divergence(const RealField& v);

} // namespace pcno
