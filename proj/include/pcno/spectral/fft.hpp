#pragma once

// Forward transforms are unnormalized; inverse transforms divide by the
// number of grid points. Parseval therefore reads
//   sum |f|^2 = sum |coeff|^2 / points.

#include <complex>
#include <vector>

#include "pcno/spectral/field.hpp"

namespace pcno {

enum class ShiftDirection { forward, inverse };

/// In-place N-dimensional complex DFT of one channel laid out row-major.
void fft_inplace(std::complex<double>* data, const std::vector<std::size_t>& sizes, bool inverse);

SpectralField fft_forward(const RealField& f);

/// Requires a Hermitian, uncentered spectrum; throws ContractError when the
/// flagged symmetry does not hold.
RealField fft_inverse(const SpectralField& s);

/// Complex-to-complex transforms, no symmetry assumptions.
ComplexField fft_forward_complex(const ComplexField& f);
ComplexField fft_inverse_complex(const ComplexField& s);

/// Moves the zero mode to the array centre (forward) or back (inverse).
SpectralField fft_center_shift(const SpectralField& s, ShiftDirection direction);

/// Flat index of the mode -k for the mode stored at `flat`.
std::size_t negated_index(std::size_t flat, const std::vector<std::size_t>& sizes);

/// Flat index of -k for every flat index k (cached per thread).
const std::vector<std::size_t>& mirror_table(const std::vector<std::size_t>& sizes);

/// Replaces every coefficient pair by its Hermitian part
/// (s(k) + conj(s(-k))) / 2. Operators that preserve the symmetry in exact
/// arithmetic call this so cancellation noise cannot trip fft_inverse.
void symmetrize(SpectralField& s);

/// max |coeff(-k) - conj(coeff(k))| relative to max |coeff| (0 for a zero spectrum).
double hermitian_defect(const ComplexField& s);

/// Tolerance used by fft_inverse to accept a spectrum as Hermitian.
inline constexpr double kHermitianTolerance = 1e-9;

} // namespace pcno
