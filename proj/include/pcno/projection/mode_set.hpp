#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Core>

namespace pcno {

/// Where a free mode lands on a concrete grid. `flat == mirror` marks a
/// self-conjugate mode (the zero mode or an all-Nyquist corner).
struct ModePlacement
{
  std::size_t index; // position in the free-mode list
  std::size_t flat;  // FFT-order flat index of +m
  std::size_t mirror;
};

/// The non-redundant half of a Hermitian spectrum. A mode m is free when its
/// centred integer vector is lexicographically >= that of -m, i.e. axis 0
/// decides and ties fall through to the next axis (a closed half-space).
class HermitianModeSet
{
public:
  HermitianModeSet() = default;

  /// Modes with |m_a| < modes[a] on every axis (the FNO truncation box).
  static HermitianModeSet truncated(const std::vector<std::size_t>& modes);

  /// Every mode of a grid with the given sizes.
  static HermitianModeSet lattice(const std::vector<std::size_t>& sizes);

  std::size_t size() const { return modes_.size(); }
  std::size_t rank() const { return extent_.size(); }
  const std::vector<long>& mode(std::size_t i) const { return modes_.at(i); }
  bool is_lattice() const { return lattice_; }

  /// Box half-widths (truncated) or lattice sizes.
  const std::vector<std::size_t>& extent() const { return extent_; }

  /// Free modes representable on a grid of `sizes`. Truncated sets keep a mode
  /// only when |m_a| <= (N_a - 1) / 2 on every axis, so kernels transfer across
  /// resolutions; lattice sets require `sizes` to equal the lattice.
  std::vector<ModePlacement> placement(const std::vector<std::size_t>& sizes) const;

  bool operator==(const HermitianModeSet&) const = default;

private:
  std::vector<std::vector<long>> modes_;
  std::vector<std::size_t> extent_;
  bool lattice_ = false;
};

/// Per-channel diagonal multiplier over a mode set, expanded Hermitian-symmetrically.
/// Self-conjugate modes use the real part of their weight.
struct HermitianMultiplier
{
  HermitianModeSet modes;
  Eigen::MatrixXcd weights; // free modes x channels

  Eigen::Index channels() const { return weights.cols(); }

  /// Full FFT-order multiplier for `channel` on a grid; absent modes take `fill`.
  Eigen::ArrayXcd expand(const std::vector<std::size_t>& sizes, Eigen::Index channel,
                         std::complex<double> fill) const;

  /// All-ones weights.
  static HermitianMultiplier unit(HermitianModeSet modes, Eigen::Index channels);
};

/// Gradient of sum_x g(x) * IFFT(K * X)(x) with respect to the free weights of K,
/// given X = FFT(x) and G = FFT(g) of one channel (FFT order). Real and
/// imaginary parts of the result are the derivatives by Re(w) and Im(w).
void accumulate_multiplier_gradient(const std::vector<ModePlacement>& placement, const Eigen::ArrayXcd& x_hat,
                                    const Eigen::ArrayXcd& g_hat, Eigen::Ref<Eigen::VectorXcd> grad);

} // namespace pcno
