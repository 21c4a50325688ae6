#pragma once

#include <array>
#include <optional>

#include "pcno/core/rng.hpp"
#include "pcno/projection/mode_set.hpp"
#include "pcno/spectral/field.hpp"

namespace pcno {

/// Fixed 3x3 stencil with one value per orbit of the 90-degree rotations:
/// centre c, edges e, corners r. Applied channel-wise with periodic wrap on
/// the last two spatial axes ([e c e] on a single spatial axis).
struct InvariantConvP4
{
  double center = 1.0;
  double edge = 0.0;
  double corner = 0.0;

  std::array<std::array<double, 3>, 3> stencil() const;
  RealField apply(const RealField& f) const;
  bool is_identity() const { return center == 1.0 && edge == 0.0 && corner == 0.0; }
};

/// Hermitian kernel on a full centred mode lattice. Only the free half is
/// stored; the rest is its 180-degree rotation about the lattice centre,
/// conjugated, which is the same as K(-k) = conj(K(k)).
struct RotationInvariantKernel
{
  HermitianMultiplier multiplier;

  const std::vector<std::size_t>& lattice() const { return multiplier.modes.extent(); }
  Eigen::Index channels() const { return multiplier.channels(); }

  /// Kernel values in centred layout (zero mode at index floor(N/2) per axis).
  Eigen::ArrayXcd centered(Eigen::Index channel) const;

  static RotationInvariantKernel unit(const std::vector<std::size_t>& lattice, Eigen::Index channels);
  static RotationInvariantKernel random(const std::vector<std::size_t>& lattice, Eigen::Index channels, Rng& rng);
};

/// Centred index reached by rotating centred index c by 180 degrees on an axis of size n.
std::size_t rotate180(std::size_t c, std::size_t n);

struct MomentumProjection
{
  std::optional<RotationInvariantKernel> kernel; // unit kernel when absent
  InvariantConvP4 w_inv;
  std::optional<std::vector<std::size_t>> padding; // default_padding when absent
};

/// ceil(N/4) zero cells per spatial axis, none on a temporal axis.
std::vector<std::size_t> default_padding(const GridSpec& grid);

/// Padding in effect for `m` on `grid`.
std::vector<std::size_t> momentum_padding(const GridSpec& grid, const MomentumProjection& m);

/// Kernel lattice (padded grid sizes) required by `m` on `grid`.
std::vector<std::size_t> momentum_lattice(const GridSpec& grid, const MomentumProjection& m);

/// y = W_inv v + W_inv crop(IFFT(unshift(K . shift(FFT(pad v))))).
RealField project_momentum(const RealField& v, const MomentumProjection& m);

struct MomentumProjectionGradient
{
  RealField input;
  Eigen::MatrixXcd kernel; // empty when the projection has no explicit kernel
};

MomentumProjectionGradient project_momentum_vjp(const RealField& v, const RealField& g, const MomentumProjection& m);

} // namespace pcno
