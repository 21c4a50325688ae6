#pragma once

#include <complex>
#include <string>

#include <Eigen/Core>

#include "pcno/core/error.hpp"
#include "pcno/spectral/grid.hpp"

namespace pcno {

/// Multi-channel values on a grid. Storage is channel-major: channel c occupies
/// the contiguous block [c * points, (c + 1) * points), row-major over axes.
template <typename Scalar>
class Field
{
public:
  using scalar_type = Scalar;
  using Storage = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Field() = default;

  Field(GridSpec grid, Eigen::Index channels)
    : grid_(std::move(grid)), channels_(channels),
      data_(Storage::Zero(channels * static_cast<Eigen::Index>(grid_.points())))
  {
    require(channels > 0, "field needs at least one channel");
  }

  Field(GridSpec grid, Eigen::Index channels, Storage data)
    : grid_(std::move(grid)), channels_(channels), data_(std::move(data))
  {
    require(channels > 0, "field needs at least one channel");
    require(data_.size() == channels * points(),
            "field data length " + std::to_string(data_.size()) + " does not match " +
              std::to_string(channels) + " x " + std::to_string(points()));
  }

  const GridSpec& grid() const { return grid_; }
  Eigen::Index channels() const { return channels_; }
  Eigen::Index points() const { return static_cast<Eigen::Index>(grid_.points()); }

  Storage& data() { return data_; }
  const Storage& data() const { return data_; }

  auto channel(Eigen::Index c) { return data_.segment(c * points(), points()); }
  auto channel(Eigen::Index c) const { return data_.segment(c * points(), points()); }

  /// points x channels view; column c is channel c.
  Eigen::Map<Matrix> matrix() { return {data_.data(), points(), channels_}; }
  Eigen::Map<const Matrix> matrix() const { return {data_.data(), points(), channels_}; }

  Scalar& operator()(Eigen::Index c, Eigen::Index point) { return data_[c * points() + point]; }
  Scalar operator()(Eigen::Index c, Eigen::Index point) const { return data_[c * points() + point]; }

  bool same_shape(const Field& other) const
  {
    return channels_ == other.channels_ && grid_.sizes() == other.grid_.sizes();
  }

private:
  GridSpec grid_;
  Eigen::Index channels_ = 0;
  Storage data_;
};

using RealField = Field<double>;
using ComplexField = Field<std::complex<double>>;

/// Fourier coefficients of a real field. `hermitian` asserts
/// coeff(-k) = conj(coeff(k)); `centered` marks a frequency-shifted layout
/// with the zero mode in the middle of every axis.
class SpectralField : public ComplexField
{
public:
  SpectralField() = default;
  SpectralField(GridSpec grid, Eigen::Index channels, bool hermitian = true)
    : ComplexField(std::move(grid), channels), hermitian(hermitian)
  {}
  SpectralField(GridSpec grid, Eigen::Index channels, Storage data, bool hermitian = true)
    : ComplexField(std::move(grid), channels, std::move(data)), hermitian(hermitian)
  {}

  bool hermitian = true;
  bool centered = false;
};

inline bool all_finite(const RealField& f)
{
  return f.data().isFinite().all();
}

inline void require_finite(const RealField& f, const std::string& what)
{
  if (!all_finite(f))
    throw ContractError(what + ": field contains non-finite values");
}

/// Channels [first, first + count) of `f` as a new field.
inline RealField channel_slice(const RealField& f, Eigen::Index first, Eigen::Index count)
{
  require(first >= 0 && count > 0 && first + count <= f.channels(), "channel_slice out of range");
  return RealField(f.grid(), count, f.data().segment(first * f.points(), count * f.points()));
}

} // namespace pcno
