#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace pcno {

enum class AxisKind { spatial, temporal };

struct Axis
{
  std::string name;
  std::size_t size = 0;
  double extent = 1.0;
  AxisKind kind = AxisKind::spatial;

  bool operator==(const Axis&) const = default;
};

/// Periodic grid geometry shared by every field. Axes keep their declared
/// order; the last axis is the fastest-varying one in memory.
class GridSpec
{
public:
  GridSpec() = default;
  explicit GridSpec(std::vector<Axis> axes);

  /// Spatial axes named x0, x1, ... with a common extent.
  static GridSpec periodic(std::vector<std::size_t> sizes, double extent = 1.0);

  std::size_t rank() const { return axes_.size(); }
  const std::vector<Axis>& axes() const { return axes_; }
  const Axis& axis(std::size_t i) const { return axes_.at(i); }
  std::size_t size(std::size_t i) const { return axes_.at(i).size; }
  double extent(std::size_t i) const { return axes_.at(i).extent; }
  double spacing(std::size_t i) const { return extent(i) / static_cast<double>(size(i)); }
  std::vector<std::size_t> sizes() const;

  /// Number of grid points (product of axis sizes).
  std::size_t points() const { return points_; }
  std::size_t stride(std::size_t i) const { return strides_.at(i); }

  std::optional<std::size_t> temporal_axis() const;
  std::vector<std::size_t> spatial_axes() const;

  /// Same axes with the given sizes; extents scale with the size ratio so the
  /// spacing is unchanged.
  GridSpec resized(const std::vector<std::size_t>& sizes) const;

  /// Grid without axis `i`.
  GridSpec without_axis(std::size_t i) const;

  bool operator==(const GridSpec& other) const { return axes_ == other.axes_; }

private:
  std::vector<Axis> axes_;
  std::vector<std::size_t> strides_;
  std::size_t points_ = 0;
};

/// Integer frequencies of an axis in FFT order: 0, 1, ..., -1
/// (even sizes carry the Nyquist frequency as -n/2).
std::vector<long> fft_frequencies(std::size_t n);

/// Multi-index of flat point `flat` on a grid with the given sizes.
std::vector<std::size_t> unravel(std::size_t flat, const std::vector<std::size_t>& sizes);
std::size_t ravel(const std::vector<std::size_t>& index, const std::vector<std::size_t>& sizes);

} // namespace pcno
