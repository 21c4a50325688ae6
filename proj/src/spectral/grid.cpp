#include "pcno/spectral/grid.hpp"

#include <cmath>

#include "pcno/core/error.hpp"

namespace pcno {

GridSpec::GridSpec(std::vector<Axis> axes) : axes_(std::move(axes))
{
  require(!axes_.empty(), "grid needs at least one axis");
  int temporal = 0;
  for (const auto& a : axes_) {
    require(a.size >= 2 || (a.kind == AxisKind::temporal && a.size == 1),
            "axis `" + a.name + "` must have size >= 2 (1 is allowed for a temporal axis)");
    require(std::isfinite(a.extent) && a.extent > 0.0, "axis `" + a.name + "` must have a positive extent");
    if (a.kind == AxisKind::temporal)
      ++temporal;
  }
  require(temporal <= 1, "at most one temporal axis is allowed");

  strides_.assign(axes_.size(), 1);
  points_ = 1;
  for (std::size_t i = axes_.size(); i-- > 0;) {
    strides_[i] = points_;
    points_ *= axes_[i].size;
  }
}

GridSpec GridSpec::periodic(std::vector<std::size_t> sizes, double extent)
{
  std::vector<Axis> axes;
  for (std::size_t i = 0; i < sizes.size(); ++i)
    axes.push_back({"x" + std::to_string(i), sizes[i], extent, AxisKind::spatial});
  return GridSpec(std::move(axes));
}

std::vector<std::size_t> GridSpec::sizes() const
{
  std::vector<std::size_t> out;
  for (const auto& a : axes_)
    out.push_back(a.size);
  return out;
}

std::optional<std::size_t> GridSpec::temporal_axis() const
{
  for (std::size_t i = 0; i < axes_.size(); ++i)
    if (axes_[i].kind == AxisKind::temporal)
      return i;
  return std::nullopt;
}

std::vector<std::size_t> GridSpec::spatial_axes() const
{
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < axes_.size(); ++i)
    if (axes_[i].kind == AxisKind::spatial)
      out.push_back(i);
  return out;
}

GridSpec GridSpec::resized(const std::vector<std::size_t>& sizes) const
{
  require(sizes.size() == axes_.size(), "resized: rank mismatch");
  std::vector<Axis> axes = axes_;
  for (std::size_t i = 0; i < axes.size(); ++i) {
    axes[i].extent = spacing(i) * static_cast<double>(sizes[i]);
    axes[i].size = sizes[i];
  }
  return GridSpec(std::move(axes));
}

GridSpec GridSpec::without_axis(std::size_t i) const
{
  require(i < axes_.size() && axes_.size() > 1, "without_axis: invalid axis");
  std::vector<Axis> axes = axes_;
  axes.erase(axes.begin() + static_cast<std::ptrdiff_t>(i));
  return GridSpec(std::move(axes));
}

std::vector<long> fft_frequencies(std::size_t n)
{
  std::vector<long> f(n);
  const long ln = static_cast<long>(n);
  for (long j = 0; j < ln; ++j)
    f[j] = (j < (ln + 1) / 2) ? j : j - ln;
  return f;
}

std::vector<std::size_t> unravel(std::size_t flat, const std::vector<std::size_t>& sizes)
{
  std::vector<std::size_t> index(sizes.size());
  for (std::size_t i = sizes.size(); i-- > 0;) {
    index[i] = flat % sizes[i];
    flat /= sizes[i];
  }
  return index;
}

std::size_t ravel(const std::vector<std::size_t>& index, const std::vector<std::size_t>& sizes)
{
  std::size_t flat = 0;
  for (std::size_t i = 0; i < sizes.size(); ++i)
    flat = flat * sizes[i] + index[i];
  return flat;
}

} // namespace pcno
