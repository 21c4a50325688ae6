#include "pcno/spectral/field_ops.hpp"

namespace pcno {

RealField zero_pad(const RealField& f, const std::vector<std::size_t>& extra)
{
  const auto sizes = f.grid().sizes();
  require(extra.size() == sizes.size(), "zero_pad: one padding entry per axis required");
  std::vector<std::size_t> padded = sizes;
  for (std::size_t a = 0; a < sizes.size(); ++a)
    padded[a] += extra[a];
  RealField out(f.grid().resized(padded), f.channels());
  for (std::size_t p = 0; p < f.grid().points(); ++p) {
    const auto q = static_cast<Eigen::Index>(ravel(unravel(p, sizes), padded));
    for (Eigen::Index c = 0; c < f.channels(); ++c)
      out(c, q) = f(c, static_cast<Eigen::Index>(p));
  }
  return out;
}

RealField crop(const RealField& f, const std::vector<std::size_t>& sizes)
{
  const auto full = f.grid().sizes();
  require(sizes.size() == full.size(), "crop: rank mismatch");
  for (std::size_t a = 0; a < sizes.size(); ++a)
    require(sizes[a] <= full[a], "crop: target larger than field");
  RealField out(f.grid().resized(sizes), f.channels());
  for (std::size_t p = 0; p < out.grid().points(); ++p) {
    const auto q = static_cast<Eigen::Index>(ravel(unravel(p, sizes), full));
    for (Eigen::Index c = 0; c < f.channels(); ++c)
      out(c, static_cast<Eigen::Index>(p)) = f(c, q);
  }
  return out;
}

RealField circular_shift(const RealField& f, const std::vector<long>& shift)
{
  const auto sizes = f.grid().sizes();
  require(shift.size() == sizes.size(), "circular_shift: one shift per axis required");
  RealField out(f.grid(), f.channels());
  std::vector<std::size_t> dst(sizes.size());
  for (std::size_t p = 0; p < f.grid().points(); ++p) {
    const auto src = unravel(p, sizes);
    for (std::size_t a = 0; a < sizes.size(); ++a) {
      const long n = static_cast<long>(sizes[a]);
      dst[a] = static_cast<std::size_t>(((static_cast<long>(src[a]) + shift[a]) % n + n) % n);
    }
    const auto q = static_cast<Eigen::Index>(ravel(dst, sizes));
    for (Eigen::Index c = 0; c < f.channels(); ++c)
      out(c, q) = f(c, static_cast<Eigen::Index>(p));
  }
  return out;
}

RealField time_slice(const RealField& trajectory, std::size_t t)
{
  const auto& grid = trajectory.grid();
  require(grid.rank() >= 2, "time_slice: trajectory needs a leading time axis and at least one more axis");
  require(t < grid.size(0), "time_slice: frame index out of range");
  const GridSpec frame_grid = grid.without_axis(0);
  const auto frame_points = static_cast<Eigen::Index>(frame_grid.points());
  RealField out(frame_grid, trajectory.channels());
  for (Eigen::Index c = 0; c < trajectory.channels(); ++c)
    out.channel(c) = trajectory.channel(c).segment(static_cast<Eigen::Index>(t) * frame_points, frame_points);
  return out;
}

RealField stack_frames(const std::vector<RealField>& frames, const Axis& leading)
{
  require(!frames.empty(), "stack_frames: no frames");
  const auto& first = frames.front();
  std::vector<Axis> axes{leading};
  axes.front().size = frames.size();
  for (const auto& a : first.grid().axes())
    axes.push_back(a);
  RealField out(GridSpec(std::move(axes)), first.channels());
  const Eigen::Index fp = first.points();
  for (std::size_t t = 0; t < frames.size(); ++t) {
    require(frames[t].same_shape(first), "stack_frames: frame shapes differ");
    for (Eigen::Index c = 0; c < first.channels(); ++c)
      out.channel(c).segment(static_cast<Eigen::Index>(t) * fp, fp) = frames[t].channel(c);
  }
  return out;
}

RealField concat_channels(const std::vector<RealField>& parts)
{
  require(!parts.empty(), "concat_channels: nothing to concatenate");
  Eigen::Index total = 0;
  for (const auto& p : parts) {
    require(p.grid().sizes() == parts.front().grid().sizes(), "concat_channels: grid mismatch");
    total += p.channels();
  }
  RealField out(parts.front().grid(), total);
  Eigen::Index offset = 0;
  for (const auto& p : parts) {
    out.data().segment(offset * out.points(), p.data().size()) = p.data();
    offset += p.channels();
  }
  return out;
}

double squared_norm(const RealField& f)
{
  return f.data().square().sum();
}

} // namespace pcno
