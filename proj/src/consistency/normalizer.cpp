#include "pcno/consistency/normalizer.hpp"

#include <limits>

namespace pcno {

ResidualNormalizer ResidualNormalizer::fit(const std::vector<RealField>& samples)
{
  require(!samples.empty(), "normalizer needs at least one sample");
  const Eigen::Index ch = samples.front().channels();
  ResidualNormalizer n;
  n.r_min = Eigen::VectorXd::Constant(ch, std::numeric_limits<double>::infinity());
  n.r_max = Eigen::VectorXd::Constant(ch, -std::numeric_limits<double>::infinity());
  for (const auto& s : samples) {
    require(s.channels() == ch, "normalizer samples differ in channel count");
    require_finite(s, "normalizer sample");
    for (Eigen::Index c = 0; c < ch; ++c) {
      n.r_min[c] = std::min(n.r_min[c], s.channel(c).minCoeff());
      n.r_max[c] = std::max(n.r_max[c], s.channel(c).maxCoeff());
    }
  }
  return n;
}

RealField ResidualNormalizer::normalize(const RealField& r) const
{
  require(fitted(), "normalizer has not been fitted");
  require(r.channels() == channels(), "normalizer channel count mismatch");
  RealField out = r;
  for (Eigen::Index c = 0; c < channels(); ++c) {
    const double range = r_max[c] - r_min[c];
    if (range > 0.0)
      out.channel(c) = 2.0 * (r.channel(c) - r_min[c]) / range - 1.0;
    else
      out.channel(c).setZero();
  }
  return out;
}

RealField ResidualNormalizer::denormalize(const RealField& x) const
{
  require(fitted(), "normalizer has not been fitted");
  require(x.channels() == channels(), "normalizer channel count mismatch");
  RealField out = x;
  for (Eigen::Index c = 0; c < channels(); ++c)
    out.channel(c) = (0.5 * x.channel(c) + 0.5).max(0.0).min(1.0) * (r_max[c] - r_min[c]) + r_min[c];
  return out;
}

} // namespace pcno
