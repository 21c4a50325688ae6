#pragma once

#include <vector>

#include <Eigen/Core>

#include "pcno/spectral/field.hpp"

namespace pcno {

/// Per-channel min/max scaling to [-1, 1]. A channel with r_max == r_min
/// normalizes to 0 and denormalizes to r_min.
struct ResidualNormalizer
{
  Eigen::VectorXd r_min, r_max;

  bool fitted() const { return r_min.size() > 0; }
  Eigen::Index channels() const { return r_min.size(); }

  static ResidualNormalizer fit(const std::vector<RealField>& samples);

  /// 2 (r - r_min) / (r_max - r_min) - 1
  RealField normalize(const RealField& r) const;

  /// clamp(x / 2 + 1/2, 0, 1) * (r_max - r_min) + r_min
  RealField denormalize(const RealField& x) const;
};

} // namespace pcno
