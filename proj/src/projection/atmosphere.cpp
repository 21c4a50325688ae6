#include "pcno/projection/atmosphere.hpp"

#include <cmath>

namespace pcno {

namespace {

// sin(theta) broadcast over every grid point of a field whose first axis is latitude.
Eigen::ArrayXd row_sines(const GridSpec& grid, const Eigen::ArrayXd& theta)
{
  require(grid.rank() >= 1 && theta.size() == static_cast<Eigen::Index>(grid.size(0)),
          "theta needs one entry per latitude row");
  const std::size_t stride = grid.stride(0);
  Eigen::ArrayXd out(static_cast<Eigen::Index>(grid.points()));
  for (Eigen::Index row = 0; row < theta.size(); ++row) {
    const double s = std::sin(theta[row]);
    if (std::abs(s) < 1e-12)
      throw ContractError("latitude row " + std::to_string(row) + " has sin(theta) = 0 (pole on the grid)");
    out.segment(row * static_cast<Eigen::Index>(stride), static_cast<Eigen::Index>(stride)).setConstant(s);
  }
  return out;
}

} // namespace

RealField atmos_to_conserved(const RealField& ux, const RealField& uy, const RealField& h, double radius,
                             const Eigen::ArrayXd& theta)
{
  require(ux.channels() == 1 && ux.same_shape(uy) && ux.same_shape(h), "atmosphere fields must be matching scalars");
  const auto s = row_sines(h.grid(), theta);
  RealField out(h.grid(), 3);
  out.channel(0) = ux.data() * h.data();
  out.channel(1) = uy.data() * h.data() * s;
  out.channel(2) = radius * h.data() * s;
  return out;
}

AtmosState atmos_from_conserved(const RealField& c, double radius, const Eigen::ArrayXd& theta)
{
  require(c.channels() == 3, "conserved atmosphere field needs 3 channels");
  const auto s = row_sines(c.grid(), theta);
  if ((c.channel(2) == 0.0).any())
    throw ContractError("conserved atmosphere field has a zero third channel");
  AtmosState out{RealField(c.grid(), 1), RealField(c.grid(), 1), RealField(c.grid(), 1)};
  out.h.data() = c.channel(2) / (radius * s);
  out.uy.data() = radius * c.channel(1) / c.channel(2);
  out.ux.data() = c.channel(0) / out.h.data();
  return out;
}

} // namespace pcno
