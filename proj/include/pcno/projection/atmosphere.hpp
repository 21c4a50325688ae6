#pragma once

#include "pcno/spectral/field.hpp"

namespace pcno {

// Flux variables of a shallow atmosphere on a latitude-longitude grid:
//   (u_x h, u_y h sin(theta), R h sin(theta)).
// Latitude runs along the first axis; `theta` holds the angle of each row in
// radians and sin(theta) must not vanish on any row.

RealField atmos_to_conserved(const RealField& ux, const RealField& uy, const RealField& h, double radius,
                             const Eigen::ArrayXd& theta);

struct AtmosState
{
  RealField ux, uy, h;
};

AtmosState atmos_from_conserved(const RealField& c, double radius, const Eigen::ArrayXd& theta);

} // namespace pcno
