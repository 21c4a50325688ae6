#pragma once

#include <string>
#include <string_view>

#include "pcno/projection/mass.hpp"
#include "pcno/projection/momentum.hpp"

namespace pcno {

enum class Selector { none, mass, momentum, both };

Selector parse_selector(std::string_view name);
std::string to_string(Selector s);

struct ProjectionParams
{
  MassProjectionConfig mass;
  MomentumProjection momentum;
};

/// none: identity; mass / momentum: that stage alone; both: momentum(mass(v)).
RealField compose_projection(const RealField& v, Selector selector, const ProjectionParams& params = {});

struct ProjectionGradient
{
  RealField input;
  Eigen::MatrixXcd w_spe;  // empty unless the mass stage ran with multipliers
  Eigen::MatrixXcd kernel; // empty unless the momentum stage ran with a kernel
};

ProjectionGradient compose_projection_vjp(const RealField& v, const RealField& g, Selector selector,
                                          const ProjectionParams& params = {});

} // namespace pcno
