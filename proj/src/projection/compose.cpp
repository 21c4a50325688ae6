#include "pcno/projection/compose.hpp"

namespace pcno {

Selector parse_selector(std::string_view name)
{
  if (name == "none")
    return Selector::none;
  if (name == "mass")
    return Selector::mass;
  if (name == "momentum")
    return Selector::momentum;
  if (name == "both")
    return Selector::both;
  throw UsageError("unknown projection selector '" + std::string(name) + "' (none|mass|momentum|both)");
}

std::string to_string(Selector s)
{
  switch (s) {
  case Selector::none: return "none";
  case Selector::mass: return "mass";
  case Selector::momentum: return "momentum";
  case Selector::both: return "both";
  }
  return "none";
}

namespace {

bool uses_mass(Selector s)
{
  return s == Selector::mass || s == Selector::both;
}

bool uses_momentum(Selector s)
{
  return s == Selector::momentum || s == Selector::both;
}

} // namespace

RealField compose_projection(const RealField& v, Selector selector, const ProjectionParams& params)
{
  RealField out = v;
  if (uses_mass(selector))
    out = project_divergence_free(out, params.mass);
  if (uses_momentum(selector))
    out = project_momentum(out, params.momentum);
  return out;
}

ProjectionGradient compose_projection_vjp(const RealField& v, const RealField& g, Selector selector,
                                          const ProjectionParams& params)
{
  ProjectionGradient out;
  out.input = g;
  RealField mid = v;
  if (uses_mass(selector) && uses_momentum(selector))
    mid = project_divergence_free(v, params.mass);
  if (uses_momentum(selector)) {
    auto m = project_momentum_vjp(mid, out.input, params.momentum);
    out.input = std::move(m.input);
    out.kernel = std::move(m.kernel);
  }
  if (uses_mass(selector)) {
    auto m = project_divergence_free_vjp(v, out.input, params.mass);
    out.input = std::move(m.input);
    out.w_spe = std::move(m.w_spe);
  }
  return out;
}

} // namespace pcno
