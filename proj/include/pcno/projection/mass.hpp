#pragma once

#include <optional>

#include "pcno/core/rng.hpp"
#include "pcno/projection/mode_set.hpp"
#include "pcno/spectral/field.hpp"

namespace pcno {

/// spatial2d: 2 channels on a 2-axis grid; spatiotemporal3d: 3 flux channels
/// on a (t, x1, x2) grid. Channel j is differentiated along axis j.
enum class MassMode { spatial2d, spatiotemporal3d };

struct MassProjectionConfig
{
  MassMode mode = MassMode::spatial2d;
  /// Optional learnable per-channel multipliers applied before the projection;
  /// modes outside the retained set pass through unchanged.
  std::optional<HermitianMultiplier> w_spe;
};

/// Removes the gradient part of every nonzero mode:
///   v(k) - k (k . v(k)) / |k|^2
/// using derivative wavenumbers, so the spectral divergence vanishes exactly.
/// Modes with no differentiable component (zero mode, all-Nyquist modes) pass through.
void helmholtz_project_spectrum(SpectralField& s);

RealField project_divergence_free(const RealField& v, const MassProjectionConfig& cfg = {});

struct MassProjectionGradient
{
  RealField input;
  Eigen::MatrixXcd w_spe; // empty when the config has no multipliers
};

/// Reverse-mode pass: `g` is the loss gradient at the projection output.
MassProjectionGradient project_divergence_free_vjp(const RealField& v, const RealField& g,
                                                   const MassProjectionConfig& cfg = {});

/// Random multipliers over |m_a| < modes[a], weights around 1.
HermitianMultiplier random_w_spe(const std::vector<std::size_t>& modes, Eigen::Index channels, Rng& rng);

} // namespace pcno
