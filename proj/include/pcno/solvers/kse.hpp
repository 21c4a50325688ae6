#pragma once

#include "pcno/core/rng.hpp"
#include "pcno/spectral/field.hpp"

namespace pcno {

// u_t + u u_x + u_xx + nu u_xxxx = 0 on a periodic interval of length L.
// Stiff linear part handled exactly (ETDRK2), u u_x = (u^2 / 2)_x evaluated
// spectrally with the 2/3 rule.

struct KseConfig
{
  std::size_t points = 256;
  double length_min = 57.6, length_max = 70.4;
  double dt_min = 0.18, dt_max = 0.22;
  double nu = 1.0;
  bool nu_random = false; // draw nu from [nu_min, nu_max] instead
  double nu_min = 0.5, nu_max = 1.5;
  std::size_t warmup = 360;
  std::size_t steps = 100;
  std::size_t substeps = 1; // internal steps per recorded step
  bool nonlinear = true;    // test hook: false leaves only the linear part
};

/// Parameters and initial state of one trajectory.
struct KseSample
{
  double length = 64.0;
  double dt = 0.2;
  double nu = 1.0;
  Eigen::ArrayXd initial;
};

/// Draws L, dt, nu and a sum of 10 sinusoids (amplitudes in [-1, 1], integer
/// wavenumbers 1..8, random phases).
KseSample sample_kse(const KseConfig& cfg, Rng& rng);

/// Trajectory with axes (t, x), one channel; frame 0 is the state after warmup.
RealField solve_kse(const KseConfig& cfg, const KseSample& sample);

} // namespace pcno
