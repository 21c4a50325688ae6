#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "pcno/core/rng.hpp"

namespace pcno {

struct NoiseSchedule
{
  double t_min = 0.002;
  double t_max = 80.0;
  double rho = 7.0;
  double sigma_data = 0.5;
  double p_mean = -1.1;
  double p_std = 2.0;
};

/// t_i for 1 <= i <= N on the rho-warped grid; t_1 = t_min and t_N = t_max exactly.
double timestep(std::size_t i, std::size_t n, const NoiseSchedule& sched = {});

struct Curriculum
{
  std::size_t s0 = 10;
  std::size_t s1 = 1280;
};

/// K' = floor(K / (log2 floor(s1 / s0) + 1)), at least 1.
std::size_t curriculum_period(std::size_t total_steps, const Curriculum& cur = {});

/// N(k) = min(s0 * 2^floor(k / K'), s1) + 1.
std::size_t curriculum_n(std::size_t k, std::size_t total_steps, const Curriculum& cur = {});

/// Normalized lognormal weights p(i), i = 1 .. N-1 (entry i - 1).
std::vector<double> index_weights(std::size_t n, const NoiseSchedule& sched = {});

/// Draws i in {1, ..., N-1} from index_weights.
std::size_t sample_index(std::size_t n, const NoiseSchedule& sched, Rng& rng);

/// sqrt(||x - y||^2 + c^2) - c
double pseudo_huber(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double c);

/// 0.00054 * sqrt(dim)
double default_huber_c(Eigen::Index dim);

/// c_skip = s^2 / ((t - t_min)^2 + s^2), c_out = s (t - t_min) / sqrt(s^2 + t^2), s = sigma_data.
std::pair<double, double> skip_out_coeffs(double t, const NoiseSchedule& sched = {});

/// 1 / sqrt(sigma_data^2 + t^2), the input scaling used inside the denoiser.
double input_scale(double t, const NoiseSchedule& sched = {});

std::vector<double> default_time_points();

} // namespace pcno
