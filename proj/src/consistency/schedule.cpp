#include "pcno/consistency/schedule.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

#include "pcno/core/error.hpp"

namespace pcno {

double timestep(std::size_t i, std::size_t n, const NoiseSchedule& sched)
{
  require(n >= 2 && i >= 1 && i <= n, "timestep needs 1 <= i <= N and N >= 2");
  if (i == 1)
    return sched.t_min;
  if (i == n)
    return sched.t_max;
  const double lo = std::pow(sched.t_min, 1.0 / sched.rho);
  const double hi = std::pow(sched.t_max, 1.0 / sched.rho);
  const double frac = static_cast<double>(i - 1) / static_cast<double>(n - 1);
  return std::pow(lo + frac * (hi - lo), sched.rho);
}

std::size_t curriculum_period(std::size_t total_steps, const Curriculum& cur)
{
  require(cur.s0 >= 1 && cur.s1 >= cur.s0, "curriculum needs 1 <= s0 <= s1");
  const std::size_t doublings = std::bit_width(cur.s1 / cur.s0) - 1; // floor(log2(floor(s1 / s0)))
  return std::max<std::size_t>(1, total_steps / (doublings + 1));
}

std::size_t curriculum_n(std::size_t k, std::size_t total_steps, const Curriculum& cur)
{
  require(k < total_steps, "curriculum step k must be < K");
  const std::size_t level = k / curriculum_period(total_steps, cur);
  std::size_t n = cur.s0;
  for (std::size_t j = 0; j < level && n < cur.s1; ++j)
    n *= 2;
  return std::min(n, cur.s1) + 1;
}

std::vector<double> index_weights(std::size_t n, const NoiseSchedule& sched)
{
  require(n >= 2, "index weights need N >= 2");
  const double scale = 1.0 / (std::numbers::sqrt2 * sched.p_std);
  std::vector<double> w(n - 1);
  double sum = 0.0;
  double lower = std::erf((std::log(timestep(1, n, sched)) - sched.p_mean) * scale);
  for (std::size_t i = 1; i < n; ++i) {
    const double upper = std::erf((std::log(timestep(i + 1, n, sched)) - sched.p_mean) * scale);
    w[i - 1] = upper - lower;
    sum += w[i - 1];
    lower = upper;
  }
  for (auto& v : w)
    v /= sum;
  return w;
}

std::size_t sample_index(std::size_t n, const NoiseSchedule& sched, Rng& rng)
{
  const auto w = index_weights(n, sched);
  const double u = std::generate_canonical<double, 53>(rng);
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < w.size(); ++i) {
    acc += w[i];
    if (u < acc)
      return i + 1;
  }
  return w.size();
}

double pseudo_huber(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double c)
{
  require(c > 0.0, "pseudo-Huber constant must be positive");
  require(x.size() == y.size(), "pseudo-Huber arguments differ in size");
  return std::sqrt((x - y).squaredNorm() + c * c) - c;
}

double default_huber_c(Eigen::Index dim)
{
  return 0.00054 * std::sqrt(static_cast<double>(dim));
}

std::pair<double, double> skip_out_coeffs(double t, const NoiseSchedule& sched)
{
  require(t >= sched.t_min, "consistency time below t_min");
  const double s2 = sched.sigma_data * sched.sigma_data;
  const double dt = t - sched.t_min;
  return {s2 / (dt * dt + s2), sched.sigma_data * dt / std::sqrt(s2 + t * t)};
}

double input_scale(double t, const NoiseSchedule& sched)
{
  return 1.0 / std::sqrt(sched.sigma_data * sched.sigma_data + t * t);
}

std::vector<double> default_time_points()
{
  return {80.0, 24.4, 5.84, 0.9, 0.661};
}

} // namespace pcno
