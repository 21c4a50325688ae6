#include "pcno/consistency/sampling.hpp"

#include <cmath>

#include "pcno/consistency/training.hpp"
#include "pcno/core/parallel.hpp"
#include "pcno/spectral/field_ops.hpp"

namespace pcno {

double injection_scale(double t, const NoiseSchedule& sched)
{
  return std::sqrt(t * t - sched.t_min * sched.t_min);
}

Eigen::VectorXd sample_multistep(const ToyDenoiser& d, const Eigen::VectorXd& cond,
                                 const std::vector<double>& time_points, Rng& rng)
{
  require(!time_points.empty(), "sampling needs at least one time point");
  for (std::size_t n = 0; n < time_points.size(); ++n) {
    const double t = time_points[n];
    require(t >= d.sched.t_min && t <= d.sched.t_max, "sampling time points must lie in [t_min, t_max]");
    require(n == 0 || t < time_points[n - 1], "sampling time points must be strictly descending");
  }
  require(cond.size() == d.hyper.cond_size, "conditioning size does not match the denoiser");
  const Eigen::Index dim = d.hyper.target_size;
  Eigen::VectorXd t(1);
  t[0] = time_points.front();
  Eigen::VectorXd x = consistency_f(d, time_points.front() * standard_normal(rng, dim), t, cond);
  for (std::size_t n = 1; n < time_points.size(); ++n) {
    t[0] = time_points[n];
    const Eigen::VectorXd noisy = x + injection_scale(time_points[n], d.sched) * standard_normal(rng, dim);
    x = consistency_f(d, noisy, t, cond);
  }
  return x;
}

RealField sample_target(const ConsistencyModel& m, const RealField& u_t, const RealField& u_hat,
                        const std::vector<double>& time_points, Rng& rng)
{
  require(m.normalizer.fitted(), "sampling needs a fitted normalizer");
  const CtSample s{u_t, u_hat, u_hat};
  const Eigen::VectorXd x = sample_multistep(m.denoiser, ct_condition(s), time_points, rng);
  require(x.size() == u_hat.data().size(), "denoiser output size does not match the surrogate prediction");
  return m.normalizer.denormalize(RealField(u_hat.grid(), u_hat.channels(), x.array()));
}

DiffStep diffpcno_step(const FnoParams& pcno, const ConsistencyModel& m, const RealField& u_t,
                       const std::vector<double>& cond, const std::vector<double>& time_points, Rng& rng)
{
  DiffStep out;
  out.pcno_prediction = pcno_forward(pcno, u_t, cond);
  const RealField sampled = sample_target(m, u_t, out.pcno_prediction, time_points, rng);
  if (m.variant == CtVariant::diffpcno) {
    out.residual = sampled;
    out.prediction = RealField(sampled.grid(), sampled.channels(), out.pcno_prediction.data() + sampled.data());
  } else {
    out.prediction = sampled;
    out.residual = RealField(sampled.grid(), sampled.channels(), sampled.data() - out.pcno_prediction.data());
  }
  return out;
}

Ensemble uncertainty_ensemble(const StochasticStep& step, const RealField& u0, std::size_t steps,
                              std::size_t n_traj, std::uint64_t seed, int threads)
{
  require(n_traj >= 2, "an ensemble needs at least 2 trajectories");
  require(steps >= 1, "an ensemble needs steps >= 1");
  std::vector<std::vector<RealField>> runs(n_traj);
  parallel_for(n_traj, threads, [&](std::size_t j) {
    Rng rng = make_stream(seed, "ensemble", j);
    RealField window = u0;
    auto& frames = runs[j];
    for (std::size_t s = 0; s < steps; ++s) {
      RealField next = step(window, rng);
      if (s == 0)
        require(u0.channels() % next.channels() == 0, "initial state channels are not a whole number of frames");
      if (window.channels() == next.channels())
        window = next;
      else
        window = concat_channels({channel_slice(window, next.channels(), window.channels() - next.channels()), next});
      frames.push_back(std::move(next));
    }
  });

  // Moments of the offsets from trajectory 0, so identical trajectories give exactly zero spread.
  std::vector<RealField> mean_frames, std_frames;
  const double n = static_cast<double>(n_traj);
  for (std::size_t s = 0; s < steps; ++s) {
    const RealField& base = runs[0][s];
    Eigen::ArrayXd sum = Eigen::ArrayXd::Zero(base.data().size());
    for (std::size_t j = 1; j < n_traj; ++j)
      sum += runs[j][s].data() - base.data();
    const Eigen::ArrayXd offset_mean = sum / n;
    Eigen::ArrayXd sq = Eigen::ArrayXd::Zero(sum.size());
    for (std::size_t j = 0; j < n_traj; ++j)
      sq += (runs[j][s].data() - base.data() - offset_mean).square();
    mean_frames.emplace_back(base.grid(), base.channels(), base.data() + offset_mean);
    std_frames.emplace_back(base.grid(), base.channels(), (sq / (n - 1.0)).sqrt());
  }
  const Axis t_axis{"t", steps, static_cast<double>(steps), AxisKind::temporal};
  return {stack_frames(mean_frames, t_axis), stack_frames(std_frames, t_axis)};
}

Ensemble diffpcno_ensemble(const FnoParams& pcno, const ConsistencyModel& m, const RealField& u0,
                           const std::vector<double>& cond, const std::vector<double>& time_points,
                           std::size_t steps, std::size_t n_traj, std::uint64_t seed, int threads)
{
  const StochasticStep step = [&](const RealField& window, Rng& rng) {
    return diffpcno_step(pcno, m, window, cond, time_points, rng).prediction;
  };
  return uncertainty_ensemble(step, u0, steps, n_traj, seed, threads);
}

} // namespace pcno
