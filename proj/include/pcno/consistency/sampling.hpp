#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "pcno/consistency/denoiser.hpp"
#include "pcno/surrogate/fno.hpp"

namespace pcno {

/// sqrt(t^2 - t_min^2), the noise added before re-denoising at time t.
double injection_scale(double t, const NoiseSchedule& sched = {});

/// Multistep consistency sampling in normalized space. Starts from t_1 z with
/// t_1 the first time point; each later point re-noises and denoises once.
/// Time points must be strictly descending inside [t_min, t_max].
Eigen::VectorXd sample_multistep(const ToyDenoiser& d, const Eigen::VectorXd& cond,
                                 const std::vector<double>& time_points, Rng& rng);

/// Samples the model's target for one step and denormalizes it: a residual
/// for diffpcno, a state for refiner. Shaped like u_hat.
RealField sample_target(const ConsistencyModel& m, const RealField& u_t, const RealField& u_hat,
                        const std::vector<double>& time_points, Rng& rng);

struct DiffStep
{
  RealField prediction;      // sampled next state
  RealField pcno_prediction; // deterministic surrogate output
  RealField residual;        // prediction - pcno_prediction
};

/// Frozen surrogate forecast plus a sampled correction.
DiffStep diffpcno_step(const FnoParams& pcno, const ConsistencyModel& m, const RealField& u_t,
                       const std::vector<double>& cond, const std::vector<double>& time_points, Rng& rng);

/// Maps the current input window to the next frame using draws from rng.
using StochasticStep = std::function<RealField(const RealField& window, Rng& rng)>;

struct Ensemble
{
  RealField mean; // steps frames along a leading time axis
  RealField std;
};

/// n_traj independent rollouts, trajectory j drawing from stream ("ensemble", j).
/// The standard deviation uses the n - 1 estimator.
Ensemble uncertainty_ensemble(const StochasticStep& step, const RealField& u0, std::size_t steps,
                              std::size_t n_traj, std::uint64_t seed, int threads = 1);

/// Rollout with diffpcno_step as the step function.
Ensemble diffpcno_ensemble(const FnoParams& pcno, const ConsistencyModel& m, const RealField& u0,
                           const std::vector<double>& cond, const std::vector<double>& time_points,
                           std::size_t steps, std::size_t n_traj, std::uint64_t seed, int threads = 1);

} // namespace pcno
