#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pcno/surrogate/fno.hpp"

namespace pcno {

enum class Strategy { markov, one_shot };

Strategy parse_strategy(const std::string& name);
std::string to_string(Strategy s);

struct Sample
{
  RealField input;
  std::vector<double> cond;
  RealField target;
};

/// One sample per window: frames [t, t + t_in) stacked as channels (oldest
/// first) predict frame t + t_in. Trajectories have time as their first axis.
std::vector<Sample> markov_samples(const RealField& trajectory, std::size_t t_in, const std::vector<double>& cond);

/// The first t_in frames, stacked as channels and repeated along a new time
/// axis of length t_out, predict frames [t_in, t_in + t_out) as a space-time field.
Sample one_shot_sample(const RealField& trajectory, std::size_t t_in, std::size_t t_out,
                       const std::vector<double>& cond);

/// ||pred - target||^2 / ||target||^2
double relative_mse(const RealField& pred, const RealField& target);

/// Mean of relative_mse over a batch.
double loss_relative_mse(const std::vector<RealField>& pred, const std::vector<RealField>& target);

/// Batch relative-MSE loss of pcno_forward and its gradient (flattened like
/// `flatten`). Per-sample gradients are summed in index order, so the result
/// does not depend on `threads`.
double loss_and_gradient(const FnoParams& p, const std::vector<Sample>& data, const std::vector<std::size_t>& batch,
                         Eigen::VectorXd& grad, int threads = 1);

struct TrainConfig
{
  std::size_t epochs = 1;
  std::size_t batch = 4;
  double lr = 1e-3;
  double weight_decay = 1e-4;
  Strategy strategy = Strategy::markov;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct TrainResult
{
  FnoParams params;
  std::vector<double> losses; // one entry per optimizer step
};

/// AdamW with a cosine-annealed learning rate over all steps; batches are
/// drawn from a seeded shuffle each epoch.
TrainResult train(const FnoParams& init, const std::vector<Sample>& data, const TrainConfig& cfg);

/// Autoregressive prediction: each output frame is fed back as the newest
/// input frame. Returns the `steps` predicted frames along a leading time axis.
RealField rollout(const FnoParams& p, const RealField& u0, const std::vector<double>& cond, std::size_t steps);

} // namespace pcno
