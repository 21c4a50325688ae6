#include "pcno/surrogate/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pcno/core/parallel.hpp"
#include "pcno/spectral/field_ops.hpp"
#include "pcno/surrogate/optimizer.hpp"

namespace pcno {

Strategy parse_strategy(const std::string& name)
{
  if (name == "markov")
    return Strategy::markov;
  if (name == "one_shot")
    return Strategy::one_shot;
  throw UsageError("unknown training strategy '" + name + "' (markov|one_shot)");
}

std::string to_string(Strategy s)
{
  return s == Strategy::markov ? "markov" : "one_shot";
}

namespace {

RealField stacked_frames(const RealField& trajectory, std::size_t first, std::size_t count)
{
  std::vector<RealField> frames;
  for (std::size_t t = first; t < first + count; ++t)
    frames.push_back(time_slice(trajectory, t));
  return concat_channels(frames);
}

} // namespace

std::vector<Sample> markov_samples(const RealField& trajectory, std::size_t t_in, const std::vector<double>& cond)
{
  require(t_in >= 1, "markov samples need t_in >= 1");
  const std::size_t frames = trajectory.grid().size(0);
  std::vector<Sample> out;
  for (std::size_t t = 0; t + t_in < frames; ++t)
    out.push_back({stacked_frames(trajectory, t, t_in), cond, time_slice(trajectory, t + t_in)});
  return out;
}

Sample one_shot_sample(const RealField& trajectory, std::size_t t_in, std::size_t t_out, const std::vector<double>& cond)
{
  require(t_in >= 1 && t_out >= 2, "one-shot samples need t_in >= 1 and t_out >= 2");
  const std::size_t frames = trajectory.grid().size(0);
  require(t_in + t_out <= frames, "trajectory is shorter than t_in + t_out");
  const Axis& time = trajectory.grid().axis(0);
  const double frame_dt = time.extent / static_cast<double>(time.size);
  const Axis out_axis{"t", t_out, frame_dt * static_cast<double>(t_out), AxisKind::temporal};
  const RealField initial = stacked_frames(trajectory, 0, t_in);
  std::vector<RealField> target;
  for (std::size_t t = t_in; t < t_in + t_out; ++t)
    target.push_back(time_slice(trajectory, t));
  return {stack_frames(std::vector<RealField>(t_out, initial), out_axis), cond, stack_frames(target, out_axis)};
}

double relative_mse(const RealField& pred, const RealField& target)
{
  require(pred.same_shape(target), "relative_mse: shapes differ");
  const double denom = squared_norm(target);
  require(denom > 0.0, "relative_mse: target has zero norm");
  return (pred.data() - target.data()).square().sum() / denom;
}

double loss_relative_mse(const std::vector<RealField>& pred, const std::vector<RealField>& target)
{
  require(!pred.empty() && pred.size() == target.size(), "loss_relative_mse: batch sizes differ or are empty");
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i)
    sum += relative_mse(pred[i], target[i]);
  return sum / static_cast<double>(pred.size());
}

double loss_and_gradient(const FnoParams& p, const std::vector<Sample>& data, const std::vector<std::size_t>& batch,
                         Eigen::VectorXd& grad, int threads)
{
  require(!batch.empty(), "empty batch");
  const double scale = 1.0 / static_cast<double>(batch.size());
  std::vector<double> losses(batch.size());
  std::vector<Eigen::VectorXd> grads(batch.size());
  parallel_for(batch.size(), threads, [&](std::size_t i) {
    const Sample& s = data.at(batch[i]);
    FnoTape tape;
    const RealField pred = pcno_forward(p, s.input, s.cond, &tape);
    losses[i] = relative_mse(pred, s.target);
    RealField g = pred;
    g.data() = (2.0 * scale / squared_norm(s.target)) * (pred.data() - s.target.data());
    grads[i] = flatten(pcno_backward(p, tape, g));
  });
  grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(parameter_count(p)));
  double loss = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    grad += grads[i];
    loss += losses[i];
  }
  return loss * scale;
}

TrainResult train(const FnoParams& init, const std::vector<Sample>& data, const TrainConfig& cfg)
{
  require(cfg.batch >= 1 && cfg.lr > 0 && cfg.weight_decay >= 0, "invalid training configuration");
  TrainResult result{init, {}};
  if (cfg.epochs == 0)
    return result;
  require(!data.empty(), "training needs at least one sample");
  for (const auto& s : data) {
    const bool temporal = s.input.grid().temporal_axis().has_value();
    require(temporal == (cfg.strategy == Strategy::one_shot),
            "dataset shape does not match the " + to_string(cfg.strategy) + " strategy");
  }

  const std::size_t per_epoch = (data.size() + cfg.batch - 1) / cfg.batch;
  const std::size_t total = per_epoch * cfg.epochs;
  Eigen::VectorXd theta = flatten(init);
  AdamW opt(theta.size(), {.weight_decay = cfg.weight_decay});
  Rng rng = make_stream(cfg.seed, "train/shuffle");
  std::vector<std::size_t> order(data.size());
  Eigen::VectorXd grad;
  FnoParams current = init;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t b = 0; b < per_epoch; ++b) {
      const auto first = order.begin() + static_cast<std::ptrdiff_t>(b * cfg.batch);
      const auto last = order.begin() + static_cast<std::ptrdiff_t>(std::min(data.size(), (b + 1) * cfg.batch));
      const std::vector<std::size_t> batch(first, last);
      const double loss = loss_and_gradient(current, data, batch, grad, cfg.threads);
      const std::size_t step = result.losses.size();
      if (!std::isfinite(loss) || loss > 1e6)
        throw NumericalError("training diverged at step " + std::to_string(step) + " (loss " + std::to_string(loss) + ")");
      result.losses.push_back(loss);
      opt.step(theta, grad, cosine_lr(cfg.lr, step, total));
      unflatten(current, theta);
    }
  }
  result.params = std::move(current);
  return result;
}

RealField rollout(const FnoParams& p, const RealField& u0, const std::vector<double>& cond, std::size_t steps)
{
  require(steps >= 1, "rollout needs steps >= 1");
  const Eigen::Index frame_ch = p.hyper.out_ch;
  require(u0.channels() % frame_ch == 0, "initial state channels are not a whole number of frames");
  RealField window = u0;
  std::vector<RealField> frames;
  for (std::size_t s = 0; s < steps; ++s) {
    RealField next = pcno_forward(p, window, cond);
    if (window.channels() == frame_ch) {
      window = next;
    } else {
      window = concat_channels({channel_slice(window, frame_ch, window.channels() - frame_ch), next});
    }
    frames.push_back(std::move(next));
  }
  return stack_frames(frames, {"t", steps, static_cast<double>(steps), AxisKind::temporal});
}

} // namespace pcno
