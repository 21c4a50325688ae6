#include "pcno/consistency/training.hpp"

#include <cmath>
#include <random>

#include "pcno/spectral/field_ops.hpp"
#include "pcno/surrogate/optimizer.hpp"

namespace pcno {

namespace {

Eigen::VectorXd flat(const RealField& f)
{
  return f.data().matrix();
}

CtLoss ct_loss_variant(CtVariant variant, const ToyDenoiser& d, const std::vector<CtSample>& batch, std::size_t k,
                       std::size_t total, const NoiseSchedule& sched, const Curriculum& cur,
                       const ResidualNormalizer& normalizer, Rng& rng, double huber_c)
{
  require(!batch.empty(), "CT loss needs a non-empty batch");
  const std::size_t n = curriculum_n(k, total, cur);
  const ConsistencyModel m{d, normalizer, variant};
  const auto draws = draw_ct(n, batch.size(), d.hyper.target_size, sched, rng);
  return ct_loss(m, batch, draws, n, huber_c);
}

} // namespace

std::vector<CtSample> ct_samples(const FnoParams& pcno, const std::vector<Sample>& data)
{
  std::vector<CtSample> out;
  out.reserve(data.size());
  for (const auto& s : data)
    out.push_back({s.input, pcno_forward(pcno, s.input, s.cond), s.target});
  return out;
}

ResidualNormalizer fit_normalizer(CtVariant variant, const std::vector<CtSample>& data)
{
  require(!data.empty(), "cannot fit a normalizer without data");
  std::vector<RealField> fields;
  fields.reserve(data.size());
  for (const auto& s : data) {
    require(s.y.same_shape(s.u_hat), "target and surrogate prediction differ in shape");
    if (variant == CtVariant::diffpcno)
      fields.emplace_back(s.y.grid(), s.y.channels(), s.y.data() - s.u_hat.data());
    else
      fields.push_back(s.y);
  }
  return ResidualNormalizer::fit(fields);
}

Eigen::VectorXd ct_target(CtVariant variant, const CtSample& s, const ResidualNormalizer& normalizer)
{
  require(normalizer.fitted(), "consistency training needs a fitted normalizer");
  require(s.y.same_shape(s.u_hat), "target and surrogate prediction differ in shape");
  if (variant == CtVariant::diffpcno)
    return flat(normalizer.normalize(RealField(s.y.grid(), s.y.channels(), s.y.data() - s.u_hat.data())));
  return flat(normalizer.normalize(s.y));
}

Eigen::VectorXd ct_condition(const CtSample& s)
{
  Eigen::VectorXd c(s.u_t.data().size() + s.u_hat.data().size());
  c << flat(s.u_t), flat(s.u_hat);
  return c;
}

CtLoss consistency_pair_loss(const ToyDenoiser& d, const Eigen::MatrixXd& x0, const Eigen::MatrixXd& cond,
                             const Eigen::VectorXd& t_lo, const Eigen::VectorXd& t_hi, const Eigen::MatrixXd& z,
                             const Eigen::VectorXd& weight, double huber_c)
{
  const Eigen::Index batch = x0.cols();
  require(batch > 0, "CT loss needs a non-empty batch");
  require(z.rows() == x0.rows() && z.cols() == batch && weight.size() == batch, "CT loss inputs differ in shape");
  require(huber_c > 0.0, "pseudo-Huber constant must be positive");
  const Eigen::MatrixXd teacher = consistency_f(d, x0 + z * t_lo.asDiagonal(), t_lo, cond);
  DenoiserTape tape;
  const Eigen::MatrixXd student = consistency_f(d, x0 + z * t_hi.asDiagonal(), t_hi, cond, &tape);

  CtLoss out;
  Eigen::MatrixXd g(student.rows(), batch);
  for (Eigen::Index j = 0; j < batch; ++j) {
    const Eigen::VectorXd diff = student.col(j) - teacher.col(j);
    const double root = std::sqrt(diff.squaredNorm() + huber_c * huber_c);
    out.loss += weight[j] * (root - huber_c);
    g.col(j) = (weight[j] / (root * static_cast<double>(batch))) * diff;
  }
  out.loss /= static_cast<double>(batch);
  out.grad = consistency_f_backward(d, tape, g);
  return out;
}

std::vector<CtDraw> draw_ct(std::size_t n_steps, std::size_t batch, Eigen::Index dim, const NoiseSchedule& sched,
                            Rng& rng)
{
  std::vector<CtDraw> draws;
  draws.reserve(batch);
  for (std::size_t j = 0; j < batch; ++j) {
    const std::size_t i = sample_index(n_steps, sched, rng);
    draws.push_back({i, standard_normal(rng, dim)});
  }
  return draws;
}

CtLoss ct_loss(const ConsistencyModel& m, const std::vector<CtSample>& batch, const std::vector<CtDraw>& draws,
               std::size_t n_steps, double huber_c)
{
  require(!batch.empty() && draws.size() == batch.size(), "CT loss needs one draw per sample");
  const auto& d = m.denoiser;
  const auto b = static_cast<Eigen::Index>(batch.size());
  Eigen::MatrixXd x0(d.hyper.target_size, b), cond(d.hyper.cond_size, b), z(d.hyper.target_size, b);
  Eigen::VectorXd t_lo(b), t_hi(b), weight(b);
  for (Eigen::Index j = 0; j < b; ++j) {
    const auto& s = batch[static_cast<std::size_t>(j)];
    const auto& dr = draws[static_cast<std::size_t>(j)];
    const Eigen::VectorXd target = ct_target(m.variant, s, m.normalizer);
    const Eigen::VectorXd c = ct_condition(s);
    require(target.size() == d.hyper.target_size && c.size() == d.hyper.cond_size,
            "sample size does not match the denoiser");
    require(dr.i >= 1 && dr.i < n_steps && dr.z.size() == target.size(), "invalid CT draw");
    x0.col(j) = target;
    cond.col(j) = c;
    z.col(j) = dr.z;
    t_lo[j] = timestep(dr.i, n_steps, d.sched);
    t_hi[j] = timestep(dr.i + 1, n_steps, d.sched);
    weight[j] = 1.0 / (t_hi[j] - t_lo[j]);
  }
  const double c = huber_c > 0.0 ? huber_c : default_huber_c(d.hyper.target_size);
  return consistency_pair_loss(d, x0, cond, t_lo, t_hi, z, weight, c);
}

CtLoss ct_loss_diffpcno(const ToyDenoiser& d, const std::vector<CtSample>& batch, std::size_t k, std::size_t total,
                        const NoiseSchedule& sched, const Curriculum& cur, const ResidualNormalizer& normalizer,
                        Rng& rng, double huber_c)
{
  return ct_loss_variant(CtVariant::diffpcno, d, batch, k, total, sched, cur, normalizer, rng, huber_c);
}

CtLoss ct_loss_refiner(const ToyDenoiser& d, const std::vector<CtSample>& batch, std::size_t k, std::size_t total,
                       const NoiseSchedule& sched, const Curriculum& cur, const ResidualNormalizer& normalizer,
                       Rng& rng, double huber_c)
{
  return ct_loss_variant(CtVariant::refiner, d, batch, k, total, sched, cur, normalizer, rng, huber_c);
}

CtTrainResult train_consistency(const ConsistencyModel& init, const std::vector<CtSample>& data,
                                const CtTrainConfig& cfg)
{
  require(!data.empty(), "consistency training needs data");
  require(cfg.batch >= 1, "batch size must be >= 1");
  require(init.normalizer.fitted(), "consistency training needs a fitted normalizer");
  CtTrainResult result{init, {}};
  auto& d = result.model.denoiser;
  Eigen::VectorXd params = flatten(d);
  AdamW opt(params.size(), AdamW::Options{.weight_decay = 0.0});
  Rng rng = make_stream(cfg.seed, "ct/train");
  std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
  std::vector<CtSample> batch(cfg.batch);
  for (std::size_t k = 0; k < cfg.steps; ++k) {
    for (auto& s : batch)
      s = data[pick(rng)];
    const std::size_t n = curriculum_n(k, cfg.steps, cfg.curriculum);
    const auto draws = draw_ct(n, batch.size(), d.hyper.target_size, d.sched, rng);
    const CtLoss l = ct_loss(result.model, batch, draws, n, cfg.huber_c);
    if (!std::isfinite(l.loss) || l.loss > 1e6)
      throw NumericalError("consistency training diverged at step " + std::to_string(k) +
                           " (loss = " + std::to_string(l.loss) + ")");
    opt.step(params, l.grad, cosine_lr(cfg.lr, k, cfg.steps));
    unflatten(d, params);
    result.losses.push_back(l.loss);
  }
  return result;
}

} // namespace pcno
