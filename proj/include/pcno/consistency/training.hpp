#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "pcno/consistency/denoiser.hpp"
#include "pcno/surrogate/fno.hpp"
#include "pcno/surrogate/train.hpp"

namespace pcno {

/// One training pair: previous state u_t, frozen surrogate prediction u_hat
/// and the true next state y.
struct CtSample
{
  RealField u_t;
  RealField u_hat;
  RealField y;
};

/// Runs the frozen surrogate over Markov samples.
std::vector<CtSample> ct_samples(const FnoParams& pcno, const std::vector<Sample>& data);

/// Normalizer fitted on residuals y - u_hat (diffpcno) or states y (refiner).
ResidualNormalizer fit_normalizer(CtVariant variant, const std::vector<CtSample>& data);

/// Normalized quantity the denoiser learns, flattened.
Eigen::VectorXd ct_target(CtVariant variant, const CtSample& s, const ResidualNormalizer& normalizer);

/// u_t followed by u_hat, flattened, unnormalized.
Eigen::VectorXd ct_condition(const CtSample& s);

struct CtLoss
{
  double loss = 0.0;
  Eigen::VectorXd grad; // flattened like flatten(ToyDenoiser)
};

/// Mean over columns of weight_j * d(f(x0 + t_hi z, t_hi), f(x0 + t_lo z, t_lo)).
/// The t_lo branch is a constant target: it contributes no gradient.
CtLoss consistency_pair_loss(const ToyDenoiser& d, const Eigen::MatrixXd& x0, const Eigen::MatrixXd& cond,
                             const Eigen::VectorXd& t_lo, const Eigen::VectorXd& t_hi, const Eigen::MatrixXd& z,
                             const Eigen::VectorXd& weight, double huber_c);

struct CtDraw
{
  std::size_t i; // pair (t_i, t_{i+1})
  Eigen::VectorXd z;
};

/// Index from the lognormal law and one shared noise vector per sample.
std::vector<CtDraw> draw_ct(std::size_t n_steps, std::size_t batch, Eigen::Index dim, const NoiseSchedule& sched,
                            Rng& rng);

/// CT loss with explicit draws and discretization N, weight 1 / (t_{i+1} - t_i).
/// huber_c <= 0 selects default_huber_c.
CtLoss ct_loss(const ConsistencyModel& m, const std::vector<CtSample>& batch, const std::vector<CtDraw>& draws,
               std::size_t n_steps, double huber_c = 0.0);

CtLoss ct_loss_diffpcno(const ToyDenoiser& d, const std::vector<CtSample>& batch, std::size_t k, std::size_t total,
                        const NoiseSchedule& sched, const Curriculum& cur, const ResidualNormalizer& normalizer,
                        Rng& rng, double huber_c = 0.0);

CtLoss ct_loss_refiner(const ToyDenoiser& d, const std::vector<CtSample>& batch, std::size_t k, std::size_t total,
                       const NoiseSchedule& sched, const Curriculum& cur, const ResidualNormalizer& normalizer,
                       Rng& rng, double huber_c = 0.0);

struct CtTrainConfig
{
  std::size_t steps = 1000;
  std::size_t batch = 16;
  double lr = 1e-4;
  std::uint64_t seed = 0;
  double huber_c = 0.0;
  Curriculum curriculum;
};

struct CtTrainResult
{
  ConsistencyModel model;
  std::vector<double> losses;
};

/// Adam on the denoiser only with a cosine-annealed learning rate; batches are
/// drawn with replacement from stream "ct/train".
CtTrainResult train_consistency(const ConsistencyModel& init, const std::vector<CtSample>& data,
                                const CtTrainConfig& cfg);

} // namespace pcno
