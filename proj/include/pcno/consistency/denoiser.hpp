#pragma once

#include <filesystem>
#include <string>

#include <Eigen/Core>

#include "pcno/consistency/normalizer.hpp"
#include "pcno/consistency/schedule.hpp"
#include "pcno/core/kv_text.hpp"
#include "pcno/core/rng.hpp"
#include "pcno/surrogate/model_io.hpp"

namespace pcno {

struct DenoiserHyper
{
  Eigen::Index target_size = 1; // flattened target (residual or state)
  Eigen::Index cond_size = 0;   // flattened conditioning frames
  std::size_t hidden = 64;
  std::size_t embed = 8; // sinusoidal time features, even

  bool operator==(const DenoiserHyper&) const = default;
};

/// Dense network F with two GELU hidden layers. Its input is the scaled noisy
/// target c_in(t) x, the conditioning vector and a sinusoidal embedding of t.
struct ToyDenoiser
{
  DenoiserHyper hyper;
  NoiseSchedule sched;
  Eigen::MatrixXd w1, w2, w3;
  Eigen::VectorXd b1, b2, b3;
};

ToyDenoiser init_denoiser(const DenoiserHyper& hyper, Rng& rng, const NoiseSchedule& sched = {});

/// sin / cos of pi 2^k tau, tau = log(t / t_min) / log(t_max / t_min).
Eigen::VectorXd time_embedding(double t, std::size_t dims, const NoiseSchedule& sched);

std::size_t parameter_count(const ToyDenoiser& d);
Eigen::VectorXd flatten(const ToyDenoiser& d);
void unflatten(ToyDenoiser& d, const Eigen::VectorXd& flat);

struct DenoiserTape
{
  Eigen::MatrixXd input, a1, a2, h2;
  Eigen::VectorXd c_out;
};

/// f = c_skip(t) x + c_out(t) F(x, t, cond) for a batch: column j of `x` and
/// `cond` is sample j with time t[j].
Eigen::MatrixXd consistency_f(const ToyDenoiser& d, const Eigen::MatrixXd& x, const Eigen::VectorXd& t,
                              const Eigen::MatrixXd& cond, DenoiserTape* tape = nullptr);

/// Gradient of sum(g .* f) with respect to the flattened parameters.
Eigen::VectorXd consistency_f_backward(const ToyDenoiser& d, const DenoiserTape& tape, const Eigen::MatrixXd& g);

/// diffpcno: the denoiser models the normalized residual y - u_hat.
/// refiner: it models the normalized state y.
enum class CtVariant { diffpcno, refiner };

CtVariant parse_ct_variant(const std::string& name);
std::string to_string(CtVariant v);

struct ConsistencyModel
{
  ToyDenoiser denoiser;
  ResidualNormalizer normalizer;
  CtVariant variant = CtVariant::diffpcno;
};

ModelContainer consistency_to_container(const ConsistencyModel& m, const KvStanza& extra = {});
ConsistencyModel consistency_from_container(const ModelContainer& c);
void save_consistency(const ConsistencyModel& m, const std::filesystem::path& path, const KvStanza& extra = {});
ConsistencyModel load_consistency(const std::filesystem::path& path);

} // namespace pcno
