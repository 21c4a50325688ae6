#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "pcno/core/rng.hpp"
#include "pcno/projection/compose.hpp"
#include "pcno/projection/mode_set.hpp"
#include "pcno/spectral/field.hpp"

namespace pcno {

/// `identity` disables every nonlinearity (algebraic checks only).
enum class Activation { gelu, identity };

Activation parse_activation(const std::string& name);
std::string to_string(Activation a);

struct FnoHyper
{
  std::size_t layers = 4;
  std::vector<std::size_t> modes{12, 12}; // one entry per grid axis
  std::size_t width = 20;
  Eigen::Index in_ch = 1; // field channels plus conditioning channels
  Eigen::Index out_ch = 1;
  std::size_t time_padding = 0; // zero frames appended to a temporal axis
  Activation activation = Activation::gelu;

  bool operator==(const FnoHyper&) const = default;
};

struct FnoLayer
{
  Eigen::MatrixXcd kernel; // (width * width) x free modes; column j is the out x in matrix of mode j
  Eigen::MatrixXd w;       // width x width
  Eigen::VectorXd b;
};

/// Learnable weights of the surrogate together with the projection that
/// follows it. The same type carries gradients.
struct FnoParams
{
  FnoHyper hyper;
  HermitianModeSet modes;
  Eigen::MatrixXd lift_w; // width x in_ch
  Eigen::VectorXd lift_b;
  std::vector<FnoLayer> layers;
  Eigen::MatrixXd head1_w; // width x width
  Eigen::VectorXd head1_b;
  Eigen::MatrixXd head2_w; // out_ch x width
  Eigen::VectorXd head2_b;
  Selector selector = Selector::none;
  ProjectionParams projection;
};

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) pointwise weights; spectral
/// weights (U(0,1) + i U(0,1)) / width^2.
FnoParams init_fno(const FnoHyper& hyper, Rng& rng);

/// Attaches a projection stage. With `learnable`, mass projection gets unit W_spe
/// multipliers over the FNO modes of the last two axes and momentum projection a
/// unit kernel on the padded lattice of `grid`.
void attach_projection(FnoParams& p, Selector selector, const GridSpec& grid, bool learnable,
                       MassMode mass_mode = MassMode::spatial2d);

/// Same structure, all weights zero.
FnoParams zeros_like(const FnoParams& p);

struct ParamGroup
{
  std::string name;
  std::size_t offset;
  std::size_t count;
};

/// Named contiguous ranges of the flattened parameter vector. Complex weights
/// flatten as (re, im) pairs.
std::vector<ParamGroup> parameter_groups(const FnoParams& p);
std::size_t parameter_count(const FnoParams& p);
Eigen::VectorXd flatten(const FnoParams& p);
void unflatten(FnoParams& p, const Eigen::VectorXd& flat);

/// Intermediate values kept for the reverse pass.
struct FnoTape
{
  RealField input; // field channels followed by conditioning channels
  Eigen::Index field_channels = 0;
  std::vector<RealField> hidden;   // v_0 .. v_L on the (time-padded) grid
  std::vector<SpectralField> spec; // FFT of v_0 .. v_{L-1}
  std::vector<RealField> pre;      // pre-activations of the Fourier layers
  RealField head_pre;
  RealField fno_out;
};

/// Lift, Fourier layers and head. `cond` values enter as constant channels.
RealField fno_forward(const FnoParams& p, const RealField& u, const std::vector<double>& cond,
                      FnoTape* tape = nullptr);

/// fno_forward followed by compose_projection with p.selector.
RealField pcno_forward(const FnoParams& p, const RealField& u, const std::vector<double>& cond,
                       FnoTape* tape = nullptr);

/// Gradient of sum(g * pcno_forward(...)) with respect to every parameter.
/// `input_grad`, when given, receives the gradient with respect to u.
FnoParams pcno_backward(const FnoParams& p, const FnoTape& tape, const RealField& g, RealField* input_grad = nullptr);

} // namespace pcno
