#include "pcno/surrogate/fno.hpp"

#include <cmath>
#include <numbers>

#include "pcno/spectral/fft.hpp"
#include "pcno/spectral/field_ops.hpp"

namespace pcno {

Activation parse_activation(const std::string& name)
{
  if (name == "gelu")
    return Activation::gelu;
  if (name == "identity")
    return Activation::identity;
  throw UsageError("unknown activation '" + name + "' (gelu|identity)");
}

std::string to_string(Activation a)
{
  return a == Activation::gelu ? "gelu" : "identity";
}

namespace {

using cd = std::complex<double>;
using StridedVec = Eigen::Map<const Eigen::VectorXcd, 0, Eigen::InnerStride<>>;

Eigen::MatrixXd uniform_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double bound)
{
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i)
      m(i, j) = uniform(rng, -bound, bound);
  return m;
}

RealField affine(const RealField& x, const Eigen::MatrixXd& w, const Eigen::VectorXd& b)
{
  RealField out(x.grid(), w.rows());
  out.matrix() = (x.matrix() * w.transpose()).rowwise() + b.transpose();
  return out;
}

void accumulate_affine(const RealField& x, const RealField& g, Eigen::MatrixXd& gw, Eigen::VectorXd& gb)
{
  gw += g.matrix().transpose() * x.matrix();
  gb += g.matrix().colwise().sum().transpose();
}

RealField apply_transpose(const RealField& g, const Eigen::MatrixXd& w)
{
  RealField out(g.grid(), w.cols());
  out.matrix() = g.matrix() * w;
  return out;
}

constexpr double kInvSqrt2 = 0.70710678118654752440;
const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);

RealField activate(const RealField& x, Activation a)
{
  if (a == Activation::identity)
    return x;
  RealField out = x;
  out.data() = x.data().unaryExpr([](double v) { return 0.5 * v * (1.0 + std::erf(v * kInvSqrt2)); });
  return out;
}

/// g * sigma'(x)
RealField activate_backward(const RealField& x, const RealField& g, Activation a)
{
  if (a == Activation::identity)
    return g;
  RealField out = g;
  out.data() *= x.data().unaryExpr([](double v) {
    return 0.5 * (1.0 + std::erf(v * kInvSqrt2)) + v * std::exp(-0.5 * v * v) * kInvSqrt2Pi;
  });
  return out;
}

StridedVec gather(const ComplexField& s, std::size_t flat)
{
  return StridedVec(s.data().data() + flat, s.channels(), Eigen::InnerStride<>(s.points()));
}

void scatter(ComplexField& s, std::size_t flat, const Eigen::VectorXcd& v)
{
  for (Eigen::Index c = 0; c < s.channels(); ++c)
    s(c, static_cast<Eigen::Index>(flat)) = v[c];
}

RealField spectral_conv(const SpectralField& xs, const Eigen::MatrixXcd& kernel,
                        const std::vector<ModePlacement>& placement, Eigen::Index width)
{
  SpectralField y(xs.grid(), width);
  Eigen::VectorXcd out(width);
  for (const auto& p : placement) {
    const Eigen::Map<const Eigen::MatrixXcd> r(kernel.col(static_cast<Eigen::Index>(p.index)).data(), width, width);
    const auto x = gather(xs, p.flat);
    if (p.flat == p.mirror) {
      out = (r.real() * x.real()).cast<cd>();
      scatter(y, p.flat, out);
    } else {
      out = r * x;
      scatter(y, p.flat, out);
      scatter(y, p.mirror, out.conjugate());
    }
  }
  return fft_inverse(y);
}

/// Adjoint of spectral_conv: accumulates the kernel gradient and returns the input gradient.
RealField spectral_conv_backward(const SpectralField& xs, const RealField& g, const Eigen::MatrixXcd& kernel,
                                 const std::vector<ModePlacement>& placement, Eigen::MatrixXcd& kernel_grad)
{
  const Eigen::Index width = g.channels();
  const double inv_points = 1.0 / static_cast<double>(g.points());
  const auto gs = fft_forward(g);
  SpectralField z(g.grid(), width);
  Eigen::VectorXcd out(width);
  for (const auto& p : placement) {
    const auto col = static_cast<Eigen::Index>(p.index);
    const Eigen::Map<const Eigen::MatrixXcd> r(kernel.col(col).data(), width, width);
    Eigen::Map<Eigen::MatrixXcd> gr(kernel_grad.col(col).data(), width, width);
    const Eigen::VectorXcd x = gather(xs, p.flat);
    const Eigen::VectorXcd gh = gather(gs, p.flat);
    if (p.flat == p.mirror) {
      gr.real() += inv_points * (gh.real() * x.real().transpose());
      out = (r.real().transpose() * gh.real()).cast<cd>();
      scatter(z, p.flat, out);
    } else {
      gr += (2.0 * inv_points) * gh * x.adjoint();
      out = r.adjoint() * gh;
      scatter(z, p.flat, out);
      scatter(z, p.mirror, out.conjugate());
    }
  }
  return fft_inverse(z);
}

std::vector<std::size_t> time_padding(const FnoParams& p, const GridSpec& grid)
{
  std::vector<std::size_t> pad(grid.rank(), 0);
  if (const auto t = grid.temporal_axis(); t && p.hyper.time_padding > 0)
    pad[*t] = p.hyper.time_padding;
  return pad;
}

bool any_padding(const std::vector<std::size_t>& pad)
{
  for (auto v : pad)
    if (v)
      return true;
  return false;
}

void append_complex(Eigen::VectorXd& out, std::size_t& at, const Eigen::MatrixXcd& m)
{
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    out[static_cast<Eigen::Index>(at++)] = m.data()[i].real();
    out[static_cast<Eigen::Index>(at++)] = m.data()[i].imag();
  }
}

template <typename Derived>
void append_real(Eigen::VectorXd& out, std::size_t& at, const Eigen::DenseBase<Derived>& m)
{
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      out[static_cast<Eigen::Index>(at++)] = m(i, j);
}

void read_complex(const Eigen::VectorXd& in, std::size_t& at, Eigen::MatrixXcd& m)
{
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    m.data()[i] = cd(in[static_cast<Eigen::Index>(at)], in[static_cast<Eigen::Index>(at + 1)]);
    at += 2;
  }
}

template <typename Derived>
void read_real(const Eigen::VectorXd& in, std::size_t& at, Eigen::DenseBase<Derived>& m)
{
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      m(i, j) = in[static_cast<Eigen::Index>(at++)];
}

} // namespace

FnoParams init_fno(const FnoHyper& hyper, Rng& rng)
{
  require(hyper.layers >= 1 && hyper.width >= 1, "FNO needs at least one layer and width >= 1");
  require(hyper.in_ch >= 1 && hyper.out_ch >= 1, "FNO needs positive channel counts");
  require(!hyper.modes.empty(), "FNO needs modes for at least one axis");
  for (auto m : hyper.modes)
    require(m >= 1, "FNO modes must be >= 1");
  const auto w = static_cast<Eigen::Index>(hyper.width);
  FnoParams p;
  p.hyper = hyper;
  p.modes = HermitianModeSet::truncated(hyper.modes);
  const double lift_bound = 1.0 / std::sqrt(static_cast<double>(hyper.in_ch));
  const double width_bound = 1.0 / std::sqrt(static_cast<double>(hyper.width));
  p.lift_w = uniform_matrix(rng, w, hyper.in_ch, lift_bound);
  p.lift_b = uniform_matrix(rng, w, 1, lift_bound);
  const double kscale = 1.0 / static_cast<double>(hyper.width * hyper.width);
  for (std::size_t l = 0; l < hyper.layers; ++l) {
    FnoLayer layer;
    layer.kernel.resize(w * w, static_cast<Eigen::Index>(p.modes.size()));
    for (Eigen::Index j = 0; j < layer.kernel.cols(); ++j)
      for (Eigen::Index i = 0; i < layer.kernel.rows(); ++i) {
        const double re = uniform(rng, 0.0, 1.0);
        layer.kernel(i, j) = kscale * cd(re, uniform(rng, 0.0, 1.0));
      }
    layer.w = uniform_matrix(rng, w, w, width_bound);
    layer.b = uniform_matrix(rng, w, 1, width_bound);
    p.layers.push_back(std::move(layer));
  }
  p.head1_w = uniform_matrix(rng, w, w, width_bound);
  p.head1_b = uniform_matrix(rng, w, 1, width_bound);
  p.head2_w = uniform_matrix(rng, hyper.out_ch, w, width_bound);
  p.head2_b = uniform_matrix(rng, hyper.out_ch, 1, width_bound);
  return p;
}

void attach_projection(FnoParams& p, Selector selector, const GridSpec& grid, bool learnable, MassMode mass_mode)
{
  p.selector = selector;
  p.projection = {};
  p.projection.mass.mode = mass_mode;
  if (!learnable)
    return;
  if (selector == Selector::mass || selector == Selector::both) {
    require(p.hyper.modes.size() == grid.rank(), "W_spe modes must match the grid rank");
    p.projection.mass.w_spe = HermitianMultiplier::unit(HermitianModeSet::truncated(p.hyper.modes), p.hyper.out_ch);
  }
  if (selector == Selector::momentum || selector == Selector::both)
    p.projection.momentum.kernel =
      RotationInvariantKernel::unit(momentum_lattice(grid, p.projection.momentum), p.hyper.out_ch);
}

FnoParams zeros_like(const FnoParams& p)
{
  FnoParams z = p;
  unflatten(z, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(parameter_count(p))));
  return z;
}

std::vector<ParamGroup> parameter_groups(const FnoParams& p)
{
  std::vector<ParamGroup> groups;
  std::size_t at = 0;
  auto add = [&](std::string name, Eigen::Index count) {
    groups.push_back({std::move(name), at, static_cast<std::size_t>(count)});
    at += static_cast<std::size_t>(count);
  };
  add("lift.w", p.lift_w.size());
  add("lift.b", p.lift_b.size());
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    const std::string prefix = "layer" + std::to_string(l);
    add(prefix + ".kernel", 2 * p.layers[l].kernel.size());
    add(prefix + ".w", p.layers[l].w.size());
    add(prefix + ".b", p.layers[l].b.size());
  }
  add("head1.w", p.head1_w.size());
  add("head1.b", p.head1_b.size());
  add("head2.w", p.head2_w.size());
  add("head2.b", p.head2_b.size());
  if (p.projection.mass.w_spe)
    add("w_spe", 2 * p.projection.mass.w_spe->weights.size());
  if (p.projection.momentum.kernel)
    add("momentum_kernel", 2 * p.projection.momentum.kernel->multiplier.weights.size());
  return groups;
}

std::size_t parameter_count(const FnoParams& p)
{
  const auto groups = parameter_groups(p);
  return groups.back().offset + groups.back().count;
}

Eigen::VectorXd flatten(const FnoParams& p)
{
  Eigen::VectorXd out(static_cast<Eigen::Index>(parameter_count(p)));
  std::size_t at = 0;
  append_real(out, at, p.lift_w);
  append_real(out, at, p.lift_b);
  for (const auto& l : p.layers) {
    append_complex(out, at, l.kernel);
    append_real(out, at, l.w);
    append_real(out, at, l.b);
  }
  append_real(out, at, p.head1_w);
  append_real(out, at, p.head1_b);
  append_real(out, at, p.head2_w);
  append_real(out, at, p.head2_b);
  if (p.projection.mass.w_spe)
    append_complex(out, at, p.projection.mass.w_spe->weights);
  if (p.projection.momentum.kernel)
    append_complex(out, at, p.projection.momentum.kernel->multiplier.weights);
  return out;
}

void unflatten(FnoParams& p, const Eigen::VectorXd& flat)
{
  require(static_cast<std::size_t>(flat.size()) == parameter_count(p), "parameter vector has the wrong length");
  std::size_t at = 0;
  read_real(flat, at, p.lift_w);
  read_real(flat, at, p.lift_b);
  for (auto& l : p.layers) {
    read_complex(flat, at, l.kernel);
    read_real(flat, at, l.w);
    read_real(flat, at, l.b);
  }
  read_real(flat, at, p.head1_w);
  read_real(flat, at, p.head1_b);
  read_real(flat, at, p.head2_w);
  read_real(flat, at, p.head2_b);
  if (p.projection.mass.w_spe)
    read_complex(flat, at, p.projection.mass.w_spe->weights);
  if (p.projection.momentum.kernel)
    read_complex(flat, at, p.projection.momentum.kernel->multiplier.weights);
}

RealField fno_forward(const FnoParams& p, const RealField& u, const std::vector<double>& cond, FnoTape* tape)
{
  const auto ncond = static_cast<Eigen::Index>(cond.size());
  require(u.channels() + ncond == p.hyper.in_ch,
          "FNO expects " + std::to_string(p.hyper.in_ch) + " input channels (including " +
            std::to_string(ncond) + " conditioning), got " + std::to_string(u.channels() + ncond));
  require(u.grid().rank() == p.hyper.modes.size(), "FNO modes do not match the input grid rank");
  require_finite(u, "FNO input");

  RealField a(u.grid(), p.hyper.in_ch);
  a.data().head(u.data().size()) = u.data();
  for (Eigen::Index c = 0; c < ncond; ++c)
    a.channel(u.channels() + c).setConstant(cond[static_cast<std::size_t>(c)]);

  const auto pad = time_padding(p, u.grid());
  const bool padded = any_padding(pad);
  RealField v = affine(a, p.lift_w, p.lift_b);
  if (padded)
    v = zero_pad(v, pad);
  const auto placement = p.modes.placement(v.grid().sizes());
  const auto width = static_cast<Eigen::Index>(p.hyper.width);

  if (tape) {
    tape->input = a;
    tape->field_channels = u.channels();
    tape->hidden.clear();
    tape->spec.clear();
    tape->pre.clear();
  }
  for (const auto& layer : p.layers) {
    auto xs = fft_forward(v);
    RealField pre = affine(v, layer.w, layer.b);
    pre.data() += spectral_conv(xs, layer.kernel, placement, width).data();
    RealField next = activate(pre, p.hyper.activation);
    if (tape) {
      tape->hidden.push_back(std::move(v));
      tape->spec.push_back(std::move(xs));
      tape->pre.push_back(std::move(pre));
    }
    v = std::move(next);
  }
  if (tape)
    tape->hidden.push_back(v);
  if (padded)
    v = crop(v, u.grid().sizes());
  RealField head_pre = affine(v, p.head1_w, p.head1_b);
  RealField out = affine(activate(head_pre, p.hyper.activation), p.head2_w, p.head2_b);
  if (tape) {
    tape->head_pre = std::move(head_pre);
    tape->fno_out = out;
  }
  if (!all_finite(out))
    throw NumericalError("FNO output became non-finite");
  return out;
}

RealField pcno_forward(const FnoParams& p, const RealField& u, const std::vector<double>& cond, FnoTape* tape)
{
  return compose_projection(fno_forward(p, u, cond, tape), p.selector, p.projection);
}

FnoParams pcno_backward(const FnoParams& p, const FnoTape& tape, const RealField& g, RealField* input_grad)
{
  require(g.same_shape(tape.fno_out), "output gradient does not match the recorded forward pass");
  require(tape.hidden.size() == p.layers.size() + 1, "tape does not match the model");
  FnoParams grad = zeros_like(p);

  RealField g_out = g;
  if (p.selector != Selector::none) {
    auto pg = compose_projection_vjp(tape.fno_out, g, p.selector, p.projection);
    g_out = std::move(pg.input);
    if (grad.projection.mass.w_spe && pg.w_spe.size())
      grad.projection.mass.w_spe->weights = pg.w_spe;
    if (grad.projection.momentum.kernel && pg.kernel.size())
      grad.projection.momentum.kernel->multiplier.weights = pg.kernel;
  }

  const auto act = p.hyper.activation;
  const auto& out_grid = tape.fno_out.grid();
  accumulate_affine(activate(tape.head_pre, act), g_out, grad.head2_w, grad.head2_b);
  RealField g_head = activate_backward(tape.head_pre, apply_transpose(g_out, p.head2_w), act);
  const RealField& top = tape.hidden.back();
  const bool padded = !(top.grid().sizes() == out_grid.sizes());
  accumulate_affine(padded ? crop(top, out_grid.sizes()) : top, g_head, grad.head1_w, grad.head1_b);
  RealField g_v = apply_transpose(g_head, p.head1_w);
  if (padded) {
    std::vector<std::size_t> extra(out_grid.rank());
    for (std::size_t a = 0; a < extra.size(); ++a)
      extra[a] = top.grid().size(a) - out_grid.size(a);
    g_v = zero_pad(g_v, extra);
  }

  const auto placement = p.modes.placement(top.grid().sizes());
  for (std::size_t l = p.layers.size(); l-- > 0;) {
    const RealField g_pre = activate_backward(tape.pre[l], g_v, act);
    auto& gl = grad.layers[l];
    accumulate_affine(tape.hidden[l], g_pre, gl.w, gl.b);
    RealField next = apply_transpose(g_pre, p.layers[l].w);
    next.data() += spectral_conv_backward(tape.spec[l], g_pre, p.layers[l].kernel, placement, gl.kernel).data();
    g_v = std::move(next);
  }
  if (padded)
    g_v = crop(g_v, out_grid.sizes());
  accumulate_affine(tape.input, g_v, grad.lift_w, grad.lift_b);
  if (input_grad) {
    *input_grad = channel_slice(apply_transpose(g_v, p.lift_w), 0, tape.field_channels);
  }
  return grad;
}

} // namespace pcno
