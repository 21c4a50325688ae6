#include "pcno/surrogate/optimizer.hpp"

#include <cmath>
#include <numbers>

#include "pcno/core/error.hpp"

namespace pcno {

double cosine_lr(double lr, std::size_t step, std::size_t total)
{
  if (total == 0)
    return lr;
  const double frac = static_cast<double>(step) / static_cast<double>(total);
  return 0.5 * lr * (1.0 + std::cos(std::numbers::pi * frac));
}

AdamW::AdamW(Eigen::Index size, Options options)
  : opt_(options), m_(Eigen::VectorXd::Zero(size)), v_(Eigen::VectorXd::Zero(size))
{
  require(options.beta1 >= 0 && options.beta1 < 1 && options.beta2 >= 0 && options.beta2 < 1,
          "Adam betas must lie in [0, 1)");
  require(options.eps > 0 && options.weight_decay >= 0, "Adam needs eps > 0 and weight_decay >= 0");
}

void AdamW::step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, double lr)
{
  require(params.size() == m_.size() && grad.size() == m_.size(), "optimizer state does not match the parameters");
  ++t_;
  m_ = opt_.beta1 * m_ + (1.0 - opt_.beta1) * grad;
  v_ = opt_.beta2 * v_ + (1.0 - opt_.beta2) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(opt_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(opt_.beta2, static_cast<double>(t_));
  params *= 1.0 - lr * opt_.weight_decay;
  params.array() -= lr * (m_.array() / c1) / ((v_.array() / c2).sqrt() + opt_.eps);
}

} // namespace pcno
