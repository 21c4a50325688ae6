#pragma once

#include <cstddef>

#include <Eigen/Core>

namespace pcno {

/// lr * (1 + cos(pi * step / total)) / 2; total == 0 returns lr.
double cosine_lr(double lr, std::size_t step, std::size_t total);

/// Adam with decoupled weight decay over a flat parameter vector.
class AdamW
{
public:
  struct Options
  {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 1e-4;
  };

  AdamW(Eigen::Index size, Options options);
  explicit AdamW(Eigen::Index size) : AdamW(size, Options{}) {}

  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, double lr);
  std::size_t steps() const { return t_; }

private:
  Options opt_;
  Eigen::VectorXd m_, v_;
  std::size_t t_ = 0;
};

} // namespace pcno
