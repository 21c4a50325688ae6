#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include <Eigen/Core>

namespace pcno {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

/// Seed of the named sub-stream `name` derived from a root seed.
/// Streams are independent of each other, so adding a new stream never
/// perturbs draws made from existing ones.
std::uint64_t stream_seed(std::uint64_t root, std::string_view name);

Rng make_stream(std::uint64_t root, std::string_view name);

/// Stream for item `index` of family `name`, e.g. ("solver", 3) -> "solver/3".
Rng make_stream(std::uint64_t root, std::string_view name, std::uint64_t index);

Eigen::VectorXd standard_normal(Rng& rng, Eigen::Index n);

double uniform(Rng& rng, double lo, double hi);

} // namespace pcno
