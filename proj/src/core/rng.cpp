#include "pcno/core/rng.hpp"

#include <string>

namespace pcno {

std::uint64_t splitmix64(std::uint64_t x)
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t root, std::string_view name)
{
  // FNV-1a over the name, then mixed with the root seed.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return splitmix64(splitmix64(root) ^ h);
}

Rng make_stream(std::uint64_t root, std::string_view name)
{
  return Rng(stream_seed(root, name));
}

Rng make_stream(std::uint64_t root, std::string_view name, std::uint64_t index)
{
  std::string full(name);
  full += '/';
  full += std::to_string(index);
  return make_stream(root, full);
}

Eigen::VectorXd standard_normal(Rng& rng, Eigen::Index n)
{
  std::normal_distribution<double> dist(0.0, 1.0);
  Eigen::VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i)
    out[i] = dist(rng);
  return out;
}

double uniform(Rng& rng, double lo, double hi)
{
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

} // namespace pcno
