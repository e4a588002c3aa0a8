#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "kbr/kernels.hpp"

namespace kbr {

/// Recorded verbatim in output metadata.
inline constexpr std::string_view kRngFamily =
    "mt19937_64 seeded with splitmix64(splitmix64(master_seed) ^ stream_index); std::normal_distribution";

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Independent random stream identified by (master_seed, stream_index).
/// Streams do not depend on the order in which they are created, so
/// replicates and trials can run in any order or in parallel.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_index)
      : engine_(splitmix64(splitmix64(master_seed) ^ stream_index)) {}

  double standard_normal() { return normal_(engine_); }
  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// mean + L z with L the Cholesky factor of cov and z standard normal.
Vector sample_mvnormal(const Vector& mean, const Matrix& cov, RngStream& rng);

}  // namespace kbr
