#pragma once

#include <cstdint>
#include <random>

#include "mrcdd/types.hpp"

namespace mrcdd {

/// SplitMix64 finalizer. Used to derive independent stream seeds from a base
/// seed and a list of stream identifiers.
std::uint64_t splitmix64(std::uint64_t x);

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream,
                          std::uint64_t substream);

/// Deterministic random source: std::mt19937_64 for the bit stream, with the
/// real-valued transforms done here (53-bit uniforms, Box-Muller normals) so
/// that output does not depend on the standard library's distributions.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1).
  double uniform();
  double uniform(double low, double high);
  double normal();

  Matrix uniform_matrix(Eigen::Index rows, Eigen::Index cols, double low,
                        double high);
  Matrix normal_matrix(Eigen::Index rows, Eigen::Index cols, double stddev);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace mrcdd
