#pragma once

#include <cstdint>

#include "mrcdd/bench.hpp"
#include "mrcdd/linear_system.hpp"
#include "mrcdd/synthesis.hpp"

namespace mrcdd::testing {

LtiSystem paper_plant();
ReferenceModel paper_model();

/// Open-loop run of the benchmark plant with u ~ U[-2, 2] and zero x0.
Trajectory paper_trajectory(Eigen::Index t_len, double variance, std::uint64_t seed);

/// Projection of clean data, regime NoiseFree.
ProjectedData paper_noise_free_projection(Eigen::Index t_len, std::uint64_t seed);

/// Open-loop stable plant (rho(A) < 0.95) with a reachable model:
/// A_M = A + B K_x, B_M = B K_r, rho(A_M) < 0.9.
struct FeasiblePlant {
  LtiSystem sys;
  ReferenceModel model;
  Matrix kx;
  Matrix kr;
};

FeasiblePlant random_feasible_plant(std::uint64_t seed, Eigen::Index n = 3, Eigen::Index m = 3);

double max_abs_diff(const Matrix& a, const Matrix& b);

}  // namespace mrcdd::testing
