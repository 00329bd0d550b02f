#pragma once

#include <cstdint>

#include "mrcdd/sdp.hpp"

namespace mrcdd::testing {

/// Brute-force reference for   min c'y  s.t.  a'y = b,  F0 + sum y_i F_i >= 0
/// with a single 2x2 LMI block and at most a handful of variables.
///
/// The equality is eliminated, the LMI is mapped to the 2x2 PSD cone in
/// (p, q, r) coordinates and the reduced problem is solved geometrically:
/// a point, a segment (closed form), a conic section (grid over rank-1
/// boundary points rho v(theta) v(theta)^T, then golden-section refinement)
/// or the full cone (optimum at the apex). No interior-point code is shared
/// with the solver under test.
struct OracleResult {
  double objective = 0.0;
  Vector y;
  bool bounded = true;
};

OracleResult brute_force_2x2(const sdp::SdpProblem& problem);

/// Random instance with a strictly feasible primal (F(y0) = delta I) and a
/// strictly feasible dual (c = nu a + A*(Z), Z > 0), so the optimum is finite
/// and attained.
sdp::SdpProblem random_2x2_instance(std::uint64_t seed, int num_vars);

}  // namespace mrcdd::testing
