#include <gtest/gtest.h>

#include "mrcdd/random.hpp"
#include "sdp_oracle.hpp"

namespace mrcdd::sdp {
namespace {

using testing::brute_force_2x2;
using testing::random_2x2_instance;

// The oracle itself, on instances with known answers.
TEST(Oracle, SpectralPairWithSlackVariable) {
  // min t  s.t.  s = 0,  [[t, 1 + s], [1 + s, t]] >= 0  ->  t* = 1.
  SdpProblem p;
  p.num_vars = 2;
  p.objective = Vector::Unit(2, 0);
  p.eq_matrix = Matrix::Zero(1, 2);
  p.eq_matrix(0, 1) = 1.0;
  p.eq_rhs = Vector::Zero(1);
  Matrix off(2, 2);
  off << 0, 1, 1, 0;
  p.blocks.push_back({off, {Matrix::Identity(2, 2), off}});
  const testing::OracleResult r = brute_force_2x2(p);
  ASSERT_TRUE(r.bounded);
  EXPECT_NEAR(r.objective, 1.0, 1e-9);
}

TEST(Oracle, DiskMinimum) {
  // [[1 + x, y], [y, 1 - x]] >= 0 is the unit disk; min x + y = -sqrt(2).
  SdpProblem p;
  p.num_vars = 3;
  p.objective = Vector::Zero(3);
  p.objective << 1, 1, 0;
  p.eq_matrix = Matrix::Zero(1, 3);
  p.eq_matrix(0, 2) = 1.0;
  p.eq_rhs = Vector::Zero(1);
  Matrix ex(2, 2), ey(2, 2), ez(2, 2);
  ex << 1, 0, 0, -1;
  ey << 0, 1, 1, 0;
  ez << 1, 0, 0, 1;
  p.blocks.push_back({Matrix::Identity(2, 2), {ex, ey, ez}});
  const testing::OracleResult r = brute_force_2x2(p);
  EXPECT_NEAR(r.objective, -std::sqrt(2.0), 1e-9);
}

TEST(Oracle, InstancesAreBoundedAndFeasible) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const SdpProblem p = random_2x2_instance(s, 4);
    const testing::OracleResult r = brute_force_2x2(p);
    ASSERT_TRUE(r.bounded);
    const SolutionCheck c = check_solution(p, r.y);
    EXPECT_LT(c.equality_residual, 1e-9);
    EXPECT_GT(c.min_lmi_eigs[0], -1e-7);
  }
}

// The solver against the oracle.
TEST(OracleComparison, ThirtyRandomInstances) {
  for (std::uint64_t s = 0; s < 30; ++s) {
    const int k = 1 + static_cast<int>(s % 6);
    const SdpProblem p = random_2x2_instance(derive_seed(2025, s), k);
    const testing::OracleResult ref = brute_force_2x2(p);
    ASSERT_TRUE(ref.bounded) << "instance " << s;
    const SdpSettings settings;
    const SdpSolution sol = solve(p, settings);
    ASSERT_EQ(sol.status, SdpStatus::Optimal) << "instance " << s;
    EXPECT_NEAR(sol.objective_value, ref.objective, 1e-5) << "instance " << s << ", k = " << k;
    EXPECT_TRUE(check_solution(p, sol.y).passes(settings)) << "instance " << s;
  }
}

}  // namespace
}  // namespace mrcdd::sdp
