#include <gtest/gtest.h>

#include <algorithm>
#include <vector>

#include "fixtures.hpp"
#include "mrcdd/bench.hpp"
#include "mrcdd/random.hpp"

namespace mrcdd {
namespace {

using testing::max_abs_diff;
using testing::paper_plant;
using testing::paper_trajectory;

Matrix row(std::initializer_list<double> values) {
  Matrix m(1, static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double v : values) m(0, i++) = v;
  return m;
}

double median(std::vector<double> v) { return bench::quantile(std::move(v), 0.5); }

TEST(ExperimentData, BlocksUnrolled) {
  Matrix states(2, 3), inputs(1, 2);
  states << 1, 2, 3, 4, 5, 6;
  inputs << 7, 8;
  const ExperimentData d = make_experiment_data(inputs, states);
  EXPECT_EQ(d.x0_block, states.leftCols(2));
  EXPECT_EQ(d.x1_block, states.rightCols(2));
  EXPECT_EQ(d.u0, inputs);
  EXPECT_EQ(d.phi.topRows(1), inputs);
  EXPECT_EQ(d.phi.bottomRows(2), states.leftCols(2));
}

TEST(ExperimentData, ScalarSigma) {
  const ExperimentData d = make_experiment_data(row({1, 1}), row({0, 1, 1}));
  Matrix phi(2, 2), sigma(2, 2);
  phi << 1, 1, 0, 1;
  sigma << 1, 0.5, 0.5, 0.5;
  EXPECT_EQ(d.phi, phi);
  EXPECT_LT(max_abs_diff(d.sigma, sigma), 1e-15);
}

TEST(ExperimentData, NoiselessTrajectoryIgnoresFlag) {
  const Trajectory t = paper_trajectory(40, 0.0, 3);
  EXPECT_EQ(build_experiment_data(t, true).phi, build_experiment_data(t, false).phi);
}

TEST(ExperimentData, Errors) {
  EXPECT_THROW(make_experiment_data(Matrix(1, 0), Matrix::Zero(1, 1)), InvalidArgument);
  EXPECT_THROW(make_experiment_data(Matrix::Zero(1, 3), Matrix::Zero(2, 3)), DimensionError);
}

TEST(Excitation, ZeroRowFails) {
  Matrix inputs = Matrix::Zero(2, 10);
  inputs.row(0).setOnes();
  RandomStream rng(1);
  const ExperimentData d = make_experiment_data(inputs, rng.normal_matrix(2, 11, 1.0));
  const ExcitationReport r = check_persistence_of_excitation(d);
  EXPECT_FALSE(r.satisfied);
  EXPECT_EQ(r.rank, 3);
}

TEST(Excitation, IdentityPhi) {
  // m = n = 1, T = 2: inputs [1 0], states [0 1 *] give Phi = I.
  const ExperimentData d = make_experiment_data(row({1, 0}), row({0, 1, 5}));
  const ExcitationReport r = check_persistence_of_excitation(d);
  EXPECT_EQ(r.rank, 2);
  EXPECT_TRUE(r.satisfied);
  EXPECT_NEAR(r.min_singular_value, 1.0, 1e-15);
}

TEST(Excitation, BenchmarkExperimentIsExciting) {
  const ExcitationReport r =
      check_persistence_of_excitation(build_experiment_data(paper_trajectory(30000, 0.0, 1), false));
  EXPECT_TRUE(r.satisfied);
  EXPECT_TRUE(r.sigma_usable);
}

TEST(Project, ScalarByHand) {
  const ExperimentData d = make_experiment_data(row({1, 1}), row({0, 1, 1}));
  const ProjectedData p = project(d);
  // X1 = [1 1], Phi^T = [[1 0], [1 1]] -> X1 Phi^T / 2 = [1, 0.5].
  EXPECT_LT(max_abs_diff(p.x1_bar, row({1, 0.5})), 1e-15);
  EXPECT_LT(max_abs_diff(p.x0_bar, row({0.5, 0.5})), 1e-15);
  EXPECT_LT(max_abs_diff(p.u0_bar, row({1, 0.5})), 1e-15);
  EXPECT_EQ(p.regime, Regime::RawNoisy);
  EXPECT_EQ(project(d, true).regime, Regime::NoiseFree);
}

TEST(Project, SingleSampleOuterProducts) {
  Matrix u(2, 1), x(1, 2);
  u << 2, -1;
  x << 3, 4;
  const ProjectedData p = project(make_experiment_data(u, x));
  Vector phi(3);
  phi << 2, -1, 3;
  EXPECT_LT(max_abs_diff(p.u0_bar, u * phi.transpose()), 1e-15);
  EXPECT_LT(max_abs_diff(p.x1_bar, Matrix::Constant(1, 1, 4) * phi.transpose()), 1e-15);
}

TEST(Project, BlockIdentity) {
  for (double variance : {0.0, 1.0}) {
    const ProjectedData p = project(build_experiment_data(paper_trajectory(500, variance, 2), true));
    Matrix stacked(6, 6);
    stacked << p.u0_bar, p.x0_bar;
    EXPECT_LT(max_abs_diff(stacked, p.sigma), 1e-12);
  }
}

TEST(Project, NoiseFreeDataConsistency) {
  const ProjectedData p = testing::paper_noise_free_projection(800, 4);
  const LtiSystem sys = paper_plant();
  EXPECT_LT(max_abs_diff(p.x1_bar, sys.a() * p.x0_bar + sys.b() * p.u0_bar), 1e-10);
}

TEST(Project, NoisyDynamicsWithNoiseOracle) {
  const Trajectory t = paper_trajectory(600, 1.0, 5);
  const ExperimentData d = build_experiment_data(t, true);
  const ProjectedData p = project(d);
  const double T = 600.0;
  const Matrix v0_bar = t.noise.leftCols(600) * d.phi.transpose() / T;
  const Matrix v1_bar = t.noise.rightCols(600) * d.phi.transpose() / T;
  const LtiSystem sys = paper_plant();
  const Matrix rhs = sys.a() * p.x0_bar + sys.b() * p.u0_bar - (sys.a() * v0_bar - v1_bar);
  EXPECT_LT(max_abs_diff(p.x1_bar, rhs), 1e-10);
  // w0_bar = A v0_bar - v1_bar is what breaks the noise-free identity.
  EXPECT_GT(max_abs_diff(p.x1_bar, sys.a() * p.x0_bar + sys.b() * p.u0_bar), 1e-3);
}

TEST(BiasCorrect, ZeroVarianceIsIdentity) {
  const ProjectedData p = project(build_experiment_data(paper_trajectory(100, 1.0, 1), true));
  const ProjectedData c = bias_correct(p, 0.0);
  EXPECT_EQ(c.x0_bar, p.x0_bar);
  EXPECT_EQ(c.regime, Regime::BiasCorrected);
}

TEST(BiasCorrect, ScalarDefinition) {
  ProjectedData p;
  p.x0_bar = row({0.7, 1.3});
  p.x1_bar = row({0.1, 0.2});
  p.u0_bar = row({0.3, 0.4});
  p.sigma = Matrix::Identity(2, 2);
  p.t_len = 10;
  const ProjectedData c = bias_correct(p, 0.25);
  EXPECT_EQ(c.x0_bar, row({0.7, 1.3 - 0.25}));
}

TEST(BiasCorrect, TouchesOnlyStateBlockOfX0Bar) {
  const ProjectedData p = project(build_experiment_data(paper_trajectory(100, 1.0, 6), true));
  const ProjectedData c = bias_correct(p, 0.4);
  EXPECT_EQ(c.x1_bar, p.x1_bar);
  EXPECT_EQ(c.u0_bar, p.u0_bar);
  EXPECT_EQ(c.sigma, p.sigma);
  EXPECT_EQ(c.x0_bar.leftCols(3), p.x0_bar.leftCols(3));
  EXPECT_LT(max_abs_diff(c.x0_bar.rightCols(3), p.x0_bar.rightCols(3) - 0.4 * Matrix::Identity(3, 3)),
            1e-15);
}

TEST(BiasCorrect, Errors) {
  const ProjectedData p = project(build_experiment_data(paper_trajectory(50, 1.0, 6), true));
  EXPECT_THROW(bias_correct(bias_correct(p, 0.1), 0.1), RegimeError);
  EXPECT_THROW(bias_correct(testing::paper_noise_free_projection(50, 1), 0.1), RegimeError);
  EXPECT_THROW(bias_correct(p, -1.0), InvalidArgument);
}

TEST(Iv, NoiseFreeInstrumentsReproduceCleanProjection) {
  const Trajectory t = paper_trajectory(300, 0.0, 7);
  const ExperimentData d = build_experiment_data(t, false);
  const ProjectedData iv = build_iv_projection(d, d);
  const ProjectedData clean = project(d, true);
  EXPECT_LT(max_abs_diff(iv.x0_bar, clean.x0_bar), 1e-12);
  EXPECT_LT(max_abs_diff(iv.x1_bar, clean.x1_bar), 1e-12);
  EXPECT_EQ(iv.regime, Regime::InstrumentalVariable);
}

TEST(Iv, OwnStatesReduceToProject) {
  const ExperimentData d = build_experiment_data(paper_trajectory(300, 1.0, 7), true);
  const ProjectedData iv = build_iv_projection(d, d.x0_block);
  const ProjectedData p = project(d);
  EXPECT_LT(max_abs_diff(iv.x0_bar, p.x0_bar), 1e-12);
  EXPECT_LT(max_abs_diff(iv.x1_bar, p.x1_bar), 1e-12);
  EXPECT_LT(max_abs_diff(iv.u0_bar, p.u0_bar), 1e-12);
}

TEST(Iv, InputMismatchRejected) {
  const ExperimentData a = build_experiment_data(paper_trajectory(100, 1.0, 1), true);
  const ExperimentData b = build_experiment_data(paper_trajectory(100, 1.0, 2), true);
  EXPECT_THROW(build_iv_projection(a, b), InputMismatchError);
  EXPECT_THROW(build_iv_projection(a, Matrix::Zero(3, 99)), DimensionError);
}

TEST(Averaged, SingleExperimentMatchesProject) {
  const ExperimentData d = build_experiment_data(paper_trajectory(100, 1.0, 3), true);
  const std::vector<ExperimentData> one{d};
  const ProjectedData avg = build_averaged_projection(one);
  EXPECT_LT(max_abs_diff(avg.x0_bar, project(d).x0_bar), 1e-15);
  EXPECT_EQ(avg.regime, Regime::Averaged);
}

TEST(Averaged, MirroredNoiseCancels) {
  const Trajectory t = paper_trajectory(100, 1.0, 4);
  const Matrix mirrored = t.states_clean - t.noise;
  const std::vector<ExperimentData> pair{make_experiment_data(t.inputs, t.states_noisy),
                                         make_experiment_data(t.inputs, mirrored)};
  const ProjectedData avg = build_averaged_projection(pair);
  const ProjectedData clean = project(build_experiment_data(t, false), true);
  EXPECT_LT(max_abs_diff(avg.x0_bar, clean.x0_bar), 1e-12);
  EXPECT_LT(max_abs_diff(avg.x1_bar, clean.x1_bar), 1e-12);
}

TEST(Averaged, Errors) {
  EXPECT_THROW(build_averaged_projection({}), InvalidArgument);
  const std::vector<ExperimentData> mixed{
      build_experiment_data(paper_trajectory(50, 1.0, 1), true),
      build_experiment_data(paper_trajectory(50, 1.0, 2), true)};
  EXPECT_THROW(build_averaged_projection(mixed), InputMismatchError);
  const std::vector<ExperimentData> sizes{
      build_experiment_data(paper_trajectory(50, 1.0, 1), true),
      build_experiment_data(paper_trajectory(60, 1.0, 1), true)};
  EXPECT_THROW(build_averaged_projection(sizes), DimensionError);
}

TEST(VarianceEstimate, Examples) {
  RandomStream rng(1);
  const Matrix x = rng.normal_matrix(3, 20, 1.0);
  EXPECT_EQ(estimate_variance_from_repeats(x, x), 0.0);
  EXPECT_DOUBLE_EQ(estimate_variance_from_repeats(x + Matrix::Constant(3, 20, 2.0), x), 2.0);
  EXPECT_THROW(estimate_variance_from_repeats(x, x.leftCols(5)), DimensionError);
  const Vector per = estimate_component_variances(x + Matrix::Constant(3, 20, 2.0), x);
  EXPECT_LT((per - Vector::Constant(3, 2.0)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(VarianceEstimate, ConcentratesAtBenchmarkScale) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Trajectory a = paper_trajectory(30000, 0.25, s);
    // Same inputs and x0, fresh noise.
    const Trajectory b = simulate_open_loop(paper_plant(), a.inputs, Vector::Zero(3),
                                            {0.25, derive_seed(s, 99)});
    const double est = estimate_variance_from_repeats(a.states_noisy, b.states_noisy);
    EXPECT_GE(est, 0.24);
    EXPECT_LE(est, 0.26);
  }
}

TEST(Convergence, CorrectedProjectionErrorShrinksWithT) {
  constexpr int kSeeds = 50;
  double previous_bc = INFINITY, previous_iv = INFINITY;
  for (Eigen::Index t_len : {300, 3000, 30000}) {
    std::vector<double> bc, iv;
    for (int s = 0; s < kSeeds; ++s) {
      const auto seed = static_cast<std::uint64_t>(s);
      const Trajectory a = paper_trajectory(t_len, 0.25, seed);
      const Trajectory b = simulate_open_loop(paper_plant(), a.inputs, Vector::Zero(3),
                                              {0.25, derive_seed(seed, 3)});
      const ExperimentData da = build_experiment_data(a, true);
      const Matrix clean = project(build_experiment_data(a, false), true).x0_bar;
      bc.push_back((bias_correct(project(da), 0.25).x0_bar - clean).norm());
      iv.push_back((build_iv_projection(da, build_experiment_data(b, true)).x0_bar - clean).norm());
    }
    const double mbc = median(bc), miv = median(iv);
    EXPECT_LE(mbc, previous_bc) << "T = " << t_len;
    EXPECT_LE(miv, previous_iv) << "T = " << t_len;
    previous_bc = mbc;
    previous_iv = miv;
  }
}

}  // namespace
}  // namespace mrcdd
