#pragma once

#include <span>
#include <string_view>

#include "mrcdd/linear_system.hpp"
#include "mrcdd/types.hpp"

namespace mrcdd {

/// Block matrices of one experiment of length T:
///   U0 = [u(0) .. u(T-1)], X0 = [x(0) .. x(T-1)], X1 = [x(1) .. x(T)],
///   Phi = [U0; X0], Sigma = Phi Phi^T / T.
struct ExperimentData {
  Matrix u0;        // m x T
  Matrix x0_block;  // n x T
  Matrix x1_block;  // n x T
  Matrix phi;       // (m+n) x T
  Matrix sigma;     // (m+n) x (m+n)

  Eigen::Index t_len() const { return u0.cols(); }
  Eigen::Index n() const { return x0_block.rows(); }
  Eigen::Index m() const { return u0.rows(); }
};

enum class Regime { NoiseFree, RawNoisy, BiasCorrected, InstrumentalVariable, Averaged };

std::string_view to_string(Regime regime);

/// T-normalized products X1 Phi'^T / T, X0 Phi'^T / T, U0 Phi'^T / T, where
/// Phi' is Phi itself or the instrument matrix. sigma is always the sample
/// covariance of the underlying experiment.
struct ProjectedData {
  Matrix x0_bar;  // n x (m+n)
  Matrix x1_bar;  // n x (m+n)
  Matrix u0_bar;  // m x (m+n)
  Matrix sigma;   // (m+n) x (m+n)
  Regime regime = Regime::RawNoisy;
  Eigen::Index t_len = 0;

  Eigen::Index n() const { return x0_bar.rows(); }
  Eigen::Index m() const { return u0_bar.rows(); }
};

ExperimentData make_experiment_data(Matrix inputs, const Matrix& states);

/// States come from traj.states_noisy when use_noisy, else states_clean.
ExperimentData build_experiment_data(const Trajectory& traj, bool use_noisy);

struct ExcitationReport {
  Eigen::Index rank = 0;
  double min_singular_value = 0.0;
  double sigma_min_eigenvalue = 0.0;
  bool satisfied = false;       // rank(Phi) == m+n
  bool sigma_usable = false;    // min eig(Sigma) > kSigmaMinEigenvalue
};

inline constexpr double kRankTolerance = 1e-10;
inline constexpr double kSigmaMinEigenvalue = 1e-8;

/// Numerical rank of Phi counting singular values above tol * sigma_max.
ExcitationReport check_persistence_of_excitation(const ExperimentData& data,
                                                 double tol = kRankTolerance);

/// Regime is NoiseFree when `noise_free` is set (caller built the data from
/// clean states), RawNoisy otherwise.
ProjectedData project(const ExperimentData& data, bool noise_free = false);

/// Subtracts variance * I_n from the state block of x0_bar. Requires a
/// RawNoisy input.
ProjectedData bias_correct(const ProjectedData& proj, double variance);

/// Instruments taken from a second experiment driven by the same inputs.
/// Throws InputMismatchError unless the inputs agree bit for bit.
ProjectedData build_iv_projection(const ExperimentData& data,
                                  const ExperimentData& instruments);

/// Variant taking the instrument state block directly (no input check).
ProjectedData build_iv_projection(const ExperimentData& data,
                                  const Matrix& iv_states);

/// Averages X0 and X1 over repeated experiments, then projects.
ProjectedData build_averaged_projection(std::span<const ExperimentData> experiments);

/// Pooled noise variance from two repeats with identical inputs and initial
/// state: sum((x_a - x_b)^2) / (2 n T).
double estimate_variance_from_repeats(const Matrix& x_a, const Matrix& x_b);

/// Per-component version of the above, for diagnostics.
Vector estimate_component_variances(const Matrix& x_a, const Matrix& x_b);

}  // namespace mrcdd
