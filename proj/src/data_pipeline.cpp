#include "mrcdd/data_pipeline.hpp"

#include <cmath>
#include <string>

namespace mrcdd {

std::string_view to_string(Regime regime) {
  switch (regime) {
    case Regime::NoiseFree: return "noise_free";
    case Regime::RawNoisy: return "raw_noisy";
    case Regime::BiasCorrected: return "bias_corrected";
    case Regime::InstrumentalVariable: return "instrumental_variable";
    case Regime::Averaged: return "averaged";
  }
  return "unknown";
}

ExperimentData make_experiment_data(Matrix inputs, const Matrix& states) {
  const Eigen::Index steps = inputs.cols();
  if (steps < 1) throw InvalidArgument("experiment needs T >= 1 samples");
  if (states.cols() != steps + 1)
    throw DimensionError("states must have T+1 = " + std::to_string(steps + 1) +
                         " columns, got " + std::to_string(states.cols()));
  const Eigen::Index n = states.rows(), m = inputs.rows();
  if (n < 1 || m < 1) throw DimensionError("empty state or input dimension");

  ExperimentData data;
  data.u0 = std::move(inputs);
  data.x0_block = states.leftCols(steps);
  data.x1_block = states.rightCols(steps);
  data.phi.resize(m + n, steps);
  data.phi.topRows(m) = data.u0;
  data.phi.bottomRows(n) = data.x0_block;
  data.sigma.noalias() = data.phi * data.phi.transpose();
  data.sigma /= static_cast<double>(steps);
  data.sigma = 0.5 * (data.sigma + data.sigma.transpose()).eval();
  return data;
}

ExperimentData build_experiment_data(const Trajectory& traj, bool use_noisy) {
  return make_experiment_data(traj.inputs,
                              use_noisy ? traj.states_noisy : traj.states_clean);
}

ExcitationReport check_persistence_of_excitation(const ExperimentData& data,
                                                 double tol) {
  ExcitationReport report;
  // Singular values of Phi from its transpose: JacobiSVD preconditions tall
  // matrices with a QR, so cost stays linear in T.
  Eigen::JacobiSVD<Matrix> svd(data.phi.transpose());
  const Vector& sv = svd.singularValues();
  const Eigen::Index full = data.phi.rows();
  if (sv.size() > 0) {
    const double cutoff = tol * sv(0);
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      if (sv(i) > cutoff) ++report.rank;
    report.min_singular_value = sv.size() == full ? sv(sv.size() - 1) : 0.0;
  }
  if (data.sigma.size() > 0) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(data.sigma, Eigen::EigenvaluesOnly);
    report.sigma_min_eigenvalue = eig.eigenvalues()(0);
  }
  report.satisfied = report.rank == full;
  report.sigma_usable = report.sigma_min_eigenvalue > kSigmaMinEigenvalue;
  return report;
}

namespace {

ProjectedData project_onto(const ExperimentData& data, const Matrix& phi_proj,
                           Regime regime) {
  const double inv_t = 1.0 / static_cast<double>(data.t_len());
  ProjectedData out;
  out.x0_bar.noalias() = data.x0_block * phi_proj.transpose();
  out.x1_bar.noalias() = data.x1_block * phi_proj.transpose();
  out.u0_bar.noalias() = data.u0 * phi_proj.transpose();
  out.x0_bar *= inv_t;
  out.x1_bar *= inv_t;
  out.u0_bar *= inv_t;
  out.sigma = data.sigma;
  out.regime = regime;
  out.t_len = data.t_len();
  return out;
}

}  // namespace

ProjectedData project(const ExperimentData& data, bool noise_free) {
  ProjectedData out =
      project_onto(data, data.phi, noise_free ? Regime::NoiseFree : Regime::RawNoisy);
  // Sigma is symmetrized in make_experiment_data; copy the same numbers back
  // so the block identity [U0_bar; X0_bar] == Sigma holds exactly.
  out.u0_bar = out.sigma.topRows(data.m());
  out.x0_bar = out.sigma.bottomRows(data.n());
  return out;
}

ProjectedData bias_correct(const ProjectedData& proj, double variance) {
  if (proj.regime != Regime::RawNoisy)
    throw RegimeError("bias correction needs raw noisy data, got " +
                      std::string(to_string(proj.regime)));
  if (!(variance >= 0.0) || !std::isfinite(variance))
    throw InvalidArgument("noise variance must be finite and >= 0");
  ProjectedData out = proj;
  const Eigen::Index m = proj.m();
  for (Eigen::Index i = 0; i < proj.n(); ++i) out.x0_bar(i, m + i) -= variance;
  out.regime = Regime::BiasCorrected;
  return out;
}

ProjectedData build_iv_projection(const ExperimentData& data,
                                  const Matrix& iv_states) {
  if (iv_states.rows() != data.n() || iv_states.cols() != data.t_len())
    throw DimensionError("instrument states must be n x T");
  Matrix phi_iv(data.m() + data.n(), data.t_len());
  phi_iv.topRows(data.m()) = data.u0;
  phi_iv.bottomRows(data.n()) = iv_states;
  return project_onto(data, phi_iv, Regime::InstrumentalVariable);
}

ProjectedData build_iv_projection(const ExperimentData& data,
                                  const ExperimentData& instruments) {
  if (instruments.u0.rows() != data.u0.rows() ||
      instruments.u0.cols() != data.u0.cols() ||
      !(instruments.u0.array() == data.u0.array()).all())
    throw InputMismatchError(
        "instrument experiment was not driven by the same input sequence");
  return build_iv_projection(data, instruments.x0_block);
}

ProjectedData build_averaged_projection(std::span<const ExperimentData> experiments) {
  if (experiments.empty()) throw InvalidArgument("no experiments to average");
  const ExperimentData& first = experiments.front();
  Matrix states(first.n(), first.t_len() + 1);
  states.setZero();
  for (const ExperimentData& e : experiments) {
    if (e.t_len() != first.t_len() || e.n() != first.n() || e.m() != first.m())
      throw DimensionError("repeated experiments have different sizes");
    if (!(e.u0.array() == first.u0.array()).all())
      throw InputMismatchError("repeated experiments use different inputs");
    states.leftCols(first.t_len()) += e.x0_block;
    states.rightCols(1) += e.x1_block.rightCols(1);
  }
  states /= static_cast<double>(experiments.size());
  ExperimentData averaged = make_experiment_data(first.u0, states);
  ProjectedData out = project(averaged);
  out.regime = Regime::Averaged;
  return out;
}

namespace {

void check_repeat_shapes(const Matrix& x_a, const Matrix& x_b) {
  if (x_a.rows() != x_b.rows() || x_a.cols() != x_b.cols())
    throw DimensionError("repeated state sequences have different shapes");
  if (x_a.size() == 0) throw DimensionError("empty state sequences");
}

}  // namespace

double estimate_variance_from_repeats(const Matrix& x_a, const Matrix& x_b) {
  check_repeat_shapes(x_a, x_b);
  return (x_a - x_b).squaredNorm() / (2.0 * static_cast<double>(x_a.size()));
}

Vector estimate_component_variances(const Matrix& x_a, const Matrix& x_b) {
  check_repeat_shapes(x_a, x_b);
  return (x_a - x_b).rowwise().squaredNorm() / (2.0 * static_cast<double>(x_a.cols()));
}

}  // namespace mrcdd
