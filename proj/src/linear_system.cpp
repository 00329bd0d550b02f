#include "mrcdd/linear_system.hpp"

#include <cmath>
#include <string>

#include "mrcdd/random.hpp"

namespace mrcdd {

namespace {

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite())
    throw InvalidArgument(std::string(what) + " has non-finite entries");
}

}  // namespace

LtiSystem::LtiSystem(Matrix a, Matrix b) : a_(std::move(a)), b_(std::move(b)) {
  if (a_.rows() < 1 || a_.rows() != a_.cols())
    throw DimensionError("A must be square and non-empty, got " + shape(a_));
  if (b_.rows() != a_.rows() || b_.cols() < 1)
    throw DimensionError("B must be n x m with n = " +
                         std::to_string(a_.rows()) + ", got " + shape(b_));
  require_finite(a_, "A");
  require_finite(b_, "B");
}

ReferenceModel::ReferenceModel(Matrix am, Matrix bm)
    : am_(std::move(am)), bm_(std::move(bm)) {
  if (am_.rows() < 1 || am_.rows() != am_.cols())
    throw DimensionError("A_M must be square and non-empty, got " + shape(am_));
  if (bm_.rows() != am_.rows() || bm_.cols() != am_.rows())
    throw DimensionError("B_M must be n x n, got " + shape(bm_));
  require_finite(am_, "A_M");
  require_finite(bm_, "B_M");
  if (spectral_radius(am_) >= 1.0)
    throw InvalidArgument("reference model A_M is not Schur stable");
}

Matrix draw_noise(Eigen::Index n, Eigen::Index columns, const NoiseSpec& noise) {
  if (noise.variance < 0.0 || !std::isfinite(noise.variance))
    throw InvalidArgument("noise variance must be finite and >= 0");
  if (noise.variance == 0.0) return Matrix::Zero(n, columns);
  RandomStream rng(noise.seed);
  return rng.normal_matrix(n, columns, std::sqrt(noise.variance));
}

Trajectory simulate_open_loop(const LtiSystem& sys, const Matrix& inputs,
                              const Vector& x0, const NoiseSpec& noise) {
  if (inputs.rows() != sys.m())
    throw DimensionError("inputs must have m = " + std::to_string(sys.m()) +
                         " rows, got " + shape(inputs));
  if (x0.size() != sys.n())
    throw DimensionError("x0 must have n = " + std::to_string(sys.n()) +
                         " entries");
  require_finite(inputs, "inputs");
  require_finite(x0, "x0");

  const Eigen::Index steps = inputs.cols();
  Trajectory traj;
  traj.inputs = inputs;
  traj.states_clean.resize(sys.n(), steps + 1);
  traj.states_clean.col(0) = x0;
  for (Eigen::Index t = 0; t < steps; ++t) {
    traj.states_clean.col(t + 1).noalias() =
        sys.a() * traj.states_clean.col(t) + sys.b() * inputs.col(t);
  }
  traj.noise = draw_noise(sys.n(), steps + 1, noise);
  traj.states_noisy = traj.states_clean + traj.noise;
  return traj;
}

Trajectory simulate_closed_loop(const LtiSystem& sys, const Matrix& kx,
                                const Matrix& kr, const Matrix& reference,
                                const Vector& x0, const NoiseSpec& noise) {
  if (kx.rows() != sys.m() || kx.cols() != sys.n() || kr.rows() != sys.m() ||
      kr.cols() != sys.n())
    throw DimensionError("gains must be m x n, got K_x " + shape(kx) +
                         ", K_r " + shape(kr));
  if (reference.rows() != sys.n())
    throw DimensionError("reference must have n rows, got " + shape(reference));
  if (x0.size() != sys.n()) throw DimensionError("x0 must have n entries");
  require_finite(reference, "reference");
  require_finite(x0, "x0");

  const Eigen::Index steps = reference.cols();
  Trajectory traj;
  traj.noise = draw_noise(sys.n(), steps + 1, noise);
  traj.inputs.resize(sys.m(), steps);
  traj.states_clean.resize(sys.n(), steps + 1);
  traj.states_clean.col(0) = x0;
  for (Eigen::Index t = 0; t < steps; ++t) {
    const Vector measured = traj.states_clean.col(t) + traj.noise.col(t);
    traj.inputs.col(t).noalias() = kx * measured + kr * reference.col(t);
    traj.states_clean.col(t + 1).noalias() =
        sys.a() * traj.states_clean.col(t) + sys.b() * traj.inputs.col(t);
  }
  traj.states_noisy = traj.states_clean + traj.noise;
  return traj;
}

Matrix simulate_reference(const ReferenceModel& model, const Matrix& reference,
                          const Vector& x0) {
  if (reference.rows() != model.n())
    throw DimensionError("reference must have n rows, got " + shape(reference));
  if (x0.size() != model.n()) throw DimensionError("x0 must have n entries");
  require_finite(reference, "reference");
  require_finite(x0, "x0");

  Matrix xd(model.n(), reference.cols() + 1);
  xd.col(0) = x0;
  for (Eigen::Index t = 0; t < reference.cols(); ++t)
    xd.col(t + 1).noalias() = model.am() * xd.col(t) + model.bm() * reference.col(t);
  return xd;
}

double spectral_radius(const Matrix& matrix) {
  if (matrix.rows() != matrix.cols())
    throw DimensionError("spectral_radius needs a square matrix, got " +
                         shape(matrix));
  if (matrix.size() == 0) return 0.0;
  require_finite(matrix, "matrix");
  Eigen::EigenSolver<Matrix> solver(matrix, /*computeEigenvectors=*/false);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

double spectral_norm(const Matrix& matrix) {
  if (matrix.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(matrix);
  return svd.singularValues()(0);
}

}  // namespace mrcdd
