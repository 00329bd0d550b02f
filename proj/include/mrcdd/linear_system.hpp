#pragma once

#include <cstdint>

#include "mrcdd/types.hpp"

namespace mrcdd {

/// Discrete-time plant x(t+1) = A x(t) + B u(t).
class LtiSystem {
 public:
  LtiSystem(Matrix a, Matrix b);

  const Matrix& a() const { return a_; }
  const Matrix& b() const { return b_; }
  Eigen::Index n() const { return a_.rows(); }
  Eigen::Index m() const { return b_.cols(); }

 private:
  Matrix a_;
  Matrix b_;
};

/// Desired closed loop x_d(t+1) = A_M x_d(t) + B_M r(t). A_M must be Schur
/// stable.
class ReferenceModel {
 public:
  ReferenceModel(Matrix am, Matrix bm);

  const Matrix& am() const { return am_; }
  const Matrix& bm() const { return bm_; }
  Eigen::Index n() const { return am_.rows(); }

 private:
  Matrix am_;
  Matrix bm_;
};

/// Isotropic white Gaussian measurement noise, covariance variance * I.
struct NoiseSpec {
  double variance = 0.0;
  std::uint64_t seed = 0;
};

struct Trajectory {
  Matrix states_clean;  // n x (T+1)
  Matrix states_noisy;  // n x (T+1)
  Matrix inputs;        // m x T
  Matrix noise;         // n x (T+1)

  Eigen::Index length() const { return inputs.cols(); }
};

/// Draws the n x (T+1) noise matrix for a NoiseSpec. Column 0 is v(0).
Matrix draw_noise(Eigen::Index n, Eigen::Index columns, const NoiseSpec& noise);

Trajectory simulate_open_loop(const LtiSystem& sys, const Matrix& inputs,
                              const Vector& x0, const NoiseSpec& noise);

/// Closed loop under u(t) = K_x x(t) + K_r r(t), where x(t) is the noisy
/// measurement. The applied inputs are recorded in the trajectory.
Trajectory simulate_closed_loop(const LtiSystem& sys, const Matrix& kx,
                                const Matrix& kr, const Matrix& reference,
                                const Vector& x0, const NoiseSpec& noise);

Matrix simulate_reference(const ReferenceModel& model, const Matrix& reference,
                          const Vector& x0);

double spectral_radius(const Matrix& matrix);

/// Largest singular value.
double spectral_norm(const Matrix& matrix);

}  // namespace mrcdd
