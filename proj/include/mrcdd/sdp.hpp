#pragma once

#include <filesystem>
#include <map>
#include <string_view>
#include <vector>

#include "mrcdd/types.hpp"

namespace mrcdd::sdp {

/// base + sum_i y_i coeffs[i] >= 0, all d x d symmetric.
struct LmiBlock {
  Matrix base;
  std::vector<Matrix> coeffs;  // one per decision variable

  Eigen::Index dim() const { return base.rows(); }
  Matrix evaluate(const Vector& y) const;
};

/// minimize objective^T y  s.t.  eq_matrix y = eq_rhs,  every block >= 0.
struct SdpProblem {
  Eigen::Index num_vars = 0;
  Vector objective;
  Matrix eq_matrix;  // p x k
  Vector eq_rhs;     // p
  std::vector<LmiBlock> blocks;

  /// Throws DimensionError / InvalidArgument when shapes or symmetry are off.
  void validate() const;
};

struct SdpSettings {
  double eq_tol = 1e-9;
  double psd_tol = 1e-8;
  double duality_gap_tol = 1e-8;
  int max_iter = 200;
};

enum class SdpStatus { Optimal, Infeasible, NumericalLimit };

std::string_view to_string(SdpStatus status);

struct SdpSolution {
  Vector y;
  SdpStatus status = SdpStatus::NumericalLimit;
  double objective_value = 0.0;
  double max_equality_residual = 0.0;
  std::vector<double> min_lmi_eigenvalue_per_block;
  int iterations = 0;
  double relative_gap = 0.0;
  /// tr(X S) at the start of every iteration.
  std::vector<double> gap_history;
};

SdpSolution solve(const SdpProblem& problem, const SdpSettings& settings = {});

struct SolutionCheck {
  double equality_residual = 0.0;  // max-abs of E y - f
  std::vector<double> min_lmi_eigs;
  double objective = 0.0;

  bool passes(const SdpSettings& settings) const;
};

/// Independent re-evaluation of a candidate point.
SolutionCheck check_solution(const SdpProblem& problem, const Vector& y);

/// Matrix-valued affine expression constant + sum_v y_v * coeff_v.
class AffineMatrix {
 public:
  AffineMatrix(Eigen::Index rows, Eigen::Index cols);
  static AffineMatrix constant(Matrix value);
  /// rows x cols grid of decision variables, column-major from `first_var`.
  static AffineMatrix variables(Eigen::Index rows, Eigen::Index cols,
                                Eigen::Index first_var);
  /// Symmetric n x n matrix whose upper triangle (column-major) is packed in
  /// n(n+1)/2 consecutive variables starting at `first_var`.
  static AffineMatrix symmetric_variables(Eigen::Index n, Eigen::Index first_var);

  Eigen::Index rows() const { return constant_.rows(); }
  Eigen::Index cols() const { return constant_.cols(); }
  const Matrix& constant_part() const { return constant_; }
  const std::map<Eigen::Index, Matrix>& terms() const { return terms_; }

  void add_term(Eigen::Index var, const Matrix& coeff);
  Matrix evaluate(const Vector& y) const;

  AffineMatrix transpose() const;
  AffineMatrix operator+(const AffineMatrix& other) const;
  AffineMatrix operator-(const AffineMatrix& other) const;
  AffineMatrix& operator+=(const AffineMatrix& other);

  /// [[a, b], [c, d]]
  static AffineMatrix blocks(const AffineMatrix& a, const AffineMatrix& b,
                             const AffineMatrix& c, const AffineMatrix& d);

 private:
  Matrix constant_;
  std::map<Eigen::Index, Matrix> terms_;
};

AffineMatrix operator*(const Matrix& left, const AffineMatrix& expr);
AffineMatrix operator*(double scale, const AffineMatrix& expr);

/// Incrementally assembles an SdpProblem.
class SdpBuilder {
 public:
  /// Returns the index of the first of `count` new variables.
  Eigen::Index add_variables(Eigen::Index count);
  Eigen::Index num_vars() const { return num_vars_; }

  void set_objective(Eigen::Index var, double coeff);
  /// Every entry of `expr` is constrained to zero.
  void add_equality(const AffineMatrix& expr);
  /// `expr` must be square; it is symmetrized.
  void add_lmi(const AffineMatrix& expr);

  SdpProblem build() const;

 private:
  Eigen::Index num_vars_ = 0;
  std::map<Eigen::Index, double> objective_;
  std::vector<AffineMatrix> equalities_;
  std::vector<AffineMatrix> lmis_;
};

struct Epigraph {
  Eigen::Index t_var = -1;
  AffineMatrix block{0, 0};
};

/// New scalar t with [[t I_a, M], [M^T, t I_b]] >= 0, i.e. ||M||_2 <= t. The
/// block is returned and also registered with the builder.
Epigraph epigraph_spectral_norm(SdpBuilder& builder, const AffineMatrix& expr);

/// Writes objective.txt, eq_matrix.txt, eq_rhs.txt and block_<i>_base.txt /
/// block_<i>_coeffs.txt (coefficients concatenated horizontally) into `dir`.
void dump_problem(const SdpProblem& problem, const std::filesystem::path& dir);
SdpProblem load_problem(const std::filesystem::path& dir);

}  // namespace mrcdd::sdp
