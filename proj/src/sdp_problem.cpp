#include "mrcdd/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mrcdd/matrix_io.hpp"

namespace mrcdd::sdp {

std::string_view to_string(SdpStatus status) {
  switch (status) {
    case SdpStatus::Optimal: return "optimal";
    case SdpStatus::Infeasible: return "infeasible";
    case SdpStatus::NumericalLimit: return "numerical_limit";
  }
  return "unknown";
}

Matrix LmiBlock::evaluate(const Vector& y) const {
  Matrix out = base;
  for (std::size_t i = 0; i < coeffs.size(); ++i)
    if (y(i) != 0.0) out += y(i) * coeffs[i];
  return out;
}

void SdpProblem::validate() const {
  const Eigen::Index k = num_vars;
  if (k < 0) throw DimensionError("negative variable count");
  if (objective.size() != k) throw DimensionError("objective must have k entries");
  if (eq_matrix.cols() != k && eq_matrix.rows() > 0)
    throw DimensionError("equality matrix must have k columns");
  if (eq_rhs.size() != eq_matrix.rows())
    throw DimensionError("equality rhs must have one entry per row");
  if (!objective.allFinite() || !eq_matrix.allFinite() || !eq_rhs.allFinite())
    throw InvalidArgument("SDP data has non-finite entries");
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const LmiBlock& blk = blocks[b];
    const std::string tag = "LMI block " + std::to_string(b);
    if (blk.base.rows() != blk.base.cols() || blk.base.rows() < 1)
      throw DimensionError(tag + " base is not square");
    if (static_cast<Eigen::Index>(blk.coeffs.size()) != k)
      throw DimensionError(tag + " needs one coefficient per variable");
    auto check = [&](const Matrix& mat) {
      if (mat.rows() != blk.dim() || mat.cols() != blk.dim())
        throw DimensionError(tag + " coefficient has the wrong shape");
      if (!mat.allFinite()) throw InvalidArgument(tag + " has non-finite entries");
      const double scale = 1.0 + mat.cwiseAbs().maxCoeff();
      if ((mat - mat.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw InvalidArgument(tag + " is not symmetric");
    };
    check(blk.base);
    for (const Matrix& c : blk.coeffs) check(c);
  }
}

bool SolutionCheck::passes(const SdpSettings& settings) const {
  if (equality_residual > settings.eq_tol) return false;
  return std::all_of(min_lmi_eigs.begin(), min_lmi_eigs.end(),
                     [&](double e) { return e >= -settings.psd_tol; });
}

SolutionCheck check_solution(const SdpProblem& problem, const Vector& y) {
  if (y.size() != problem.num_vars)
    throw DimensionError("candidate has the wrong number of variables");
  SolutionCheck out;
  if (problem.eq_matrix.rows() > 0)
    out.equality_residual =
        (problem.eq_matrix * y - problem.eq_rhs).cwiseAbs().maxCoeff();
  for (const LmiBlock& blk : problem.blocks) {
    Matrix value = blk.evaluate(y);
    value = 0.5 * (value + value.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(value, Eigen::EigenvaluesOnly);
    out.min_lmi_eigs.push_back(eig.eigenvalues()(0));
  }
  out.objective = problem.objective.dot(y);
  return out;
}

// ---------------------------------------------------------------------------

AffineMatrix::AffineMatrix(Eigen::Index rows, Eigen::Index cols)
    : constant_(Matrix::Zero(rows, cols)) {}

AffineMatrix AffineMatrix::constant(Matrix value) {
  AffineMatrix out(value.rows(), value.cols());
  out.constant_ = std::move(value);
  return out;
}

AffineMatrix AffineMatrix::variables(Eigen::Index rows, Eigen::Index cols,
                                     Eigen::Index first_var) {
  AffineMatrix out(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      Matrix unit = Matrix::Zero(rows, cols);
      unit(i, j) = 1.0;
      out.terms_.emplace(first_var + j * rows + i, std::move(unit));
    }
  }
  return out;
}

AffineMatrix AffineMatrix::symmetric_variables(Eigen::Index n,
                                               Eigen::Index first_var) {
  AffineMatrix out(n, n);
  Eigen::Index var = first_var;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i <= j; ++i) {
      Matrix unit = Matrix::Zero(n, n);
      unit(i, j) = 1.0;
      unit(j, i) = 1.0;
      out.terms_.emplace(var++, std::move(unit));
    }
  }
  return out;
}

void AffineMatrix::add_term(Eigen::Index var, const Matrix& coeff) {
  if (coeff.rows() != rows() || coeff.cols() != cols())
    throw DimensionError("affine term has the wrong shape");
  auto [it, inserted] = terms_.try_emplace(var, coeff);
  if (!inserted) it->second += coeff;
}

Matrix AffineMatrix::evaluate(const Vector& y) const {
  Matrix out = constant_;
  for (const auto& [var, coeff] : terms_) {
    if (var >= y.size()) throw DimensionError("variable index out of range");
    out += y(var) * coeff;
  }
  return out;
}

AffineMatrix AffineMatrix::transpose() const {
  AffineMatrix out = constant(constant_.transpose());
  for (const auto& [var, coeff] : terms_) out.terms_.emplace(var, coeff.transpose());
  return out;
}

AffineMatrix& AffineMatrix::operator+=(const AffineMatrix& other) {
  if (other.rows() != rows() || other.cols() != cols())
    throw DimensionError("affine sum of mismatched shapes");
  constant_ += other.constant_;
  for (const auto& [var, coeff] : other.terms_) add_term(var, coeff);
  return *this;
}

AffineMatrix AffineMatrix::operator+(const AffineMatrix& other) const {
  AffineMatrix out = *this;
  out += other;
  return out;
}

AffineMatrix AffineMatrix::operator-(const AffineMatrix& other) const {
  return *this + (-1.0) * other;
}

AffineMatrix AffineMatrix::blocks(const AffineMatrix& a, const AffineMatrix& b,
                                  const AffineMatrix& c, const AffineMatrix& d) {
  if (a.rows() != b.rows() || c.rows() != d.rows() || a.cols() != c.cols() ||
      b.cols() != d.cols())
    throw DimensionError("block layout has mismatched shapes");
  const Eigen::Index r0 = a.rows(), c0 = a.cols();
  AffineMatrix out(a.rows() + c.rows(), a.cols() + b.cols());
  auto place = [&](const AffineMatrix& part, Eigen::Index r, Eigen::Index col) {
    out.constant_.block(r, col, part.rows(), part.cols()) = part.constant_;
    for (const auto& [var, coeff] : part.terms_) {
      Matrix full = Matrix::Zero(out.rows(), out.cols());
      full.block(r, col, part.rows(), part.cols()) = coeff;
      out.add_term(var, full);
    }
  };
  place(a, 0, 0);
  place(b, 0, c0);
  place(c, r0, 0);
  place(d, r0, c0);
  return out;
}

AffineMatrix operator*(const Matrix& left, const AffineMatrix& expr) {
  if (left.cols() != expr.rows())
    throw DimensionError("affine product of mismatched shapes");
  AffineMatrix out = AffineMatrix::constant(left * expr.constant_part());
  for (const auto& [var, coeff] : expr.terms()) out.add_term(var, left * coeff);
  return out;
}

AffineMatrix operator*(double scale, const AffineMatrix& expr) {
  AffineMatrix out = AffineMatrix::constant(scale * expr.constant_part());
  for (const auto& [var, coeff] : expr.terms()) out.add_term(var, scale * coeff);
  return out;
}

// ---------------------------------------------------------------------------

Eigen::Index SdpBuilder::add_variables(Eigen::Index count) {
  const Eigen::Index first = num_vars_;
  num_vars_ += count;
  return first;
}

void SdpBuilder::set_objective(Eigen::Index var, double coeff) {
  if (var < 0 || var >= num_vars_) throw DimensionError("objective variable out of range");
  objective_[var] = coeff;
}

void SdpBuilder::add_equality(const AffineMatrix& expr) { equalities_.push_back(expr); }

void SdpBuilder::add_lmi(const AffineMatrix& expr) {
  if (expr.rows() != expr.cols()) throw DimensionError("LMI expression must be square");
  AffineMatrix sym = 0.5 * (expr + expr.transpose());
  lmis_.push_back(std::move(sym));
}

SdpProblem SdpBuilder::build() const {
  SdpProblem problem;
  const Eigen::Index k = num_vars_;
  problem.num_vars = k;
  problem.objective = Vector::Zero(k);
  for (const auto& [var, coeff] : objective_) problem.objective(var) = coeff;

  Eigen::Index rows = 0;
  for (const AffineMatrix& eq : equalities_) rows += eq.rows() * eq.cols();
  problem.eq_matrix = Matrix::Zero(rows, k);
  problem.eq_rhs = Vector::Zero(rows);
  Eigen::Index row = 0;
  for (const AffineMatrix& eq : equalities_) {
    for (Eigen::Index j = 0; j < eq.cols(); ++j) {
      for (Eigen::Index i = 0; i < eq.rows(); ++i, ++row) {
        problem.eq_rhs(row) = -eq.constant_part()(i, j);
        for (const auto& [var, coeff] : eq.terms()) {
          if (var >= k) throw DimensionError("equality uses an unknown variable");
          problem.eq_matrix(row, var) = coeff(i, j);
        }
      }
    }
  }

  for (const AffineMatrix& lmi : lmis_) {
    LmiBlock blk;
    blk.base = lmi.constant_part();
    blk.coeffs.assign(k, Matrix::Zero(lmi.rows(), lmi.cols()));
    for (const auto& [var, coeff] : lmi.terms()) {
      if (var >= k) throw DimensionError("LMI uses an unknown variable");
      blk.coeffs[var] = coeff;
    }
    problem.blocks.push_back(std::move(blk));
  }
  return problem;
}

Epigraph epigraph_spectral_norm(SdpBuilder& builder, const AffineMatrix& expr) {
  const Eigen::Index a = expr.rows(), b = expr.cols();
  Epigraph out;
  out.t_var = builder.add_variables(1);
  AffineMatrix ta(a, a), tb(b, b);
  ta.add_term(out.t_var, Matrix::Identity(a, a));
  tb.add_term(out.t_var, Matrix::Identity(b, b));
  out.block = AffineMatrix::blocks(ta, expr, expr.transpose(), tb);
  builder.add_lmi(out.block);
  return out;
}

// ---------------------------------------------------------------------------

void dump_problem(const SdpProblem& problem, const std::filesystem::path& dir) {
  problem.validate();
  std::filesystem::create_directories(dir);
  save_matrix(dir / "objective.txt", problem.objective);
  save_matrix(dir / "eq_matrix.txt", problem.eq_matrix);
  save_matrix(dir / "eq_rhs.txt", problem.eq_rhs);
  for (std::size_t b = 0; b < problem.blocks.size(); ++b) {
    const LmiBlock& blk = problem.blocks[b];
    const Eigen::Index d = blk.dim();
    Matrix coeffs(d, d * problem.num_vars);
    for (Eigen::Index i = 0; i < problem.num_vars; ++i)
      coeffs.middleCols(i * d, d) = blk.coeffs[i];
    const std::string stem = "block_" + std::to_string(b);
    save_matrix(dir / (stem + "_base.txt"), blk.base);
    save_matrix(dir / (stem + "_coeffs.txt"), coeffs);
  }
}

SdpProblem load_problem(const std::filesystem::path& dir) {
  SdpProblem problem;
  const Matrix objective = load_matrix(dir / "objective.txt");
  if (objective.cols() != 1 && objective.rows() > 0)
    throw ParseError("objective.txt must be a column vector");
  problem.objective = objective.col(0);
  problem.num_vars = problem.objective.size();
  problem.eq_matrix = load_matrix(dir / "eq_matrix.txt");
  const Matrix rhs = load_matrix(dir / "eq_rhs.txt");
  problem.eq_rhs = rhs.size() > 0 ? Vector(rhs.col(0)) : Vector();
  for (std::size_t b = 0;; ++b) {
    const std::string stem = "block_" + std::to_string(b);
    if (!std::filesystem::exists(dir / (stem + "_base.txt"))) break;
    LmiBlock blk;
    blk.base = load_matrix(dir / (stem + "_base.txt"));
    const Matrix coeffs = load_matrix(dir / (stem + "_coeffs.txt"));
    const Eigen::Index d = blk.dim();
    if (coeffs.rows() != d || coeffs.cols() != d * problem.num_vars)
      throw ParseError(stem + "_coeffs.txt has the wrong shape");
    for (Eigen::Index i = 0; i < problem.num_vars; ++i)
      blk.coeffs.push_back(coeffs.middleCols(i * d, d));
    problem.blocks.push_back(std::move(blk));
  }
  problem.validate();
  return problem;
}

}  // namespace mrcdd::sdp
