// Primal-dual path-following solver for small dense SDPs in LMI form.
//
// Equalities E y = f are removed first with y = y_part + N z, N an orthonormal
// basis of null(E). What remains is
//
//   minimize  c^T z   s.t.  S = F_0 + sum_j z_j F_j >= 0          (LMI form)
//
// paired with its conic dual
//
//   maximize -<F_0, X>  s.t.  <F_j, X> = c_j,  X >= 0.
//
// Iterates (z, S, X) start from scaled identities and need not be feasible.
// Each iteration solves the HKM Newton system through its Schur complement
// M_jl = tr(F_j X F_l S^-1) with a Mehrotra predictor-corrector.

#include <algorithm>
#include <cmath>
#include <limits>

#include "mrcdd/sdp.hpp"

namespace mrcdd::sdp {

namespace {

// Reduced problem after equality elimination.
struct Reduced {
  Eigen::Index q = 0;
  Vector c;
  double c_offset = 0.0;
  Vector y_part;
  Matrix null_basis;                       // k x q
  std::vector<Matrix> f0;                  // per block
  std::vector<std::vector<Matrix>> f;      // [block][j]
  std::vector<std::vector<char>> nonzero;  // [block][j]
  Eigen::Index total_dim = 0;
};

struct Elimination {
  bool consistent = true;
  double residual = 0.0;
};

Elimination eliminate_equalities(const SdpProblem& problem, const SdpSettings& settings,
                                 Reduced& red) {
  const Eigen::Index k = problem.num_vars;
  const Eigen::Index p = problem.eq_matrix.rows();
  Elimination result;
  if (p == 0) {
    red.y_part = Vector::Zero(k);
    red.null_basis = Matrix::Identity(k, k);
  } else {
    Eigen::JacobiSVD<Matrix> svd(problem.eq_matrix, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vector& sv = svd.singularValues();
    const double cutoff = std::numeric_limits<double>::epsilon() *
                          static_cast<double>(std::max(p, k)) * (sv.size() ? sv(0) : 0.0) *
                          16.0;
    Eigen::Index rank = 0;
    while (rank < sv.size() && sv(rank) > cutoff) ++rank;
    const Matrix& u = svd.matrixU();
    const Matrix& v = svd.matrixV();
    Vector coeffs = u.leftCols(rank).transpose() * problem.eq_rhs;
    for (Eigen::Index i = 0; i < rank; ++i) coeffs(i) /= sv(i);
    red.y_part = v.leftCols(rank) * coeffs;
    red.null_basis = v.rightCols(k - rank);
    result.residual = (problem.eq_matrix * red.y_part - problem.eq_rhs).cwiseAbs().maxCoeff();
    const double scale = 1.0 + problem.eq_rhs.cwiseAbs().maxCoeff();
    result.consistent = result.residual <= settings.eq_tol * scale;
  }
  red.q = red.null_basis.cols();
  red.c = red.null_basis.transpose() * problem.objective;
  red.c_offset = problem.objective.dot(red.y_part);

  for (const LmiBlock& blk : problem.blocks) {
    const Eigen::Index d = blk.dim();
    Matrix f0 = blk.base;
    for (Eigen::Index i = 0; i < k; ++i)
      if (red.y_part(i) != 0.0) f0 += red.y_part(i) * blk.coeffs[i];
    std::vector<Matrix> fj(red.q, Matrix::Zero(d, d));
    std::vector<char> nz(red.q, 0);
    for (Eigen::Index i = 0; i < k; ++i) {
      if (blk.coeffs[i].cwiseAbs().maxCoeff() == 0.0) continue;
      for (Eigen::Index j = 0; j < red.q; ++j) {
        const double w = red.null_basis(i, j);
        if (w != 0.0) fj[j] += w * blk.coeffs[i];
      }
    }
    for (Eigen::Index j = 0; j < red.q; ++j) {
      fj[j] = 0.5 * (fj[j] + fj[j].transpose()).eval();
      nz[j] = fj[j].cwiseAbs().maxCoeff() > 0.0;
    }
    red.f0.push_back(0.5 * (f0 + f0.transpose()));
    red.f.push_back(std::move(fj));
    red.nonzero.push_back(std::move(nz));
    red.total_dim += d;
  }
  return result;
}

using BlockVec = std::vector<Matrix>;

double frob_inner(const Matrix& a, const Matrix& b) { return (a.array() * b.array()).sum(); }

double trace_product(const BlockVec& a, const BlockVec& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += frob_inner(a[i], b[i]);
  return sum;
}

double frob_norm(const BlockVec& a) {
  double sum = 0.0;
  for (const Matrix& m : a) sum += m.squaredNorm();
  return std::sqrt(sum);
}

BlockVec lmi_value(const Reduced& red, const Vector& z) {
  BlockVec out = red.f0;
  for (std::size_t b = 0; b < out.size(); ++b)
    for (Eigen::Index j = 0; j < red.q; ++j)
      if (red.nonzero[b][j] && z(j) != 0.0) out[b] += z(j) * red.f[b][j];
  return out;
}

BlockVec lmi_linear(const Reduced& red, const Vector& dz) {
  BlockVec out;
  for (std::size_t b = 0; b < red.f0.size(); ++b) {
    Matrix acc = Matrix::Zero(red.f0[b].rows(), red.f0[b].cols());
    for (Eigen::Index j = 0; j < red.q; ++j)
      if (red.nonzero[b][j] && dz(j) != 0.0) acc += dz(j) * red.f[b][j];
    out.push_back(std::move(acc));
  }
  return out;
}

Vector adjoint(const Reduced& red, const BlockVec& x) {
  Vector out = Vector::Zero(red.q);
  for (std::size_t b = 0; b < x.size(); ++b)
    for (Eigen::Index j = 0; j < red.q; ++j)
      if (red.nonzero[b][j]) out(j) += frob_inner(red.f[b][j], x[b]);
  return out;
}

// Largest alpha in (0, inf] keeping x + alpha dx positive definite.
double max_step(const std::vector<Eigen::LLT<Matrix>>& chol, const BlockVec& dx) {
  double alpha = std::numeric_limits<double>::infinity();
  for (std::size_t b = 0; b < dx.size(); ++b) {
    const auto l = chol[b].matrixL();
    Matrix w = l.solve(dx[b]);
    w = l.solve(w.transpose()).transpose();
    w = 0.5 * (w + w.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(w, Eigen::EigenvaluesOnly);
    const double lmin = eig.eigenvalues()(0);
    if (lmin < 0.0) alpha = std::min(alpha, -1.0 / lmin);
  }
  return alpha;
}

bool factor_all(const BlockVec& mats, std::vector<Eigen::LLT<Matrix>>& out) {
  out.clear();
  for (const Matrix& m : mats) {
    out.emplace_back(m);
    if (out.back().info() != Eigen::Success) return false;
  }
  return true;
}

struct Direction {
  Vector dz;
  BlockVec ds;
  BlockVec dx;
};

class NewtonSystem {
 public:
  NewtonSystem(const Reduced& red, const BlockVec& x, const BlockVec& s_inv)
      : red_(red), x_(x), s_inv_(s_inv) {
    const Eigen::Index q = red.q;
    Matrix schur = Matrix::Zero(q, q);
    for (std::size_t b = 0; b < x.size(); ++b) {
      for (Eigen::Index j = 0; j < q; ++j) {
        if (!red.nonzero[b][j]) continue;
        const Matrix w = x[b] * red.f[b][j] * s_inv[b];
        for (Eigen::Index l = 0; l <= j; ++l) {
          if (!red.nonzero[b][l]) continue;
          const double v = frob_inner(red.f[b][l], w);
          schur(j, l) += v;
        }
      }
    }
    schur = schur.selfadjointView<Eigen::Lower>();
    llt_.compute(schur);
    if (llt_.info() != Eigen::Success) {
      const double shift = 1e-12 * (1.0 + schur.diagonal().cwiseAbs().maxCoeff());
      schur.diagonal().array() += shift;
      ldlt_.compute(schur);
      use_ldlt_ = true;
    }
  }

  // Direction towards x s = target * I, with optional second-order term.
  Direction solve(double target, const Vector& r_p, const BlockVec& r_d,
                  const BlockVec* corrector) const {
    const std::size_t nb = x_.size();
    BlockVec g(nb);
    for (std::size_t b = 0; b < nb; ++b) {
      g[b] = target * s_inv_[b] - x_[b] - x_[b] * r_d[b] * s_inv_[b];
      if (corrector) g[b] -= (*corrector)[b] * s_inv_[b];
    }
    Vector rhs = adjoint(red_, g) - r_p;
    Direction dir;
    dir.dz = use_ldlt_ ? Vector(ldlt_.solve(rhs)) : Vector(llt_.solve(rhs));
    BlockVec lin = lmi_linear(red_, dir.dz);
    dir.ds.resize(nb);
    dir.dx.resize(nb);
    for (std::size_t b = 0; b < nb; ++b) {
      dir.ds[b] = r_d[b] + lin[b];
      Matrix dx = g[b] - x_[b] * lin[b] * s_inv_[b];
      dir.dx[b] = 0.5 * (dx + dx.transpose());
    }
    return dir;
  }

 private:
  const Reduced& red_;
  const BlockVec& x_;
  const BlockVec& s_inv_;
  Eigen::LLT<Matrix> llt_;
  Eigen::LDLT<Matrix> ldlt_;
  bool use_ldlt_ = false;
};

SdpSolution finish(const SdpProblem& problem, const SdpSettings& settings, const Reduced& red,
                   const Vector& z, SdpStatus status, int iterations) {
  SdpSolution sol;
  sol.y = red.y_part + red.null_basis * z;
  const SolutionCheck check = check_solution(problem, sol.y);
  sol.objective_value = check.objective;
  sol.max_equality_residual = check.equality_residual;
  sol.min_lmi_eigenvalue_per_block = check.min_lmi_eigs;
  sol.iterations = iterations;
  sol.status = status;
  if (status == SdpStatus::Optimal && !check.passes(settings)) sol.status = SdpStatus::NumericalLimit;
  return sol;
}

}  // namespace

SdpSolution solve(const SdpProblem& problem, const SdpSettings& settings) {
  problem.validate();
  Reduced red;
  const Elimination elim = eliminate_equalities(problem, settings, red);
  if (!elim.consistent) {
    SdpSolution sol = finish(problem, settings, red, Vector::Zero(red.q), SdpStatus::Infeasible, 0);
    return sol;
  }

  const std::size_t nb = red.f0.size();
  const Eigen::Index q = red.q;

  // Nothing left to optimize, or nothing constraining the variables.
  if (q == 0 || nb == 0) {
    Vector z = Vector::Zero(q);
    if (nb == 0 && q > 0 && red.c.cwiseAbs().maxCoeff() > 0.0)
      return finish(problem, settings, red, z, SdpStatus::NumericalLimit, 0);
    SdpSolution sol = finish(problem, settings, red, z, SdpStatus::Optimal, 0);
    if (sol.status != SdpStatus::Optimal) sol.status = SdpStatus::Infeasible;
    return sol;
  }

  // A free direction with nonzero cost makes the problem unbounded; one with
  // zero cost is pinned at zero below (its Schur column is empty).
  for (Eigen::Index j = 0; j < q; ++j) {
    bool used = false;
    for (std::size_t b = 0; b < nb; ++b) used = used || red.nonzero[b][j];
    if (!used && std::abs(red.c(j)) > 0.0)
      return finish(problem, settings, red, Vector::Zero(q), SdpStatus::NumericalLimit, 0);
  }

  // Starting point: scaled identities.
  double max_f = 0.0, max_f0 = 0.0, c_ratio = 0.0;
  for (std::size_t b = 0; b < nb; ++b) max_f0 = std::max(max_f0, red.f0[b].norm());
  for (Eigen::Index j = 0; j < q; ++j) {
    double fj = 0.0;
    for (std::size_t b = 0; b < nb; ++b) fj += red.f[b][j].squaredNorm();
    fj = std::sqrt(fj);
    max_f = std::max(max_f, fj);
    c_ratio = std::max(c_ratio, (1.0 + std::abs(red.c(j))) / (1.0 + fj));
  }
  const double dim = static_cast<double>(red.total_dim);
  const double xi = std::max({10.0, std::sqrt(dim), dim * c_ratio});
  const double eta = std::max({10.0, std::sqrt(dim), max_f, max_f0});

  Vector z = Vector::Zero(q);
  BlockVec x(nb), s(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    const Eigen::Index d = red.f0[b].rows();
    x[b] = xi * Matrix::Identity(d, d);
    s[b] = eta * Matrix::Identity(d, d);
  }

  const double c_norm = red.c.norm();
  const double f0_norm = frob_norm(red.f0);
  std::vector<double> history;
  std::vector<Eigen::LLT<Matrix>> chol_x, chol_s;
  int stalled = 0;

  for (int iter = 0; iter < settings.max_iter; ++iter) {
    const BlockVec fz = lmi_value(red, z);
    BlockVec r_d(nb);
    for (std::size_t b = 0; b < nb; ++b) r_d[b] = fz[b] - s[b];
    const Vector r_p = red.c - adjoint(red, x);

    const double xs = trace_product(x, s);
    const double mu = xs / dim;
    const double primal_obj = red.c.dot(z);
    const double dual_obj = -trace_product(red.f0, x);
    const double rel_gap = xs / (1.0 + std::abs(primal_obj) + std::abs(dual_obj));
    const double p_inf = r_p.norm() / (1.0 + c_norm);
    const double d_inf = frob_norm(r_d);
    history.push_back(xs);

    if (rel_gap <= settings.duality_gap_tol && p_inf <= settings.duality_gap_tol &&
        d_inf <= settings.psd_tol) {
      SdpSolution sol = finish(problem, settings, red, z, SdpStatus::Optimal, iter);
      sol.relative_gap = rel_gap;
      sol.gap_history = history;
      return sol;
    }

    // Certificate that the LMI is infeasible: X >= 0 with <F_j, X> ~ 0 and
    // <F_0, X> < 0, after normalizing X.
    if (iter >= 5) {
      const double x_norm = frob_norm(x);
      const double ray = -trace_product(red.f0, x) / x_norm;
      const double slack = adjoint(red, x).norm() / x_norm;
      if (ray > 1e-10 && slack <= 1e-8 * ray) {
        SdpSolution sol = finish(problem, settings, red, z, SdpStatus::Infeasible, iter);
        sol.relative_gap = rel_gap;
        sol.gap_history = history;
        return sol;
      }
      if (primal_obj < -1e12 * (1.0 + f0_norm) || !std::isfinite(xs)) break;
    }

    if (!factor_all(x, chol_x) || !factor_all(s, chol_s)) break;
    BlockVec s_inv(nb);
    for (std::size_t b = 0; b < nb; ++b)
      s_inv[b] = chol_s[b].solve(Matrix::Identity(s[b].rows(), s[b].cols()));

    const NewtonSystem newton(red, x, s_inv);

    // Predictor.
    const Direction aff = newton.solve(0.0, r_p, r_d, nullptr);
    const double ap_aff = std::min(1.0, max_step(chol_x, aff.dx));
    const double ad_aff = std::min(1.0, max_step(chol_s, aff.ds));
    double xs_aff = 0.0;
    for (std::size_t b = 0; b < nb; ++b)
      xs_aff += frob_inner(x[b] + ap_aff * aff.dx[b], s[b] + ad_aff * aff.ds[b]);
    const double ratio = std::clamp(xs_aff / xs, 0.0, 1.0);
    const double sigma = std::pow(ratio, 3);

    // Corrector.
    BlockVec second(nb);
    for (std::size_t b = 0; b < nb; ++b) second[b] = aff.dx[b] * aff.ds[b];
    const Direction dir = newton.solve(sigma * mu, r_p, r_d, &second);

    const double gamma = 0.9 + 0.09 * std::min(ap_aff, ad_aff);
    const double ap = std::min(1.0, gamma * max_step(chol_x, dir.dx));
    const double ad = std::min(1.0, gamma * max_step(chol_s, dir.ds));
    if (!(ap > 0.0) || !(ad > 0.0) || !dir.dz.allFinite()) break;

    for (std::size_t b = 0; b < nb; ++b) {
      x[b] += ap * dir.dx[b];
      s[b] += ad * dir.ds[b];
      x[b] = 0.5 * (x[b] + x[b].transpose()).eval();
      s[b] = 0.5 * (s[b] + s[b].transpose()).eval();
    }
    z += ad * dir.dz;

    stalled = (std::max(ap, ad) < 1e-8) ? stalled + 1 : 0;
    if (stalled >= 5) break;
  }

  SdpSolution sol = finish(problem, settings, red, z, SdpStatus::NumericalLimit,
                           static_cast<int>(history.size()));
  sol.gap_history = history;
  if (!history.empty()) sol.relative_gap = history.back();
  return sol;
}

}  // namespace mrcdd::sdp
