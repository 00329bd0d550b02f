#include "mrcdd/synthesis.hpp"

#include <string>

namespace mrcdd {

std::string_view to_string(Method method) {
  switch (method) {
    case Method::Exact: return "exact";
    case Method::NoiseFreeSdp: return "noise_free_sdp";
    case Method::RawSdp: return "raw_sdp";
    case Method::BiasCorrectedSdp: return "bias_corrected_sdp";
    case Method::IvSdp: return "iv_sdp";
    case Method::AveragedSdp: return "averaged_sdp";
  }
  return "unknown";
}

std::string_view short_name(Method method) {
  switch (method) {
    case Method::Exact: return "exact";
    case Method::NoiseFreeSdp: return "noisefree";
    case Method::RawSdp: return "raw";
    case Method::BiasCorrectedSdp: return "bc";
    case Method::IvSdp: return "iv";
    case Method::AveragedSdp: return "avg";
  }
  return "unknown";
}

std::optional<Method> parse_method(std::string_view text) {
  for (Method m : {Method::Exact, Method::NoiseFreeSdp, Method::RawSdp,
                   Method::BiasCorrectedSdp, Method::IvSdp, Method::AveragedSdp}) {
    if (text == short_name(m) || text == to_string(m)) return m;
  }
  return std::nullopt;
}

Method sdp_method_for(Regime regime) {
  switch (regime) {
    case Regime::NoiseFree: return Method::NoiseFreeSdp;
    case Regime::RawNoisy: return Method::RawSdp;
    case Regime::BiasCorrected: return Method::BiasCorrectedSdp;
    case Regime::InstrumentalVariable: return Method::IvSdp;
    case Regime::Averaged: return Method::AveragedSdp;
  }
  return Method::RawSdp;
}

MatchingLayout MatchingLayout::make(Eigen::Index n, Eigen::Index m) {
  MatchingLayout l;
  l.n = n;
  l.m = m;
  const Eigen::Index q_size = (m + n) * n;
  l.qx = 0;
  l.qr = q_size;
  l.p = 2 * q_size;
  l.t1 = l.p + n * (n + 1) / 2;
  l.t2 = l.t1 + 1;
  l.num_vars = l.t2 + 1;
  return l;
}

MatchingDecision MatchingLayout::unpack(const Vector& y) const {
  if (y.size() != num_vars) throw DimensionError("decision vector has the wrong size");
  MatchingDecision d;
  d.qx = Eigen::Map<const Matrix>(y.data() + qx, m + n, n);
  d.qr = Eigen::Map<const Matrix>(y.data() + qr, m + n, n);
  d.p.resize(n, n);
  Eigen::Index var = p;
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i <= j; ++i, ++var) d.p(i, j) = d.p(j, i) = y(var);
  return d;
}

namespace {

void check_shapes(const ProjectedData& proj, const ReferenceModel& model) {
  const Eigen::Index n = proj.n(), m = proj.m();
  if (n < 1 || m < 1) throw DimensionError("projected data is empty");
  if (proj.x0_bar.cols() != m + n || proj.x1_bar.rows() != n ||
      proj.x1_bar.cols() != m + n || proj.u0_bar.cols() != m + n)
    throw DimensionError("projected data blocks are inconsistent");
  if (model.n() != n)
    throw DimensionError("reference model has n = " + std::to_string(model.n()) +
                         " but data has n = " + std::to_string(n));
  if (!proj.x0_bar.allFinite() || !proj.x1_bar.allFinite() || !proj.u0_bar.allFinite())
    throw InvalidArgument("projected data has non-finite entries");
}

void require_usable_sigma(const ProjectedData& proj) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(proj.sigma, Eigen::EigenvaluesOnly);
  if (proj.sigma.size() == 0 || eig.eigenvalues()(0) <= kSigmaMinEigenvalue)
    throw SingularMatrixError(
        "sample covariance is not positive definite (data not persistently exciting)");
}

}  // namespace

MatchingDecision solve_exact_matching(const ProjectedData& proj,
                                      const ReferenceModel& model) {
  check_shapes(proj, model);
  require_usable_sigma(proj);
  const Eigen::Index n = proj.n(), m = proj.m();

  Matrix lhs(2 * n, m + n);
  lhs << proj.x1_bar, proj.x0_bar;
  Matrix rhs = Matrix::Zero(2 * n, 2 * n);
  rhs.topLeftCorner(n, n) = model.am();
  rhs.topRightCorner(n, n) = model.bm();
  rhs.bottomLeftCorner(n, n).setIdentity();

  const Matrix g = lhs.completeOrthogonalDecomposition().solve(rhs);
  const double residual = (lhs * g - rhs).norm();
  const double bound = kExactTolerance * (1.0 + spectral_norm(model.am()));

  MatchingDecision d;
  d.method = Method::Exact;
  d.qx = g.leftCols(n);
  d.qr = g.rightCols(n);
  d.p = Matrix::Identity(n, n);
  d.exact_residual = residual / (1.0 + spectral_norm(model.am()));
  if (!(residual <= bound))
    throw InfeasibleMatchingError(
        "exact matching is infeasible for this data, residual " + std::to_string(residual),
        residual);
  return d;
}

sdp::SdpProblem assemble_matching_sdp(const ProjectedData& proj,
                                      const ReferenceModel& model,
                                      const MatchingOptions& options) {
  using sdp::AffineMatrix;
  check_shapes(proj, model);
  if (!(options.lambda > 0.0)) throw InvalidArgument("lambda must be > 0");
  if (!(options.epsilon >= 0.0)) throw InvalidArgument("epsilon must be >= 0");

  const Eigen::Index n = proj.n(), m = proj.m();
  const MatchingLayout layout = MatchingLayout::make(n, m);

  sdp::SdpBuilder builder;
  builder.add_variables(layout.t1);
  const AffineMatrix qx = AffineMatrix::variables(m + n, n, layout.qx);
  const AffineMatrix qr = AffineMatrix::variables(m + n, n, layout.qr);
  const AffineMatrix p = AffineMatrix::symmetric_variables(n, layout.p);

  const AffineMatrix x1_qx = proj.x1_bar * qx;
  const sdp::Epigraph state_fit = sdp::epigraph_spectral_norm(builder, x1_qx - model.am() * p);
  const sdp::Epigraph ref_fit =
      sdp::epigraph_spectral_norm(builder, proj.x1_bar * qr - model.bm() * p);
  if (state_fit.t_var != layout.t1 || ref_fit.t_var != layout.t2)
    throw Error("internal: matching layout out of sync with builder");
  builder.set_objective(layout.t1, 1.0);
  builder.set_objective(layout.t2, options.lambda);

  builder.add_equality(proj.x0_bar * qx - p);
  builder.add_equality(proj.x0_bar * qr);

  if (options.with_stability_lmi) {
    const AffineMatrix shifted =
        p - AffineMatrix::constant(options.epsilon * Matrix::Identity(n, n));
    builder.add_lmi(AffineMatrix::blocks(shifted, x1_qx, x1_qx.transpose(), shifted));
    if (options.scale_bound > 0.0) {
      AffineMatrix budget = AffineMatrix::constant(
          Matrix::Constant(1, 1, static_cast<double>(n) * options.scale_bound * options.epsilon));
      for (Eigen::Index j = 0; j < n; ++j)
        budget.add_term(layout.p + j * (j + 1) / 2 + j, Matrix::Constant(1, 1, -1.0));
      builder.add_lmi(budget);
    }
  } else {
    // Plain matching fit with G = Q: pin P to the identity.
    builder.add_equality(p - AffineMatrix::constant(Matrix::Identity(n, n)));
  }
  return builder.build();
}

MatchingDecision solve_matching_sdp(const ProjectedData& proj, const ReferenceModel& model,
                                    const MatchingOptions& options) {
  // The problem is positively homogeneous in (Q_x, Q_r, P, t) with the LMI
  // floor scaling like epsilon, so solve at epsilon = 1 and scale back.
  MatchingOptions normalized = options;
  normalized.epsilon = 1.0;
  const sdp::SdpProblem problem = assemble_matching_sdp(proj, model, normalized);
  sdp::SdpSolution sol = sdp::solve(problem, options.solver);
  if (sol.status != sdp::SdpStatus::Optimal)
    throw SolverError("matching SDP not solved: " + std::string(sdp::to_string(sol.status)) +
                      " after " + std::to_string(sol.iterations) + " iterations");

  const MatchingLayout layout = MatchingLayout::make(proj.n(), proj.m());
  MatchingDecision d = layout.unpack(sol.y);
  if (options.with_stability_lmi) {
    d.qx *= options.epsilon;
    d.qr *= options.epsilon;
    d.p *= options.epsilon;
  }
  d.method = sdp_method_for(proj.regime);
  d.solver_report = std::move(sol);
  return d;
}

ControllerGains recover_gains(const ProjectedData& proj, const ReferenceModel& model,
                              const MatchingDecision& decision) {
  check_shapes(proj, model);
  const Matrix p = 0.5 * (decision.p + decision.p.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(p, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues()(0);
  const double hi = eig.eigenvalues()(eig.eigenvalues().size() - 1);
  if (!(lo > 0.0) || hi / lo > kMaxConditionP)
    throw SingularMatrixError("Lyapunov matrix P is singular or ill-conditioned");
  const Eigen::LLT<Matrix> llt(p);

  // Q P^-1 = (P^-1 Q^T)^T since P is symmetric.
  const Matrix gx = llt.solve(decision.qx.transpose()).transpose();
  const Matrix gr = llt.solve(decision.qr.transpose()).transpose();

  ControllerGains gains;
  gains.kx = proj.u0_bar * gx;
  gains.kr = proj.u0_bar * gr;
  gains.method = decision.method;
  gains.t_len = proj.t_len;
  const Matrix closed_loop = proj.x1_bar * gx;
  gains.diagnostics.matching_residual_a = spectral_norm(closed_loop - model.am());
  gains.diagnostics.matching_residual_b = spectral_norm(proj.x1_bar * gr - model.bm());
  gains.diagnostics.closed_loop_spectral_radius_estimate = spectral_radius(closed_loop);
  if (decision.solver_report) {
    gains.solver_status = decision.solver_report->status;
    gains.solver_iterations = decision.solver_report->iterations;
  }
  if (!gains.kx.allFinite() || !gains.kr.allFinite())
    throw SingularMatrixError("recovered gains are not finite");
  return gains;
}

ControllerGains synthesize(const ProjectedData& proj, const ReferenceModel& model,
                           const MatchingOptions& options) {
  check_shapes(proj, model);
  require_usable_sigma(proj);
  return recover_gains(proj, model, solve_matching_sdp(proj, model, options));
}

ControllerGains synthesize_exact(const ProjectedData& proj, const ReferenceModel& model) {
  return recover_gains(proj, model, solve_exact_matching(proj, model));
}

MatchingErrors verify_matching(const LtiSystem& sys, const ControllerGains& gains,
                               const ReferenceModel& model) {
  if (gains.kx.rows() != sys.m() || gains.kx.cols() != sys.n() ||
      gains.kr.rows() != sys.m() || gains.kr.cols() != sys.n() || model.n() != sys.n())
    throw DimensionError("gains, plant and reference model dimensions disagree");
  MatchingErrors out;
  const Matrix closed_loop = sys.a() + sys.b() * gains.kx;
  out.err_a = spectral_norm(closed_loop - model.am());
  out.err_b = spectral_norm(sys.b() * gains.kr - model.bm());
  out.spectral_radius = spectral_radius(closed_loop);
  out.stable = out.spectral_radius < 1.0;
  return out;
}

Trajectory simulate_closed_loop(const LtiSystem& sys, const ControllerGains& gains,
                                const Matrix& reference, const Vector& x0,
                                const NoiseSpec& noise) {
  return simulate_closed_loop(sys, gains.kx, gains.kr, reference, x0, noise);
}

}  // namespace mrcdd
