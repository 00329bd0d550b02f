#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "mrcdd/data_pipeline.hpp"
#include "mrcdd/linear_system.hpp"
#include "mrcdd/sdp.hpp"

namespace mrcdd {

enum class Method { Exact, NoiseFreeSdp, RawSdp, BiasCorrectedSdp, IvSdp, AveragedSdp };

std::string_view to_string(Method method);
/// Accepts the CLI spellings: exact, noisefree, raw, bc, iv, avg.
std::optional<Method> parse_method(std::string_view text);
/// CLI spelling of a method.
std::string_view short_name(Method method);
/// SDP method that matches the data regime.
Method sdp_method_for(Regime regime);

/// Decision variables of the matching problem: Q_x = G_x P, Q_r = G_r P.
struct MatchingDecision {
  Matrix qx;  // (m+n) x n
  Matrix qr;  // (m+n) x n
  Matrix p;   // n x n, symmetric
  Method method = Method::Exact;
  std::optional<sdp::SdpSolution> solver_report;
  /// Relative residual of the stacked linear system (exact matcher only).
  double exact_residual = 0.0;
};

struct MatchingOptions {
  double lambda = 1.0;
  /// The Lyapunov block is imposed as >= epsilon * I.
  double epsilon = 1e-8;
  bool with_stability_lmi = true;
  /// tr(P) <= n * scale_bound * epsilon. Keeps the feasible set bounded when
  /// the matching error can be driven to zero; see README.
  double scale_bound = 1e4;
  sdp::SdpSettings solver;
};

/// Variable offsets inside the assembled SDP: vec(Q_x), vec(Q_r), vech(P),
/// t_1, t_2 in that order.
struct MatchingLayout {
  Eigen::Index n = 0, m = 0;
  Eigen::Index qx = 0, qr = 0, p = 0, t1 = 0, t2 = 0;
  Eigen::Index num_vars = 0;

  static MatchingLayout make(Eigen::Index n, Eigen::Index m);
  MatchingDecision unpack(const Vector& y) const;
};

/// Solves X1_bar G_x = A_M, X0_bar G_x = I, X1_bar G_r = B_M, X0_bar G_r = 0
/// in the least-squares sense. Feasible when the residual is at most
/// kExactTolerance * (1 + ||A_M||). Returns P = I and Q = G.
MatchingDecision solve_exact_matching(const ProjectedData& proj,
                                      const ReferenceModel& model);

inline constexpr double kExactTolerance = 1e-8;

sdp::SdpProblem assemble_matching_sdp(const ProjectedData& proj,
                                      const ReferenceModel& model,
                                      const MatchingOptions& options);

struct GainDiagnostics {
  double matching_residual_a = 0.0;
  double matching_residual_b = 0.0;
  double closed_loop_spectral_radius_estimate = 0.0;
};

struct ControllerGains {
  Matrix kx;  // m x n
  Matrix kr;  // m x n
  Method method = Method::Exact;
  Eigen::Index t_len = 0;
  std::uint64_t seed = 0;
  GainDiagnostics diagnostics;
  sdp::SdpStatus solver_status = sdp::SdpStatus::Optimal;
  int solver_iterations = 0;
};

/// K_x = U0_bar Q_x P^-1, K_r = U0_bar Q_r P^-1.
ControllerGains recover_gains(const ProjectedData& proj, const ReferenceModel& model,
                              const MatchingDecision& decision);

/// Assembles and solves the matching SDP for the regime of `proj`, certifies
/// the solution and recovers the gains. Throws SolverError when the solver
/// does not return Optimal and SingularMatrixError when P is ill-conditioned.
ControllerGains synthesize(const ProjectedData& proj, const ReferenceModel& model,
                           const MatchingOptions& options = {});

/// Full decision for the SDP route (exposed for invariant checks).
MatchingDecision solve_matching_sdp(const ProjectedData& proj,
                                    const ReferenceModel& model,
                                    const MatchingOptions& options = {});

/// Exact matcher followed by gain recovery.
ControllerGains synthesize_exact(const ProjectedData& proj, const ReferenceModel& model);

struct MatchingErrors {
  double err_a = 0.0;  // ||A + B K_x - A_M||_2
  double err_b = 0.0;  // ||B K_r - B_M||_2
  double spectral_radius = 0.0;
  bool stable = false;
};

/// Ground-truth check against the true plant.
MatchingErrors verify_matching(const LtiSystem& sys, const ControllerGains& gains,
                               const ReferenceModel& model);

Trajectory simulate_closed_loop(const LtiSystem& sys, const ControllerGains& gains,
                                const Matrix& reference, const Vector& x0,
                                const NoiseSpec& noise);

inline constexpr double kMaxConditionP = 1e12;

}  // namespace mrcdd
