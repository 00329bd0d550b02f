#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>
#include <sstream>

#include "mrcdd/bench.hpp"
#include "mrcdd/random.hpp"

namespace mrcdd::bench {

namespace {

struct Check {
  std::string name;
  std::function<std::pair<bool, std::string>()> body;
};

std::string num(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

std::vector<double> field(const std::vector<RunRecord>& recs, Method m, double variance,
                          double RunRecord::*member) {
  std::vector<double> out;
  for (const auto& r : recs)
    if (r.method == m && r.variance == variance && r.ok()) out.push_back(r.*member);
  return out;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? std::nan("") : s / static_cast<double>(v.size());
}

ExperimentConfig reduced_campaign() {
  ExperimentConfig c = default_config();
  c.t_grid = {3000};
  c.variances = {0.25, 1.0};
  c.methods = {Method::RawSdp, Method::BiasCorrectedSdp, Method::IvSdp};
  c.mc_runs = 20;
  c.seed = 2024;
  c.record_timing = false;
  return c;
}

}  // namespace

int run_selftest(std::ostream& log) {
  const ExperimentConfig base = default_config();
  const LtiSystem plant = base.plant();
  const ReferenceModel model = base.model();
  std::vector<RunRecord> campaign;

  std::vector<Check> checks;
  checks.push_back({"exact_matching", [&] {
    RandomStream rng(11);
    const Matrix u = rng.uniform_matrix(3, 1000, -2.0, 2.0);
    const Trajectory traj = simulate_open_loop(plant, u, Vector::Zero(3), {});
    const ControllerGains g =
        synthesize_exact(project(build_experiment_data(traj, false), true), model);
    const double dk = std::max((g.kx - paper_kx()).cwiseAbs().maxCoeff(),
                               (g.kr - paper_kr()).cwiseAbs().maxCoeff());
    const double dcl =
        (plant.a() + plant.b() * g.kx - model.am()).cwiseAbs().maxCoeff();
    return std::pair{dk <= 1e-3 && dcl <= 1e-3,
                     "max gain deviation " + num(dk) + ", closed-loop deviation " + num(dcl)};
  }});

  checks.push_back({"sdp_spectral_norm", [&] {
    sdp::SdpBuilder b;
    const Eigen::Index t = b.add_variables(1);
    sdp::AffineMatrix e(2, 2);
    e.add_term(t, Matrix::Identity(2, 2));
    Matrix off(2, 2);
    off << 0, 1, 1, 0;
    b.add_lmi(e + sdp::AffineMatrix::constant(off));
    b.set_objective(t, 1.0);
    const sdp::SdpProblem p = b.build();
    const sdp::SdpSolution s = sdp::solve(p);
    const bool ok = s.status == sdp::SdpStatus::Optimal && std::abs(s.y(0) - 1.0) < 1e-6 &&
                    sdp::check_solution(p, s.y).passes({});
    return std::pair{ok, "t* = " + num(s.y(0))};
  }});

  checks.push_back({"feasible_matching_equivalence", [&] {
    double worst = 0.0;
    for (std::uint64_t k = 0; k < 3; ++k) {
      RandomStream rng(derive_seed(99, k));
      const Matrix a = rng.uniform_matrix(3, 3, -0.5, 0.5);
      const Matrix b = rng.uniform_matrix(3, 3, -1.0, 1.0) + 1.5 * Matrix::Identity(3, 3);
      const Matrix kx = rng.uniform_matrix(3, 3, -0.2, 0.2);
      const LtiSystem sys(a, b);
      if (spectral_radius(a) >= 0.95 || spectral_radius(a + b * kx) >= 0.9) continue;
      const ReferenceModel ref(a + b * kx, b);
      const Matrix u = rng.uniform_matrix(3, 500, -2.0, 2.0);
      const Trajectory traj = simulate_open_loop(sys, u, Vector::Zero(3), {});
      const ProjectedData proj = project(build_experiment_data(traj, false), true);
      const ControllerGains ge = synthesize_exact(proj, ref);
      const ControllerGains gs = synthesize(proj, ref);
      worst = std::max({worst, (ge.kx - gs.kx).cwiseAbs().maxCoeff(),
                        (ge.kr - gs.kr).cwiseAbs().maxCoeff()});
    }
    return std::pair{worst <= 1e-5, "max gain difference " + num(worst)};
  }});

  checks.push_back({"expectation_identities", [&] {
    // Mean of the corrected / instrumented X0_bar over noise realizations
    // against the noise-free value, entrywise within 3 standard errors.
    constexpr int kReps = 200;
    RandomStream rng(5);
    const Matrix u = rng.uniform_matrix(3, 3000, -2.0, 2.0);
    Matrix clean_bar;
    Matrix sum[2] = {Matrix::Zero(3, 6), Matrix::Zero(3, 6)};
    Matrix sum_sq[2] = {Matrix::Zero(3, 6), Matrix::Zero(3, 6)};
    for (int r = 0; r < kReps; ++r) {
      const auto seed = static_cast<std::uint64_t>(r);
      const Trajectory a = simulate_open_loop(plant, u, Vector::Zero(3), {1.0, derive_seed(17, seed)});
      const Trajectory b = simulate_open_loop(plant, u, Vector::Zero(3), {1.0, derive_seed(18, seed)});
      if (r == 0) clean_bar = project(build_experiment_data(a, false), true).x0_bar;
      const ExperimentData da = build_experiment_data(a, true);
      const Matrix x[2] = {bias_correct(project(da), 1.0).x0_bar,
                           build_iv_projection(da, build_experiment_data(b, true)).x0_bar};
      for (int k = 0; k < 2; ++k) {
        sum[k] += x[k];
        sum_sq[k] += x[k].cwiseAbs2();
      }
    }
    int inside[2] = {0, 0};
    for (int k = 0; k < 2; ++k) {
      const Matrix m = sum[k] / kReps;
      const Matrix se =
          ((sum_sq[k] / kReps - m.cwiseAbs2()).cwiseMax(0.0) / (kReps - 1.0)).cwiseSqrt();
      for (Eigen::Index i = 0; i < m.size(); ++i)
        if (std::abs(m(i) - clean_bar(i)) <= 3.0 * se(i)) ++inside[k];
    }
    const int total = static_cast<int>(clean_bar.size());
    return std::pair{std::min(inside[0], inside[1]) >= 0.95 * total,
                     "bc " + std::to_string(inside[0]) + "/" + std::to_string(total) + ", iv " +
                         std::to_string(inside[1]) + "/" + std::to_string(total) +
                         " entries within 3 standard errors"};
  }});

  checks.push_back({"zero_noise_campaign", [&] {
    ExperimentConfig c = default_config();
    c.t_grid = {300};
    c.variances = {0.0};
    c.methods = {Method::Exact, Method::NoiseFreeSdp, Method::BiasCorrectedSdp, Method::IvSdp};
    c.mc_runs = 3;
    c.threads = 1;
    double worst = 0.0;
    bool ok = true;
    for (const auto& r : run_monte_carlo(c)) {
      ok = ok && r.ok() && r.stable;
      worst = std::max({worst, r.ok() ? r.err_kx : INFINITY, r.ok() ? r.err_kr : INFINITY});
    }
    return std::pair{ok && worst <= 1e-4, "max gain error " + num(worst)};
  }});

  checks.push_back({"reduced_campaign", [&] {
    campaign = run_monte_carlo(reduced_campaign());
    std::size_t failed = 0;
    for (const auto& r : campaign) failed += r.ok() ? 0 : 1;
    return std::pair{failed == 0, std::to_string(campaign.size()) + " runs, " +
                                      std::to_string(failed) + " solver failures"};
  }});

  checks.push_back({"snr_levels", [&] {
    const double s1 = mean(field(campaign, Method::BiasCorrectedSdp, 0.25, &RunRecord::snr_db));
    const double s2 = mean(field(campaign, Method::BiasCorrectedSdp, 1.0, &RunRecord::snr_db));
    return std::pair{s1 >= 11 && s1 <= 15 && s2 >= 5 && s2 <= 9,
                     "mean SNR " + num(s1) + " dB and " + num(s2) + " dB"};
  }});

  checks.push_back({"noise_mitigation", [&] {
    const double raw = quantile(field(campaign, Method::RawSdp, 1.0, &RunRecord::err_kx), 0.5);
    const double bc =
        quantile(field(campaign, Method::BiasCorrectedSdp, 1.0, &RunRecord::err_kx), 0.5);
    const double iv = quantile(field(campaign, Method::IvSdp, 1.0, &RunRecord::err_kx), 0.5);
    return std::pair{bc < raw && iv < raw,
                     "median err_kx raw " + num(raw) + ", bc " + num(bc) + ", iv " + num(iv)};
  }});

  checks.push_back({"stability_rate", [&] {
    double worst = 1.0;
    for (Method m : {Method::BiasCorrectedSdp, Method::IvSdp}) {
      std::size_t total = 0, stable = 0;
      for (const auto& r : campaign)
        if (r.method == m && r.variance == 1.0) {
          ++total;
          stable += r.stable ? 1 : 0;
        }
      worst = std::min(worst, total ? static_cast<double>(stable) / total : 0.0);
    }
    return std::pair{worst >= 0.95, "lowest stable fraction " + num(worst)};
  }});

  checks.push_back({"reproducible_output", [&] {
    ExperimentConfig c = reduced_campaign();
    c.t_grid = {500};
    c.mc_runs = 4;
    std::ostringstream a, b;
    c.threads = 1;
    write_records_csv(a, run_monte_carlo(c));
    c.threads = 3;
    write_records_csv(b, run_monte_carlo(c));
    return std::pair{a.str() == b.str(), std::to_string(a.str().size()) + " bytes compared"};
  }});

  int failures = 0;
  for (const auto& check : checks) {
    bool ok = false;
    std::string detail;
    try {
      std::tie(ok, detail) = check.body();
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    failures += ok ? 0 : 1;
    log << (ok ? "[PASS] " : "[FAIL] ") << check.name << ": " << detail << '\n';
  }
  log << (failures == 0 ? "selftest passed" : "selftest failed: " + std::to_string(failures) +
                                                  " check(s)")
      << '\n';
  return failures;
}

}  // namespace mrcdd::bench
