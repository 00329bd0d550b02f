// Acceptance gate: one PASS/FAIL line per criterion, exit code 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "mrcdd/bench.hpp"
#include "mrcdd/random.hpp"
#include "sdp_oracle.hpp"

namespace {

using namespace mrcdd;
using bench::ExperimentConfig;
using bench::RunRecord;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

std::vector<double> metric(const std::vector<RunRecord>& recs, Method m, Eigen::Index t_len,
                           double variance, double RunRecord::*field) {
  std::vector<double> out;
  for (const auto& r : recs)
    if (r.method == m && r.t_len == t_len && r.variance == variance && r.ok())
      out.push_back(r.*field);
  return out;
}

double median(std::vector<double> v) { return bench::quantile(std::move(v), 0.5); }

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? NAN : s / static_cast<double>(v.size());
}

ExperimentConfig campaign(std::vector<Eigen::Index> t_grid, std::vector<double> variances,
                          std::vector<Method> methods, int runs, std::uint64_t seed) {
  ExperimentConfig c = bench::default_config();
  c.t_grid = std::move(t_grid);
  c.variances = std::move(variances);
  c.methods = std::move(methods);
  c.mc_runs = runs;
  c.seed = seed;
  return c;
}

// 1. Exact matching from noise-free data, T = 1000.
Outcome exact_matching() {
  const auto start = Clock::now();
  const ProjectedData proj = testing::paper_noise_free_projection(1000, 1);
  const ControllerGains g = synthesize_exact(proj, testing::paper_model());
  const double elapsed = seconds_since(start);
  const double dk = std::max(testing::max_abs_diff(g.kx, bench::paper_kx()),
                             testing::max_abs_diff(g.kr, bench::paper_kr()));
  const LtiSystem sys = testing::paper_plant();
  const double dcl =
      testing::max_abs_diff(sys.a() + sys.b() * g.kx, 0.2 * Matrix::Identity(3, 3));
  return {dk <= 1e-3 && dcl <= 1e-3 && elapsed < 1.0,
          fmt("max |K - K*| = %.2e, max |A+BKx - 0.2I| = %.2e (tol 1e-3), %.3f s (< 1 s)", dk,
              dcl, elapsed)};
}

// 2. Mean SNR over 100 runs at T = 30000.
Outcome snr_levels() {
  const auto start = Clock::now();
  const auto recs =
      bench::run_monte_carlo(campaign({30000}, {0.25, 1.0}, {Method::BiasCorrectedSdp}, 100, 1));
  const double elapsed = seconds_since(start);
  const double s1 = mean(metric(recs, Method::BiasCorrectedSdp, 30000, 0.25, &RunRecord::snr_db));
  const double s2 = mean(metric(recs, Method::BiasCorrectedSdp, 30000, 1.0, &RunRecord::snr_db));
  return {s1 >= 11 && s1 <= 15 && s2 >= 5 && s2 <= 9 && elapsed < 120.0,
          fmt("mean SNR %.2f dB at 0.25 (in [11, 15]), %.2f dB at 1 (in [5, 9]), %.1f s (< 120 s)",
              s1, s2, elapsed)};
}

// 3. Median ||Kx - K*x|| non-increasing over T, terminal median < 0.05.
Outcome consistency_trend() {
  const std::vector<Eigen::Index> grid{300, 3000, 30000};
  const auto recs = bench::run_monte_carlo(
      campaign(grid, {0.25}, {Method::BiasCorrectedSdp, Method::IvSdp}, 50, 3));
  bool pass = true;
  std::string detail;
  for (Method m : {Method::BiasCorrectedSdp, Method::IvSdp}) {
    double previous = INFINITY;
    detail += std::string(detail.empty() ? "" : "; ") + std::string(short_name(m)) + " medians";
    for (Eigen::Index t : grid) {
      const auto errs = metric(recs, m, t, 0.25, &RunRecord::err_kx);
      const double med = median(errs);
      pass = pass && errs.size() == 50 && med <= previous;
      previous = med;
      detail += fmt(" %.4f", med);
    }
    pass = pass && previous < 0.05;
  }
  return {pass, detail + " (non-increasing, last < 0.05)"};
}

// 4. Paired comparison against the uncorrected estimator.
Outcome noise_mitigation() {
  const auto recs = bench::run_monte_carlo(campaign(
      {30000}, {1.0}, {Method::RawSdp, Method::BiasCorrectedSdp, Method::IvSdp}, 20, 4));
  const double raw = median(metric(recs, Method::RawSdp, 30000, 1.0, &RunRecord::err_kx));
  const double bc = median(metric(recs, Method::BiasCorrectedSdp, 30000, 1.0, &RunRecord::err_kx));
  const double iv = median(metric(recs, Method::IvSdp, 30000, 1.0, &RunRecord::err_kx));
  return {bc < raw && iv < raw,
          fmt("median err_kx raw %.4f, bc %.4f, iv %.4f (bc, iv < raw)", raw, bc, iv)};
}

// 5. Closed-loop stability rate at T = 30000, variance 1.
Outcome stability_rate() {
  const auto recs = bench::run_monte_carlo(
      campaign({30000}, {1.0}, {Method::BiasCorrectedSdp, Method::IvSdp}, 100, 5));
  double worst = 1.0;
  std::string detail;
  for (Method m : {Method::BiasCorrectedSdp, Method::IvSdp}) {
    std::size_t total = 0, stable = 0;
    for (const auto& r : recs)
      if (r.method == m) {
        ++total;
        stable += r.stable ? 1 : 0;
      }
    const double rate = total ? static_cast<double>(stable) / static_cast<double>(total) : 0.0;
    worst = std::min(worst, rate);
    detail += fmt("%s%s %zu/%zu stable", detail.empty() ? "" : ", ",
                  std::string(short_name(m)).c_str(), stable, total);
  }
  return {worst >= 0.95, detail + " (>= 95%)"};
}

// 6. Solver against the brute-force oracle.
Outcome oracle_equivalence() {
  double worst = 0.0;
  int optimal = 0, certified = 0;
  for (std::uint64_t s = 0; s < 30; ++s) {
    const int k = 1 + static_cast<int>(s % 6);
    const sdp::SdpProblem p = testing::random_2x2_instance(derive_seed(777, s), k);
    const testing::OracleResult ref = testing::brute_force_2x2(p);
    const sdp::SdpSettings settings;
    const sdp::SdpSolution sol = sdp::solve(p, settings);
    if (sol.status != sdp::SdpStatus::Optimal || !ref.bounded) {
      worst = INFINITY;
      continue;
    }
    ++optimal;
    certified += sdp::check_solution(p, sol.y).passes(settings) ? 1 : 0;
    worst = std::max(worst, std::abs(sol.objective_value - ref.objective));
  }
  return {worst <= 1e-5 && optimal == 30 && certified == 30,
          fmt("max |objective - oracle| = %.2e (tol 1e-5), %d/30 optimal, %d/30 certified", worst,
              optimal, certified)};
}

// 7. Expectation identities of the corrected and instrumented projections.
Outcome expectation_identities() {
  constexpr int kReps = 200;
  constexpr Eigen::Index kT = 3000;
  RandomStream rng(derive_seed(7, 1));
  const Matrix u = rng.uniform_matrix(3, kT, -2.0, 2.0);
  const LtiSystem sys = testing::paper_plant();
  const Matrix clean =
      project(build_experiment_data(simulate_open_loop(sys, u, Vector::Zero(3), {}), false), true)
          .x0_bar;

  // Bias correction at variance 0.25, instruments at variance 1.
  struct Case {
    const char* name;
    double variance;
  };
  bool pass = true;
  std::string detail;
  for (const Case& c : {Case{"bc", 0.25}, Case{"iv", 1.0}}) {
    Matrix sum = Matrix::Zero(3, 6), sum_sq = Matrix::Zero(3, 6);
    for (int r = 0; r < kReps; ++r) {
      const auto rs = derive_seed(7, 100 + static_cast<std::uint64_t>(r));
      const Trajectory a = simulate_open_loop(sys, u, Vector::Zero(3), {c.variance, derive_seed(rs, 1)});
      const ExperimentData da = build_experiment_data(a, true);
      Matrix x;
      if (c.name[0] == 'b') {
        x = bias_correct(project(da), c.variance).x0_bar;
      } else {
        const Trajectory b =
            simulate_open_loop(sys, u, Vector::Zero(3), {c.variance, derive_seed(rs, 2)});
        x = build_iv_projection(da, build_experiment_data(b, true)).x0_bar;
      }
      sum += x;
      sum_sq += x.cwiseAbs2();
    }
    const Matrix m = sum / kReps;
    const Matrix se = ((sum_sq / kReps - m.cwiseAbs2()).cwiseMax(0.0) *
                       (static_cast<double>(kReps) / (kReps - 1.0)) / kReps)
                          .cwiseSqrt();
    int inside = 0;
    for (Eigen::Index i = 0; i < m.size(); ++i)
      if (std::abs(m(i) - clean(i)) <= 3.0 * se(i)) ++inside;
    pass = pass && inside >= 0.95 * static_cast<double>(m.size());
    detail += fmt("%s%s %d/%d entries within 3 SE", detail.empty() ? "" : ", ", c.name, inside,
                  static_cast<int>(m.size()));
  }
  return {pass, detail + " (>= 95%)"};
}

// 8. SDP route reproduces the exact matcher on reachable models.
Outcome feasible_matching() {
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const testing::FeasiblePlant fp = testing::random_feasible_plant(derive_seed(88, s));
    RandomStream rng(derive_seed(89, s));
    const Matrix u = rng.uniform_matrix(3, 500, -2.0, 2.0);
    const ProjectedData proj = project(
        build_experiment_data(simulate_open_loop(fp.sys, u, Vector::Zero(3), {}), false), true);
    try {
      const ControllerGains ge = synthesize_exact(proj, fp.model);
      const ControllerGains gs = synthesize(proj, fp.model);
      worst = std::max({worst, testing::max_abs_diff(ge.kx, gs.kx),
                        testing::max_abs_diff(ge.kr, gs.kr)});
    } catch (const Error&) {
      worst = INFINITY;
    }
  }
  return {worst <= 1e-5, fmt("max gain difference over 10 plants %.2e (tol 1e-5)", worst)};
}

// 9. Synthesis time does not grow with T.
Outcome computational_flatness() {
  ExperimentConfig c = campaign({3000, 30000}, {1.0}, {Method::BiasCorrectedSdp}, 30, 9);
  c.threads = 1;  // keep timings free of scheduler contention
  const auto recs = bench::run_monte_carlo(c);
  const double t1 = median(metric(recs, Method::BiasCorrectedSdp, 3000, 1.0, &RunRecord::solve_time_ms));
  const double t2 =
      median(metric(recs, Method::BiasCorrectedSdp, 30000, 1.0, &RunRecord::solve_time_ms));
  const double ratio = std::max(t1, t2) / std::min(t1, t2);
  return {ratio < 2.0, fmt("median synthesize time %.3f ms at T=3000, %.3f ms at T=30000, "
                           "ratio %.2f (< 2)",
                           t1, t2, ratio)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"1 exact_matching", exact_matching},
      {"2 snr_levels", snr_levels},
      {"3 consistency_trend", consistency_trend},
      {"4 noise_mitigation", noise_mitigation},
      {"5 stability_rate", stability_rate},
      {"6 sdp_oracle_equivalence", oracle_equivalence},
      {"7 expectation_identities", expectation_identities},
      {"8 feasible_matching_equivalence", feasible_matching},
      {"9 computational_flatness", computational_flatness},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o{false, ""};
    try {
      o = run();
    } catch (const std::exception& e) {
      o.detail = std::string("exception: ") + e.what();
    }
    failures += o.pass ? 0 : 1;
    std::printf("[%s] %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
