#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "mrcdd/bench.hpp"
#include "mrcdd/random.hpp"

namespace mrcdd::bench {

namespace {

// Stream identifiers under a run seed.
constexpr std::uint64_t kInputStream = 1;
constexpr std::uint64_t kNoiseStream = 2;
constexpr std::uint64_t kInstrumentStream = 3;
constexpr std::uint64_t kRepeatInputStream = 4;
constexpr std::uint64_t kRepeatNoiseStream = 5;
// Stream under the base seed for the ground-truth dataset.
constexpr std::uint64_t kTruthStream = 0x7275746855ULL;
constexpr Eigen::Index kTruthLength = 1000;

bool uses(const std::vector<Method>& methods, Method m) {
  return std::find(methods.begin(), methods.end(), m) != methods.end();
}

double snr_of(const Trajectory& traj) {
  const Eigen::Index t = traj.length();
  return compute_snr(traj.states_clean.leftCols(t), traj.noise.leftCols(t));
}

double pooled_snr(const std::vector<Trajectory>& repeats) {
  Eigen::Index total = 0;
  for (const auto& r : repeats) total += r.length();
  const Eigen::Index n = repeats.front().states_clean.rows();
  Matrix clean(n, total), noise(n, total);
  Eigen::Index col = 0;
  for (const auto& r : repeats) {
    clean.middleCols(col, r.length()) = r.states_clean.leftCols(r.length());
    noise.middleCols(col, r.length()) = r.noise.leftCols(r.length());
    col += r.length();
  }
  return compute_snr(clean, noise);
}

}  // namespace

std::uint64_t run_seed(const ExperimentConfig& config, int run_index) {
  return derive_seed(config.seed, static_cast<std::uint64_t>(run_index));
}

RunData generate_run_data(const ExperimentConfig& config, std::uint64_t seed,
                          Eigen::Index t_len, double variance,
                          const std::vector<Method>& methods) {
  const LtiSystem sys = config.plant();
  const Vector x0 = config.initial_state();
  RunData data;

  RandomStream input_rng(derive_seed(seed, kInputStream));
  const Matrix inputs =
      input_rng.uniform_matrix(sys.m(), t_len, config.input_low, config.input_high);
  data.primary = simulate_open_loop(sys, inputs, x0, {variance, derive_seed(seed, kNoiseStream)});
  if (uses(methods, Method::IvSdp))
    data.instrument =
        simulate_open_loop(sys, inputs, x0, {variance, derive_seed(seed, kInstrumentStream)});

  if (uses(methods, Method::AveragedSdp)) {
    RandomStream repeat_rng(derive_seed(seed, kRepeatInputStream));
    const Matrix repeat_inputs = repeat_rng.uniform_matrix(sys.m(), config.avg_length,
                                                           config.input_low, config.input_high);
    const int count = config.avg_experiments_for(t_len);
    data.repeats.reserve(static_cast<std::size_t>(count));
    for (int e = 0; e < count; ++e)
      data.repeats.push_back(simulate_open_loop(
          sys, repeat_inputs, x0,
          {variance, derive_seed(seed, kRepeatNoiseStream, static_cast<std::uint64_t>(e))}));
  }
  return data;
}

ProjectedData projected_for(Method method, const RunData& data, double variance) {
  switch (method) {
    case Method::Exact:
    case Method::NoiseFreeSdp:
      // Noise-free formulation applied to whatever was measured.
      return project(build_experiment_data(data.primary, true), variance == 0.0);
    case Method::RawSdp:
      return project(build_experiment_data(data.primary, true));
    case Method::BiasCorrectedSdp:
      return bias_correct(project(build_experiment_data(data.primary, true)), variance);
    case Method::IvSdp:
      if (data.instrument.length() == 0) throw InvalidArgument("IV needs a second experiment");
      return build_iv_projection(build_experiment_data(data.primary, true),
                                 build_experiment_data(data.instrument, true));
    case Method::AveragedSdp: {
      if (data.repeats.empty()) throw InvalidArgument("averaging needs repeated experiments");
      std::vector<ExperimentData> exps;
      exps.reserve(data.repeats.size());
      for (const auto& r : data.repeats) exps.push_back(build_experiment_data(r, true));
      return build_averaged_projection(exps);
    }
  }
  throw InvalidArgument("unknown method");
}

RunRecord evaluate_method(const ExperimentConfig& config, Method method, const RunData& data,
                          double variance, const ControllerGains& truth) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  RunRecord rec;
  rec.method = method;
  rec.variance = variance;
  rec.err_kx = rec.err_kr = rec.spectral_radius = rec.solve_time_ms = nan;
  // Averaging runs on its own repeated experiments but is filed under the
  // grid length so that methods line up per run.
  rec.t_len = data.primary.length();
  if (method == Method::AveragedSdp)
    rec.snr_db = variance > 0.0 && !data.repeats.empty() ? pooled_snr(data.repeats) : nan;
  else
    rec.snr_db = variance > 0.0 ? snr_of(data.primary) : nan;

  try {
    const ProjectedData proj = projected_for(method, data, variance);
    const ReferenceModel model = config.model();
    const auto start = std::chrono::steady_clock::now();
    const ControllerGains gains = method == Method::Exact
                                      ? synthesize_exact(proj, model)
                                      : synthesize(proj, model, config.synthesis);
    const auto stop = std::chrono::steady_clock::now();
    rec.solve_time_ms =
        config.record_timing ? std::chrono::duration<double, std::milli>(stop - start).count()
                             : 0.0;
    const MatchingErrors check = verify_matching(config.plant(), gains, model);
    rec.err_kx = spectral_norm(gains.kx - truth.kx);
    rec.err_kr = spectral_norm(gains.kr - truth.kr);
    rec.spectral_radius = check.spectral_radius;
    rec.stable = check.stable;
    rec.kx = gains.kx;
    rec.kr = gains.kr;
    rec.solver_status = "optimal";
  } catch (const InfeasibleMatchingError&) {
    rec.solver_status = "infeasible";
  } catch (const SingularMatrixError&) {
    rec.solver_status = "singular";
  } catch (const SolverError&) {
    rec.solver_status = "solver_failure";
  } catch (const Error&) {
    rec.solver_status = "error";
  }
  return rec;
}

ControllerGains ground_truth_gains(const ExperimentConfig& config) {
  const LtiSystem sys = config.plant();
  RandomStream rng(derive_seed(config.seed, kTruthStream));
  const Matrix inputs =
      rng.uniform_matrix(sys.m(), kTruthLength, config.input_low, config.input_high);
  const Trajectory traj = simulate_open_loop(sys, inputs, config.initial_state(), {});
  const ProjectedData proj = project(build_experiment_data(traj, false), true);
  try {
    return synthesize_exact(proj, config.model());
  } catch (const InfeasibleMatchingError&) {
    // No perfect matching exists; the best noise-free SDP fit is the target.
    return synthesize(proj, config.model(), config.synthesis);
  }
}

std::vector<RunRecord> run_monte_carlo(const ExperimentConfig& config) {
  config.validate();
  const ControllerGains truth = ground_truth_gains(config);

  struct Job {
    std::size_t t_index, v_index;
    int run;
  };
  std::vector<Job> jobs;
  for (std::size_t ti = 0; ti < config.t_grid.size(); ++ti)
    for (std::size_t vi = 0; vi < config.variances.size(); ++vi)
      for (int r = 0; r < config.mc_runs; ++r) jobs.push_back({ti, vi, r});

  // results[job][method]
  std::vector<std::vector<RunRecord>> results(jobs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  const auto worker = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      try {
        const Job& job = jobs[j];
        const std::uint64_t seed = run_seed(config, job.run);
        const double variance = config.variances[job.v_index];
        const RunData data = generate_run_data(config, seed, config.t_grid[job.t_index],
                                               variance, config.methods);
        auto& out = results[j];
        for (Method m : config.methods) {
          RunRecord rec = evaluate_method(config, m, data, variance, truth);
          rec.run_index = job.run;
          rec.seed = seed;
          out.push_back(std::move(rec));
        }
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = jobs.size();
      }
    }
  };

  const int requested = config.threads > 0 ? config.threads : default_thread_count();
  const auto count = static_cast<std::size_t>(std::max(1, requested));
  std::vector<std::thread> pool;
  for (std::size_t i = 1; i < std::min(count, jobs.size()); ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  std::vector<RunRecord> records;
  records.reserve(jobs.size() * config.methods.size());
  std::size_t block = 0;
  for (std::size_t ti = 0; ti < config.t_grid.size(); ++ti) {
    for (std::size_t vi = 0; vi < config.variances.size(); ++vi, ++block) {
      const std::size_t base = block * static_cast<std::size_t>(config.mc_runs);
      for (std::size_t mi = 0; mi < config.methods.size(); ++mi)
        for (int r = 0; r < config.mc_runs; ++r)
          records.push_back(results[base + static_cast<std::size_t>(r)][mi]);
    }
  }
  return records;
}

}  // namespace mrcdd::bench
