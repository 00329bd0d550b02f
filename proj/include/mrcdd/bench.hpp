#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "mrcdd/data_pipeline.hpp"
#include "mrcdd/linear_system.hpp"
#include "mrcdd/synthesis.hpp"

namespace mrcdd::bench {

/// Everything a Monte-Carlo campaign needs. Defaults reproduce the
/// three-state benchmark plant with A_M = 0.2 I, B_M = 0.8 I.
struct ExperimentConfig {
  Matrix plant_a;
  Matrix plant_b;
  Matrix model_am;
  Matrix model_bm;
  Vector x0;  // empty means zero

  std::vector<Eigen::Index> t_grid{30000};
  std::vector<double> variances{0.25, 1.0};
  double input_low = -2.0;
  double input_high = 2.0;
  std::vector<Method> methods{Method::BiasCorrectedSdp, Method::IvSdp, Method::AveragedSdp};
  int mc_runs = 100;
  std::uint64_t seed = 1;

  /// Repeated short experiments for the averaging baseline. 0 experiments
  /// means t_len / avg_length, i.e. the same sample budget as the other
  /// methods (1000 x 30 at T = 30000).
  int avg_experiments = 0;
  Eigen::Index avg_length = 30;

  int avg_experiments_for(Eigen::Index t_len) const;

  MatchingOptions synthesis;

  /// When false, solve_time_ms is written as 0 so output is byte-reproducible.
  bool record_timing = true;
  /// 0 selects MRCDD_THREADS or the hardware concurrency.
  int threads = 0;

  Eigen::Index tracking_horizon = 100;
  double tracking_variance = 0.0;
  Matrix tracking_reference;  // n x horizon, empty means the default signal

  LtiSystem plant() const { return LtiSystem(plant_a, plant_b); }
  ReferenceModel model() const { return ReferenceModel(model_am, model_bm); }
  Vector initial_state() const;
  void validate() const;
};

Matrix paper_plant_a();
Matrix paper_plant_b();
/// Perfect-matching gains for the benchmark plant, four decimals.
Matrix paper_kx();
Matrix paper_kr();

ExperimentConfig default_config();

/// Applies one `section.key = value` setting. Relative file paths resolve
/// against `base_dir`. Throws ParseError naming the key on any problem.
void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value,
                   const std::filesystem::path& base_dir = {});

/// INI-style text: `[section]` headers and `key = value` lines; '#' and ';'
/// start comment lines.
ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// Mean over state components of 10 log10(clean energy / noise energy).
double compute_snr(const Matrix& states_clean, const Matrix& noise);

/// Data of one Monte-Carlo run. Inputs, noise and instrument noise come from
/// separate streams of the run seed, so every method sees the same
/// realization for a given run index.
struct RunData {
  Trajectory primary;
  Trajectory instrument;                    // same inputs, independent noise
  std::vector<Trajectory> repeats;          // averaging baseline
};

RunData generate_run_data(const ExperimentConfig& config, std::uint64_t run_seed,
                          Eigen::Index t_len, double variance,
                          const std::vector<Method>& methods);

struct RunRecord {
  int run_index = 0;
  std::uint64_t seed = 0;
  Method method = Method::BiasCorrectedSdp;
  Eigen::Index t_len = 0;
  double variance = 0.0;
  double snr_db = 0.0;
  double err_kx = 0.0;
  double err_kr = 0.0;
  bool stable = false;
  double spectral_radius = 0.0;
  double solve_time_ms = 0.0;
  std::string solver_status;
  Matrix kx;
  Matrix kr;

  bool ok() const { return solver_status == "optimal"; }
};

/// Projected data for one method, as the synthesis stage would see it.
ProjectedData projected_for(Method method, const RunData& data, double variance);

/// Synthesizes gains for one method on prepared data and scores them against
/// `truth`. Failures are recorded in solver_status, never thrown.
RunRecord evaluate_method(const ExperimentConfig& config, Method method, const RunData& data,
                          double variance, const ControllerGains& truth);

/// Gains of the exact matcher on noise-free data from the configured plant.
ControllerGains ground_truth_gains(const ExperimentConfig& config);

std::uint64_t run_seed(const ExperimentConfig& config, int run_index);

/// Records ordered by t_len, variance, method (config order), run index.
std::vector<RunRecord> run_monte_carlo(const ExperimentConfig& config);

void write_records_csv(std::ostream& out, const std::vector<RunRecord>& records);

struct SummaryRow {
  Method method;
  Eigen::Index t_len;
  double variance;
  std::string metric;
  double median, q25, q75, mean, std;
  std::size_t n;
};

/// Quantile with linear interpolation between order statistics.
double quantile(std::vector<double> values, double prob);

std::vector<SummaryRow> summarize(const std::vector<RunRecord>& records);
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);

Matrix default_reference(Eigen::Index n, Eigen::Index horizon);

struct TrackingSeries {
  Method method;
  Eigen::Index t_len;
  double variance;
  Matrix desired;  // n x (H+1)
  Matrix mean;     // n x (H+1)
  Matrix stddev;   // n x (H+1)
  std::size_t runs = 0;
};

/// Closed-loop simulations with every successful run's gains, grouped by
/// (method, t_len, variance).
std::vector<TrackingSeries> run_tracking(const ExperimentConfig& config,
                                         const std::vector<RunRecord>& records);
void write_tracking_csv(std::ostream& out, const std::vector<TrackingSeries>& series);

/// Reduced-size property suite. Prints one line per check and returns the
/// number of failed checks.
int run_selftest(std::ostream& log);

/// Worker count from MRCDD_THREADS, else the hardware concurrency.
int default_thread_count();

}  // namespace mrcdd::bench
