// Command-line front end. Talks to the library only through the C API.

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mrcdd/mrcdd.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;

int exit_code_for(mrcdd_status status) {
  switch (status) {
    case MRCDD_OK: return kExitOk;
    case MRCDD_ERR_SINGULAR:
    case MRCDD_ERR_INFEASIBLE:
    case MRCDD_ERR_SOLVER:
    case MRCDD_ERR_INTERNAL: return kExitNumerical;
    default: return kExitUsage;
  }
}

struct Failure {
  int code;
};

void check(mrcdd_status status, const std::string& context) {
  if (status == MRCDD_OK) return;
  std::fprintf(stderr, "mrcdd: %s: %s (%s)\n", context.c_str(), mrcdd_last_error(),
               mrcdd_status_string(status));
  throw Failure{exit_code_for(status)};
}

// Small RAII holders for the C handles.
template <typename T, void (*Destroy)(T*)>
struct Handle {
  T* ptr = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Destroy(ptr); }
  T** out() { return &ptr; }
  T* get() const { return ptr; }
};

using Matrix = Handle<mrcdd_matrix, mrcdd_matrix_destroy>;
using Config = Handle<mrcdd_config, mrcdd_config_destroy>;
using Dataset = Handle<mrcdd_dataset, mrcdd_dataset_destroy>;
using Gains = Handle<mrcdd_gains, mrcdd_gains_destroy>;
using Campaign = Handle<mrcdd_campaign, mrcdd_campaign_destroy>;

void load_config(Config& config, const std::string& path, const std::vector<std::string>& sets) {
  if (path.empty())
    check(mrcdd_config_default(config.out()), "default config");
  else
    check(mrcdd_config_load(path.c_str(), config.out()), "config " + path);
  for (const auto& item : sets) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "mrcdd: --set expects section.key=value, got '%s'\n", item.c_str());
      throw Failure{kExitUsage};
    }
    const std::string key = item.substr(0, eq);
    check(mrcdd_config_set(config.get(), key.c_str(), item.substr(eq + 1).c_str()),
          "--set " + key);
  }
}

Campaign* run_campaign(const Config& config, Campaign& campaign) {
  check(mrcdd_campaign_run(config.get(), campaign.out()), "montecarlo");
  return &campaign;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Model-reference controller synthesis from noisy state-input data"};
  app.require_subcommand(1);
  app.set_version_flag("--version", mrcdd_version());

  std::string config_path;
  std::vector<std::string> sets;
  const auto add_config_opts = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "Configuration file")->check(CLI::ExistingFile);
    sub->add_option("--set", sets, "Override a config key: section.key=value");
  };

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Simulate experiments and write dataset files");
  std::string sim_out;
  std::size_t sim_t_len = 1000, sim_count = 1;
  double sim_variance = 0.0;
  std::uint64_t sim_seed = 1;
  add_config_opts(simulate);
  simulate->add_option("-o,--out", sim_out, "Output directory")->required();
  simulate->add_option("-T,--t-len", sim_t_len, "Samples per experiment")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--variance", sim_variance, "Measurement noise variance")
      ->check(CLI::NonNegativeNumber);
  simulate->add_option("--seed", sim_seed, "Random seed");
  simulate->add_option("-n,--experiments", sim_count, "Experiments sharing one input sequence")
      ->check(CLI::PositiveNumber);

  // synthesize
  auto* synth = app.add_subcommand("synthesize", "Compute controller gains from dataset files");
  std::vector<std::string> data_dirs;
  std::string method = "bc", am_path, bm_path, gains_out;
  mrcdd_synth_options opts;
  mrcdd_synth_options_default(&opts);
  add_config_opts(synth);
  synth->add_option("-d,--data", data_dirs, "Experiment directory (repeatable)")->required();
  synth->add_option("-m,--method", method, "exact | noisefree | raw | bc | iv | avg")
      ->check(CLI::IsMember({"exact", "noisefree", "raw", "bc", "iv", "avg"}));
  synth->add_option("--variance", opts.variance,
                    "Noise variance for bc (default: estimate from two repeats)");
  synth->add_option("--lambda", opts.lambda, "Weight of the B_M matching term")
      ->check(CLI::PositiveNumber);
  synth->add_option("--epsilon", opts.epsilon, "Lyapunov margin")->check(CLI::PositiveNumber);
  synth->add_option("--am", am_path, "Reference model A_M file")->check(CLI::ExistingFile);
  synth->add_option("--bm", bm_path, "Reference model B_M file")->check(CLI::ExistingFile);
  synth->add_option("-o,--out", gains_out, "Write kx.txt and kr.txt into this directory");

  // montecarlo
  auto* mc = app.add_subcommand("montecarlo", "Run a Monte-Carlo campaign");
  std::string records_path = "records.csv", summary_path = "summary.csv";
  add_config_opts(mc);
  mc->add_option("--records", records_path, "Per-run records CSV");
  mc->add_option("--summary", summary_path, "Summary CSV");

  // tracking
  auto* tracking = app.add_subcommand("tracking", "Closed-loop tracking of campaign gains");
  std::string tracking_path = "tracking.csv", tracking_records;
  add_config_opts(tracking);
  tracking->add_option("-o,--out", tracking_path, "Tracking CSV");
  tracking->add_option("--records", tracking_records, "Also write the campaign records CSV");

  auto* selftest = app.add_subcommand("selftest", "Run the reduced property suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (simulate->parsed()) {
      Config config;
      load_config(config, config_path, sets);
      Dataset ds;
      check(mrcdd_dataset_simulate(config.get(), sim_seed, sim_t_len, sim_variance, sim_count,
                                   ds.out()),
            "simulate");
      check(mrcdd_dataset_save(ds.get(), sim_out.c_str()), "write " + sim_out);
      std::printf("wrote %zu experiment(s) of length %zu to %s\n", sim_count, sim_t_len,
                  sim_out.c_str());
    } else if (synth->parsed()) {
      Config config;
      load_config(config, config_path, sets);
      Matrix am, bm;
      check(mrcdd_config_model(config.get(), am.out(), bm.out()), "reference model");
      if (!am_path.empty()) {
        Matrix loaded;
        check(mrcdd_matrix_load(am_path.c_str(), loaded.out()), "--am");
        std::swap(am.ptr, loaded.ptr);
      }
      if (!bm_path.empty()) {
        Matrix loaded;
        check(mrcdd_matrix_load(bm_path.c_str(), loaded.out()), "--bm");
        std::swap(bm.ptr, loaded.ptr);
      }
      Dataset ds;
      check(mrcdd_dataset_create(ds.out()), "dataset");
      for (const auto& dir : data_dirs) check(mrcdd_dataset_add_dir(ds.get(), dir.c_str()), dir);

      Gains gains;
      check(mrcdd_synthesize(ds.get(), am.get(), bm.get(), method.c_str(), &opts, gains.out()),
            "synthesize");
      Matrix kx, kr;
      check(mrcdd_gains_kx(gains.get(), kx.out()), "K_x");
      check(mrcdd_gains_kr(gains.get(), kr.out()), "K_r");
      mrcdd_gains_info info;
      check(mrcdd_gains_info_get(gains.get(), &info), "diagnostics");
      std::printf("method %s, T = %zu\n", method.c_str(), info.t_len);
      check(mrcdd_matrix_print(kx.get(), "K_x"), "print");
      check(mrcdd_matrix_print(kr.get(), "K_r"), "print");
      std::printf("data-based matching residuals: A %.3e, B %.3e; spectral radius %.4f\n",
                  info.matching_residual_a, info.matching_residual_b,
                  info.spectral_radius_estimate);
      if (!gains_out.empty()) {
        check(mrcdd_matrix_save(kx.get(), (gains_out + "/kx.txt").c_str()), "write K_x");
        check(mrcdd_matrix_save(kr.get(), (gains_out + "/kr.txt").c_str()), "write K_r");
      }
    } else if (mc->parsed()) {
      Config config;
      load_config(config, config_path, sets);
      Campaign campaign;
      run_campaign(config, campaign);
      check(mrcdd_campaign_write_records(campaign.get(), records_path.c_str()), records_path);
      check(mrcdd_campaign_write_summary(campaign.get(), summary_path.c_str()), summary_path);
      std::printf("%zu records -> %s, summary -> %s\n", mrcdd_campaign_size(campaign.get()),
                  records_path.c_str(), summary_path.c_str());
    } else if (tracking->parsed()) {
      Config config;
      load_config(config, config_path, sets);
      Campaign campaign;
      run_campaign(config, campaign);
      if (!tracking_records.empty())
        check(mrcdd_campaign_write_records(campaign.get(), tracking_records.c_str()),
              tracking_records);
      check(mrcdd_campaign_write_tracking(campaign.get(), tracking_path.c_str()), tracking_path);
      std::printf("tracking -> %s\n", tracking_path.c_str());
    } else if (selftest->parsed()) {
      int failures = 0;
      check(mrcdd_selftest(&failures), "selftest");
      return failures == 0 ? kExitOk : kExitNumerical;
    }
  } catch (const Failure& f) {
    return f.code;
  }
  return kExitOk;
}
