#include "mrcdd/mrcdd.h"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <new>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mrcdd/bench.hpp"
#include "mrcdd/matrix_io.hpp"
#include "mrcdd/random.hpp"

namespace fs = std::filesystem;
using namespace mrcdd;

struct mrcdd_matrix {
  Matrix value;
};

struct mrcdd_config {
  bench::ExperimentConfig value;
};

struct Experiment {
  Matrix inputs;
  Matrix states;
  std::optional<Matrix> states_clean;
  std::optional<Matrix> noise;
};

struct mrcdd_dataset {
  std::vector<Experiment> experiments;
};

struct mrcdd_gains {
  ControllerGains value;
};

struct mrcdd_campaign {
  bench::ExperimentConfig config;
  std::vector<bench::RunRecord> records;
};

namespace {

thread_local std::string last_error;

template <typename Fn>
mrcdd_status guarded(Fn&& fn) {
  try {
    fn();
    last_error.clear();
    return MRCDD_OK;
  } catch (const InfeasibleMatchingError& e) {
    last_error = e.what();
    return MRCDD_ERR_INFEASIBLE;
  } catch (const SingularMatrixError& e) {
    last_error = e.what();
    return MRCDD_ERR_SINGULAR;
  } catch (const SolverError& e) {
    last_error = e.what();
    return MRCDD_ERR_SOLVER;
  } catch (const DimensionError& e) {
    last_error = e.what();
    return MRCDD_ERR_DIMENSION;
  } catch (const RegimeError& e) {
    last_error = e.what();
    return MRCDD_ERR_REGIME;
  } catch (const InputMismatchError& e) {
    last_error = e.what();
    return MRCDD_ERR_INPUT_MISMATCH;
  } catch (const ParseError& e) {
    last_error = e.what();
    return MRCDD_ERR_PARSE;
  } catch (const IoError& e) {
    last_error = e.what();
    return MRCDD_ERR_IO;
  } catch (const InvalidArgument& e) {
    last_error = e.what();
    return MRCDD_ERR_INVALID_ARGUMENT;
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return MRCDD_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return MRCDD_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown error";
    return MRCDD_ERR_INTERNAL;
  }
}

template <typename T>
const T& need(const T* p, const char* what) {
  if (!p) throw InvalidArgument(std::string(what) + " is NULL");
  return *p;
}

template <typename T>
T& need(T* p, const char* what) {
  if (!p) throw InvalidArgument(std::string(what) + " is NULL");
  return *p;
}

const char* need_str(const char* s, const char* what) {
  if (!s) throw InvalidArgument(std::string(what) + " is NULL");
  return s;
}

template <typename T>
void emit(T** out, T* value) {
  if (!out) {
    delete value;
    throw InvalidArgument("output pointer is NULL");
  }
  *out = value;
}

ExperimentData to_data(const Experiment& e) { return make_experiment_data(e.inputs, e.states); }

void add_experiment_dir(mrcdd_dataset& ds, const fs::path& dir) {
  if (fs::exists(dir / "inputs.txt")) {
    Experiment e;
    e.inputs = load_matrix(dir / "inputs.txt");
    e.states = load_matrix(dir / "states.txt");
    make_experiment_data(e.inputs, e.states);  // shape check
    ds.experiments.push_back(std::move(e));
    return;
  }
  if (!fs::is_directory(dir)) throw IoError("dataset directory " + dir.string() + " not found");
  std::vector<fs::path> subdirs;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_directory() && entry.path().filename().string().rfind("exp_", 0) == 0)
      subdirs.push_back(entry.path());
  if (subdirs.empty())
    throw IoError(dir.string() + " holds neither inputs.txt nor exp_* experiments");
  std::sort(subdirs.begin(), subdirs.end());
  for (const auto& sub : subdirs) add_experiment_dir(ds, sub);
}

void require_count(const mrcdd_dataset& ds, std::size_t count, const std::string& method) {
  if (ds.experiments.size() < count)
    throw InvalidArgument("method " + method + " needs at least " + std::to_string(count) +
                          " experiment(s), dataset has " +
                          std::to_string(ds.experiments.size()));
}

void write_file(const char* path, const std::function<void(std::ostream&)>& body) {
  std::ofstream out(need_str(path, "path"));
  if (!out) throw IoError(std::string("cannot open ") + path + " for writing");
  body(out);
  if (!out) throw IoError(std::string("failed writing ") + path);
}

}  // namespace

extern "C" {

const char* mrcdd_version(void) { return "1.0.0"; }

const char* mrcdd_status_string(mrcdd_status status) {
  switch (status) {
    case MRCDD_OK: return "ok";
    case MRCDD_ERR_INVALID_ARGUMENT: return "invalid argument";
    case MRCDD_ERR_DIMENSION: return "dimension mismatch";
    case MRCDD_ERR_PARSE: return "parse error";
    case MRCDD_ERR_IO: return "i/o error";
    case MRCDD_ERR_REGIME: return "wrong data regime";
    case MRCDD_ERR_INPUT_MISMATCH: return "input sequences differ";
    case MRCDD_ERR_SINGULAR: return "singular matrix";
    case MRCDD_ERR_INFEASIBLE: return "matching infeasible";
    case MRCDD_ERR_SOLVER: return "solver failure";
    case MRCDD_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* mrcdd_last_error(void) { return last_error.c_str(); }

mrcdd_status mrcdd_matrix_create(size_t rows, size_t cols, const double* data,
                                 mrcdd_matrix** out) {
  return guarded([&] {
    auto* m = new mrcdd_matrix{Matrix::Zero(static_cast<Eigen::Index>(rows),
                                            static_cast<Eigen::Index>(cols))};
    if (data) m->value = Eigen::Map<const Matrix>(data, m->value.rows(), m->value.cols());
    emit(out, m);
  });
}

void mrcdd_matrix_destroy(mrcdd_matrix* matrix) { delete matrix; }

size_t mrcdd_matrix_rows(const mrcdd_matrix* matrix) {
  return matrix ? static_cast<size_t>(matrix->value.rows()) : 0;
}

size_t mrcdd_matrix_cols(const mrcdd_matrix* matrix) {
  return matrix ? static_cast<size_t>(matrix->value.cols()) : 0;
}

mrcdd_status mrcdd_matrix_get(const mrcdd_matrix* matrix, size_t row, size_t col,
                              double* value) {
  return guarded([&] {
    const Matrix& m = need(matrix, "matrix").value;
    if (row >= static_cast<size_t>(m.rows()) || col >= static_cast<size_t>(m.cols()))
      throw DimensionError("matrix index out of range");
    need(value, "value") = m(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
  });
}

mrcdd_status mrcdd_matrix_copy(const mrcdd_matrix* matrix, double* out, size_t capacity) {
  return guarded([&] {
    const Matrix& m = need(matrix, "matrix").value;
    if (capacity < static_cast<size_t>(m.size()))
      throw DimensionError("output buffer holds " + std::to_string(capacity) + " values, need " +
                           std::to_string(m.size()));
    if (m.size() > 0) std::copy(m.data(), m.data() + m.size(), &need(out, "out buffer"));
  });
}

mrcdd_status mrcdd_matrix_load(const char* path, mrcdd_matrix** out) {
  return guarded([&] { emit(out, new mrcdd_matrix{load_matrix(need_str(path, "path"))}); });
}

mrcdd_status mrcdd_matrix_save(const mrcdd_matrix* matrix, const char* path) {
  return guarded([&] { save_matrix(need_str(path, "path"), need(matrix, "matrix").value); });
}

mrcdd_status mrcdd_matrix_print(const mrcdd_matrix* matrix, const char* label) {
  return guarded([&] {
    const Matrix& m = need(matrix, "matrix").value;
    if (label) std::printf("%s =\n", label);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) std::printf(j ? " % .6f" : "  % .6f", m(i, j));
      std::printf("\n");
    }
    std::fflush(stdout);
  });
}

mrcdd_status mrcdd_config_default(mrcdd_config** out) {
  return guarded([&] { emit(out, new mrcdd_config{bench::default_config()}); });
}

mrcdd_status mrcdd_config_load(const char* path, mrcdd_config** out) {
  return guarded([&] { emit(out, new mrcdd_config{bench::load_config(need_str(path, "path"))}); });
}

mrcdd_status mrcdd_config_parse(const char* text, mrcdd_config** out) {
  return guarded([&] {
    std::istringstream in(need_str(text, "text"));
    emit(out, new mrcdd_config{bench::parse_config(in)});
  });
}

mrcdd_status mrcdd_config_set(mrcdd_config* config, const char* key, const char* value) {
  return guarded([&] {
    bench::ExperimentConfig updated = need(config, "config").value;
    bench::apply_setting(updated, need_str(key, "key"), need_str(value, "value"));
    updated.validate();
    config->value = std::move(updated);
  });
}

void mrcdd_config_destroy(mrcdd_config* config) { delete config; }

mrcdd_status mrcdd_config_model(const mrcdd_config* config, mrcdd_matrix** am,
                                mrcdd_matrix** bm) {
  return guarded([&] {
    const auto& c = need(config, "config").value;
    if (!am || !bm) throw InvalidArgument("output pointer is NULL");
    *am = new mrcdd_matrix{c.model_am};
    *bm = new mrcdd_matrix{c.model_bm};
  });
}

mrcdd_status mrcdd_dataset_simulate(const mrcdd_config* config, uint64_t seed, size_t t_len,
                                    double variance, size_t count, mrcdd_dataset** out) {
  return guarded([&] {
    const auto& c = need(config, "config").value;
    if (t_len < 1) throw InvalidArgument("t_len must be >= 1");
    if (count < 1) throw InvalidArgument("experiment count must be >= 1");
    const LtiSystem sys = c.plant();
    RandomStream rng(derive_seed(seed, 1));
    const Matrix inputs = rng.uniform_matrix(sys.m(), static_cast<Eigen::Index>(t_len),
                                             c.input_low, c.input_high);
    auto ds = std::make_unique<mrcdd_dataset>();
    for (size_t e = 0; e < count; ++e) {
      const Trajectory traj =
          simulate_open_loop(sys, inputs, c.initial_state(), {variance, derive_seed(seed, 2 + e)});
      ds->experiments.push_back({traj.inputs, traj.states_noisy, traj.states_clean, traj.noise});
    }
    emit(out, ds.release());
  });
}

mrcdd_status mrcdd_dataset_create(mrcdd_dataset** out) {
  return guarded([&] { emit(out, new mrcdd_dataset{}); });
}

mrcdd_status mrcdd_dataset_add_dir(mrcdd_dataset* dataset, const char* dir) {
  return guarded([&] {
    mrcdd_dataset staged;
    add_experiment_dir(staged, need_str(dir, "dir"));
    auto& target = need(dataset, "dataset").experiments;
    for (auto& e : staged.experiments) target.push_back(std::move(e));
  });
}

mrcdd_status mrcdd_dataset_add(mrcdd_dataset* dataset, const mrcdd_matrix* inputs,
                               const mrcdd_matrix* states) {
  return guarded([&] {
    Experiment e{need(inputs, "inputs").value, need(states, "states").value, {}, {}};
    make_experiment_data(e.inputs, e.states);
    need(dataset, "dataset").experiments.push_back(std::move(e));
  });
}

mrcdd_status mrcdd_dataset_save(const mrcdd_dataset* dataset, const char* dir) {
  return guarded([&] {
    const auto& ds = need(dataset, "dataset");
    const fs::path root(need_str(dir, "dir"));
    std::error_code ec;
    fs::create_directories(root, ec);
    if (ec) throw IoError("cannot create " + root.string() + ": " + ec.message());
    for (size_t i = 0; i < ds.experiments.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "exp_%03zu", i);
      const fs::path sub = root / name;
      fs::create_directories(sub, ec);
      if (ec) throw IoError("cannot create " + sub.string() + ": " + ec.message());
      const Experiment& e = ds.experiments[i];
      save_matrix(sub / "inputs.txt", e.inputs);
      save_matrix(sub / "states.txt", e.states);
      if (e.states_clean) save_matrix(sub / "states_clean.txt", *e.states_clean);
      if (e.noise) save_matrix(sub / "noise.txt", *e.noise);
    }
  });
}

size_t mrcdd_dataset_size(const mrcdd_dataset* dataset) {
  return dataset ? dataset->experiments.size() : 0;
}

void mrcdd_dataset_destroy(mrcdd_dataset* dataset) { delete dataset; }

mrcdd_status mrcdd_dataset_estimate_variance(const mrcdd_dataset* dataset, double* variance) {
  return guarded([&] {
    const auto& ds = need(dataset, "dataset");
    require_count(ds, 2, "variance estimation");
    if (ds.experiments[0].inputs != ds.experiments[1].inputs)
      throw InputMismatchError("variance estimation needs repeats with identical inputs");
    need(variance, "variance") =
        estimate_variance_from_repeats(ds.experiments[0].states, ds.experiments[1].states);
  });
}

void mrcdd_synth_options_default(mrcdd_synth_options* options) {
  if (!options) return;
  const MatchingOptions d;
  options->variance = -1.0;
  options->lambda = d.lambda;
  options->epsilon = d.epsilon;
  options->scale_bound = d.scale_bound;
  options->eq_tol = d.solver.eq_tol;
  options->psd_tol = d.solver.psd_tol;
  options->gap_tol = d.solver.duality_gap_tol;
  options->max_iter = d.solver.max_iter;
}

mrcdd_status mrcdd_synthesize(const mrcdd_dataset* dataset, const mrcdd_matrix* am,
                              const mrcdd_matrix* bm, const char* method,
                              const mrcdd_synth_options* options, mrcdd_gains** out) {
  return guarded([&] {
    const auto& ds = need(dataset, "dataset");
    const ReferenceModel model(need(am, "A_M").value, need(bm, "B_M").value);
    const std::string name = need_str(method, "method");
    const auto m = parse_method(name);
    if (!m) throw InvalidArgument("unknown method '" + name + "'");

    mrcdd_synth_options opts;
    mrcdd_synth_options_default(&opts);
    if (options) opts = *options;
    MatchingOptions mo;
    mo.lambda = opts.lambda;
    mo.epsilon = opts.epsilon;
    mo.scale_bound = opts.scale_bound;
    mo.solver.eq_tol = opts.eq_tol;
    mo.solver.psd_tol = opts.psd_tol;
    mo.solver.duality_gap_tol = opts.gap_tol;
    mo.solver.max_iter = opts.max_iter;
    if (!(mo.epsilon > 0.0)) throw InvalidArgument("epsilon must be > 0");
    if (mo.solver.max_iter < 1) throw InvalidArgument("max_iter must be >= 1");

    require_count(ds, 1, name);
    ControllerGains gains;
    switch (*m) {
      case Method::Exact:
        gains = synthesize_exact(project(to_data(ds.experiments[0]), true), model);
        break;
      case Method::NoiseFreeSdp:
        gains = synthesize(project(to_data(ds.experiments[0]), true), model, mo);
        break;
      case Method::RawSdp:
        gains = synthesize(project(to_data(ds.experiments[0])), model, mo);
        break;
      case Method::BiasCorrectedSdp: {
        double variance = opts.variance;
        if (variance < 0.0) {
          require_count(ds, 2, "bc without --variance");
          if (ds.experiments[0].inputs != ds.experiments[1].inputs)
            throw InputMismatchError("variance estimation needs repeats with identical inputs");
          variance =
              estimate_variance_from_repeats(ds.experiments[0].states, ds.experiments[1].states);
        }
        gains = synthesize(bias_correct(project(to_data(ds.experiments[0])), variance), model, mo);
        break;
      }
      case Method::IvSdp:
        require_count(ds, 2, name);
        gains = synthesize(
            build_iv_projection(to_data(ds.experiments[0]), to_data(ds.experiments[1])), model,
            mo);
        break;
      case Method::AveragedSdp: {
        std::vector<ExperimentData> exps;
        for (const auto& e : ds.experiments) exps.push_back(to_data(e));
        gains = synthesize(build_averaged_projection(exps), model, mo);
        break;
      }
    }
    gains.method = *m;
    emit(out, new mrcdd_gains{std::move(gains)});
  });
}

void mrcdd_gains_destroy(mrcdd_gains* gains) { delete gains; }

mrcdd_status mrcdd_gains_kx(const mrcdd_gains* gains, mrcdd_matrix** out) {
  return guarded([&] { emit(out, new mrcdd_matrix{need(gains, "gains").value.kx}); });
}

mrcdd_status mrcdd_gains_kr(const mrcdd_gains* gains, mrcdd_matrix** out) {
  return guarded([&] { emit(out, new mrcdd_matrix{need(gains, "gains").value.kr}); });
}

mrcdd_status mrcdd_gains_info_get(const mrcdd_gains* gains, mrcdd_gains_info* info) {
  return guarded([&] {
    const auto& g = need(gains, "gains").value;
    auto& i = need(info, "info");
    i.matching_residual_a = g.diagnostics.matching_residual_a;
    i.matching_residual_b = g.diagnostics.matching_residual_b;
    i.spectral_radius_estimate = g.diagnostics.closed_loop_spectral_radius_estimate;
    i.solver_iterations = g.solver_iterations;
    i.t_len = static_cast<size_t>(g.t_len);
  });
}

mrcdd_status mrcdd_verify_matching(const mrcdd_matrix* a, const mrcdd_matrix* b,
                                   const mrcdd_gains* gains, const mrcdd_matrix* am,
                                   const mrcdd_matrix* bm, mrcdd_matching_errors* out) {
  return guarded([&] {
    const LtiSystem sys(need(a, "A").value, need(b, "B").value);
    const ReferenceModel model(need(am, "A_M").value, need(bm, "B_M").value);
    const MatchingErrors e = verify_matching(sys, need(gains, "gains").value, model);
    auto& o = need(out, "out");
    o.err_a = e.err_a;
    o.err_b = e.err_b;
    o.spectral_radius = e.spectral_radius;
    o.stable = e.stable ? 1 : 0;
  });
}

mrcdd_status mrcdd_campaign_run(const mrcdd_config* config, mrcdd_campaign** out) {
  return guarded([&] {
    auto c = std::make_unique<mrcdd_campaign>();
    c->config = need(config, "config").value;
    c->records = bench::run_monte_carlo(c->config);
    emit(out, c.release());
  });
}

void mrcdd_campaign_destroy(mrcdd_campaign* campaign) { delete campaign; }

size_t mrcdd_campaign_size(const mrcdd_campaign* campaign) {
  return campaign ? campaign->records.size() : 0;
}

mrcdd_status mrcdd_campaign_record(const mrcdd_campaign* campaign, size_t index,
                                   mrcdd_run_record* out) {
  return guarded([&] {
    const auto& c = need(campaign, "campaign");
    if (index >= c.records.size()) throw DimensionError("record index out of range");
    const bench::RunRecord& r = c.records[index];
    auto& o = need(out, "out");
    o.run_index = r.run_index;
    o.seed = r.seed;
    o.method = short_name(r.method).data();
    o.t_len = static_cast<size_t>(r.t_len);
    o.variance = r.variance;
    o.snr_db = r.snr_db;
    o.err_kx = r.err_kx;
    o.err_kr = r.err_kr;
    o.stable = r.stable ? 1 : 0;
    o.spectral_radius = r.spectral_radius;
    o.solve_time_ms = r.solve_time_ms;
    o.solver_status = r.solver_status.c_str();
  });
}

mrcdd_status mrcdd_campaign_write_records(const mrcdd_campaign* campaign, const char* path) {
  return guarded([&] {
    const auto& c = need(campaign, "campaign");
    write_file(path, [&](std::ostream& out) { bench::write_records_csv(out, c.records); });
  });
}

mrcdd_status mrcdd_campaign_write_summary(const mrcdd_campaign* campaign, const char* path) {
  return guarded([&] {
    const auto& c = need(campaign, "campaign");
    const auto rows = bench::summarize(c.records);
    write_file(path, [&](std::ostream& out) { bench::write_summary_csv(out, rows); });
  });
}

mrcdd_status mrcdd_campaign_write_tracking(const mrcdd_campaign* campaign, const char* path) {
  return guarded([&] {
    const auto& c = need(campaign, "campaign");
    const auto series = bench::run_tracking(c.config, c.records);
    write_file(path, [&](std::ostream& out) { bench::write_tracking_csv(out, series); });
  });
}

mrcdd_status mrcdd_selftest(int* failures) {
  return guarded([&] {
    const int f = bench::run_selftest(std::cout);
    std::cout.flush();
    need(failures, "failures") = f;
  });
}

}  // extern "C"
