#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "mrcdd/bench.hpp"
#include "mrcdd/matrix_io.hpp"

namespace mrcdd::bench {

Matrix paper_plant_a() {
  Matrix a(3, 3);
  a << 0.1344, 0.2155, -0.1084,
       0.4585, 0.0797, 0.0857,
      -0.5647, -0.3269, 0.8946;
  return a;
}

Matrix paper_plant_b() {
  Matrix b(3, 3);
  b << 0.9298, 0.9143, -0.7162,
      -0.6848, -0.0292, -0.1565,
       0.9412, 0.6006, 0.8315;
  return b;
}

Matrix paper_kx() {
  Matrix k(3, 3);
  k << 0.6308, -0.2920, 0.3080,
      -0.3814, 0.4011, -0.7166,
       0.2405, 0.4340, -0.6664;
  return k;
}

Matrix paper_kr() {
  Matrix k(3, 3);
  k << 0.0768, -1.3126, -0.1809,
       0.4654, 1.5957, 0.7012,
      -0.4231, 0.3332, 0.6604;
  return k;
}

ExperimentConfig default_config() {
  ExperimentConfig c;
  c.plant_a = paper_plant_a();
  c.plant_b = paper_plant_b();
  c.model_am = 0.2 * Matrix::Identity(3, 3);
  c.model_bm = 0.8 * Matrix::Identity(3, 3);
  return c;
}

Vector ExperimentConfig::initial_state() const {
  if (x0.size() == 0) return Vector::Zero(plant_a.rows());
  return x0;
}

int ExperimentConfig::avg_experiments_for(Eigen::Index t_len) const {
  if (avg_experiments > 0) return avg_experiments;
  return static_cast<int>(std::max<Eigen::Index>(1, t_len / avg_length));
}

void ExperimentConfig::validate() const {
  const LtiSystem sys = plant();
  const ReferenceModel ref = model();
  if (ref.n() != sys.n() || model_bm.rows() != sys.n())
    throw DimensionError("reference model and plant state dimensions differ");
  if (x0.size() != 0 && x0.size() != sys.n())
    throw DimensionError("experiment.x0 must have n entries");
  if (mc_runs < 1) throw InvalidArgument("experiment.mc_runs must be >= 1");
  if (!(input_low < input_high))
    throw InvalidArgument("experiment.input_low must be below experiment.input_high");
  if (t_grid.empty()) throw InvalidArgument("experiment.t_len must not be empty");
  for (Eigen::Index t : t_grid)
    if (t < 1) throw InvalidArgument("experiment.t_len entries must be >= 1");
  if (variances.empty()) throw InvalidArgument("experiment.variance must not be empty");
  for (double v : variances)
    if (!(v >= 0.0)) throw InvalidArgument("experiment.variance entries must be >= 0");
  if (methods.empty()) throw InvalidArgument("experiment.method must not be empty");
  if (avg_experiments < 0 || avg_length < 1)
    throw InvalidArgument("experiment.avg_experiments must be >= 0 and avg_length >= 1");
  if (!(synthesis.lambda > 0.0)) throw InvalidArgument("solver.lambda must be > 0");
  if (!(synthesis.epsilon > 0.0)) throw InvalidArgument("solver.epsilon must be > 0");
  if (tracking_horizon < 1) throw InvalidArgument("tracking.horizon must be >= 1");
  if (!(tracking_variance >= 0.0)) throw InvalidArgument("tracking.variance must be >= 0");
  if (tracking_reference.size() != 0 && tracking_reference.rows() != sys.n())
    throw DimensionError("tracking reference must have n rows");
}

namespace {

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const std::string& why) {
  throw ParseError("config key '" + key + "': invalid value '" + value + "' (" + why + ")");
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> parts;
  boost::split(parts, value, boost::is_any_of(", \t"), boost::token_compress_on);
  std::vector<std::string> out;
  for (auto& p : parts) {
    boost::trim(p);
    if (!p.empty()) out.push_back(p);
  }
  return out;
}

double to_double(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) bad_value(key, text, "trailing characters");
    return v;
  } catch (const std::logic_error&) {
    bad_value(key, text, "expected a number");
  }
}

long long to_integer(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(text, &used);
    if (used != text.size()) bad_value(key, text, "expected an integer");
    return v;
  } catch (const std::logic_error&) {
    bad_value(key, text, "expected an integer");
  }
}

bool to_bool(const std::string& key, const std::string& text) {
  const std::string t = boost::to_lower_copy(text);
  if (t == "1" || t == "true" || t == "yes" || t == "on") return true;
  if (t == "0" || t == "false" || t == "no" || t == "off") return false;
  bad_value(key, text, "expected true or false");
}

Matrix to_matrix(const std::string& key, const std::string& text) {
  try {
    return parse_matrix_literal(text);
  } catch (const Error& e) {
    bad_value(key, text, e.what());
  }
}

Matrix matrix_file(const std::string& key, const std::string& text,
                   const std::filesystem::path& base_dir) {
  std::filesystem::path p(text);
  if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
  try {
    return load_matrix(p);
  } catch (const Error& e) {
    throw ParseError("config key '" + key + "': " + e.what());
  }
}

}  // namespace

void apply_setting(ExperimentConfig& c, const std::string& key, const std::string& raw,
                   const std::filesystem::path& base_dir) {
  const std::string value = boost::trim_copy(raw);
  if (value.empty()) throw ParseError("config key '" + key + "' has an empty value");
  const auto pos_int = [&](long long lo) {
    const long long v = to_integer(key, value);
    if (v < lo) bad_value(key, value, "must be >= " + std::to_string(lo));
    return v;
  };

  if (key == "plant.a") c.plant_a = to_matrix(key, value);
  else if (key == "plant.b") c.plant_b = to_matrix(key, value);
  else if (key == "plant.a_file") c.plant_a = matrix_file(key, value, base_dir);
  else if (key == "plant.b_file") c.plant_b = matrix_file(key, value, base_dir);
  else if (key == "model.am") c.model_am = to_matrix(key, value);
  else if (key == "model.bm") c.model_bm = to_matrix(key, value);
  else if (key == "model.am_file") c.model_am = matrix_file(key, value, base_dir);
  else if (key == "model.bm_file") c.model_bm = matrix_file(key, value, base_dir);
  else if (key == "experiment.t_len" || key == "experiment.t_grid") {
    c.t_grid.clear();
    for (const auto& item : split_list(value)) {
      const long long t = to_integer(key, item);
      if (t < 1) bad_value(key, item, "must be >= 1");
      c.t_grid.push_back(static_cast<Eigen::Index>(t));
    }
  } else if (key == "experiment.variance") {
    c.variances.clear();
    for (const auto& item : split_list(value)) {
      const double v = to_double(key, item);
      if (!(v >= 0.0)) bad_value(key, item, "must be >= 0");
      c.variances.push_back(v);
    }
  } else if (key == "experiment.method") {
    c.methods.clear();
    for (const auto& item : split_list(value)) {
      const auto m = parse_method(item);
      if (!m) bad_value(key, item, "expected exact, noisefree, raw, bc, iv or avg");
      c.methods.push_back(*m);
    }
  } else if (key == "experiment.input_low") c.input_low = to_double(key, value);
  else if (key == "experiment.input_high") c.input_high = to_double(key, value);
  else if (key == "experiment.x0") {
    const Matrix m = to_matrix(key, value);
    c.x0 = Eigen::Map<const Vector>(m.data(), m.size());
  } else if (key == "experiment.mc_runs") c.mc_runs = static_cast<int>(pos_int(1));
  else if (key == "experiment.seed") c.seed = static_cast<std::uint64_t>(pos_int(0));
  else if (key == "experiment.avg_experiments") c.avg_experiments = static_cast<int>(pos_int(0));
  else if (key == "experiment.avg_length") c.avg_length = pos_int(1);
  else if (key == "experiment.record_timing") c.record_timing = to_bool(key, value);
  else if (key == "experiment.threads") c.threads = static_cast<int>(pos_int(0));
  else if (key == "solver.lambda") c.synthesis.lambda = to_double(key, value);
  else if (key == "solver.epsilon") c.synthesis.epsilon = to_double(key, value);
  else if (key == "solver.scale_bound") c.synthesis.scale_bound = to_double(key, value);
  else if (key == "solver.eq_tol") c.synthesis.solver.eq_tol = to_double(key, value);
  else if (key == "solver.psd_tol") c.synthesis.solver.psd_tol = to_double(key, value);
  else if (key == "solver.gap_tol") c.synthesis.solver.duality_gap_tol = to_double(key, value);
  else if (key == "solver.max_iter") c.synthesis.solver.max_iter = static_cast<int>(pos_int(1));
  else if (key == "tracking.horizon") c.tracking_horizon = pos_int(1);
  else if (key == "tracking.variance") c.tracking_variance = to_double(key, value);
  else if (key == "tracking.reference_file")
    c.tracking_reference = matrix_file(key, value, base_dir);
  else throw ParseError("unknown config key '" + key + "'");
}

ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir) {
  // Boost's INI reader only understands ';' comments; drop '#' lines too.
  std::stringstream cleaned;
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = boost::trim_copy(line);
    if (!t.empty() && t[0] == '#') {
      cleaned << '\n';
      continue;
    }
    cleaned << line << '\n';
  }

  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(cleaned, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ParseError("malformed config (line " + std::to_string(e.line()) + "): " + e.message());
  }

  ExperimentConfig config = default_config();
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ParseError("config key '" + section + "' is outside any section");
    for (const auto& [name, leaf] : body) {
      if (!leaf.empty()) throw ParseError("config key '" + section + "." + name + "' is nested");
      apply_setting(config, section + "." + name, leaf.data(), base_dir);
    }
  }
  config.validate();
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path.string() + "'");
  return parse_config(in, path.parent_path());
}

int default_thread_count() {
  if (const char* env = std::getenv("MRCDD_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<int>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace mrcdd::bench
