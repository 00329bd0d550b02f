#include <cmath>
#include <cstdio>
#include <algorithm>
#include <map>
#include <ostream>
#include <tuple>

#include "mrcdd/bench.hpp"
#include "mrcdd/random.hpp"

namespace mrcdd::bench {

namespace {
constexpr std::uint64_t kTrackingNoiseStream = 6;
}

Matrix default_reference(Eigen::Index n, Eigen::Index horizon) {
  if (n < 1 || horizon < 1) throw InvalidArgument("reference needs n >= 1 and horizon >= 1");
  // Square-wave-like steps; each component is shifted by one segment.
  static constexpr double kLevels[] = {1.0, -1.0, 0.5, -0.5};
  const Eigen::Index segment = std::max<Eigen::Index>(1, horizon / 4);
  Matrix r(n, horizon);
  for (Eigen::Index t = 0; t < horizon; ++t)
    for (Eigen::Index i = 0; i < n; ++i) r(i, t) = kLevels[(t / segment + i) % 4];
  return r;
}

std::vector<TrackingSeries> run_tracking(const ExperimentConfig& config,
                                         const std::vector<RunRecord>& records) {
  config.validate();
  const LtiSystem sys = config.plant();
  const ReferenceModel model = config.model();
  const Vector x0 = config.initial_state();
  const Matrix reference = config.tracking_reference.size() != 0
                               ? config.tracking_reference
                               : default_reference(sys.n(), config.tracking_horizon);
  const Matrix desired = simulate_reference(model, reference, x0);

  using Key = std::tuple<Eigen::Index, double, int>;
  std::vector<Key> order;
  std::map<Key, std::vector<const RunRecord*>> groups;
  for (const RunRecord& r : records) {
    if (!r.ok() || r.kx.size() == 0) continue;
    const Key key{r.t_len, r.variance, static_cast<int>(r.method)};
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.push_back(&r);
  }
  if (order.empty()) throw InvalidArgument("no successful runs with gains to simulate");

  std::vector<TrackingSeries> out;
  for (const Key& key : order) {
    const auto& group = groups[key];
    TrackingSeries s;
    s.t_len = std::get<0>(key);
    s.variance = std::get<1>(key);
    s.method = static_cast<Method>(std::get<2>(key));
    s.desired = desired;
    s.runs = group.size();

    std::vector<Matrix> states;
    states.reserve(group.size());
    for (const RunRecord* r : group) {
      const NoiseSpec noise{config.tracking_variance,
                            derive_seed(r->seed, kTrackingNoiseStream)};
      states.push_back(simulate_closed_loop(sys, r->kx, r->kr, reference, x0, noise).states_clean);
    }
    const double k = static_cast<double>(group.size());
    s.mean = Matrix::Zero(desired.rows(), desired.cols());
    for (const Matrix& x : states) s.mean += x;
    s.mean /= k;
    s.stddev = Matrix::Zero(desired.rows(), desired.cols());
    if (group.size() > 1) {
      for (const Matrix& x : states) s.stddev += (x - s.mean).cwiseAbs2();
      s.stddev = (s.stddev / (k - 1.0)).cwiseSqrt();
    }
    out.push_back(std::move(s));
  }
  return out;
}

void write_tracking_csv(std::ostream& out, const std::vector<TrackingSeries>& series) {
  if (series.empty()) return;
  const Eigen::Index n = series.front().desired.rows();
  out << "method,t_len,variance,runs,t";
  for (Eigen::Index i = 1; i <= n; ++i) out << ",xd_" << i;
  for (Eigen::Index i = 1; i <= n; ++i) out << ",mean_" << i;
  for (Eigen::Index i = 1; i <= n; ++i) out << ",std_" << i;
  out << '\n';
  char buf[40];
  const auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << ',' << buf;
  };
  for (const TrackingSeries& s : series) {
    for (Eigen::Index t = 0; t < s.desired.cols(); ++t) {
      out << short_name(s.method) << ',' << s.t_len;
      put(s.variance);
      out << ',' << s.runs << ',' << t;
      for (Eigen::Index i = 0; i < n; ++i) put(s.desired(i, t));
      for (Eigen::Index i = 0; i < n; ++i) put(s.mean(i, t));
      for (Eigen::Index i = 0; i < n; ++i) put(s.stddev(i, t));
      out << '\n';
    }
  }
}

}  // namespace mrcdd::bench
