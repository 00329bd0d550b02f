#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <ostream>
#include <tuple>

#include "mrcdd/bench.hpp"

namespace mrcdd::bench {

double compute_snr(const Matrix& states_clean, const Matrix& noise) {
  if (states_clean.rows() != noise.rows() || states_clean.cols() != noise.cols())
    throw DimensionError("clean states and noise must have the same shape");
  if (states_clean.size() == 0) throw DimensionError("SNR of an empty signal");
  double total = 0.0;
  for (Eigen::Index i = 0; i < noise.rows(); ++i) {
    const double signal = states_clean.row(i).squaredNorm();
    const double disturbance = noise.row(i).squaredNorm();
    if (disturbance == 0.0)
      throw InvalidArgument("SNR is undefined: noise component " + std::to_string(i) +
                            " is identically zero");
    total += 10.0 * std::log10(signal / disturbance);
  }
  return total / static_cast<double>(noise.rows());
}

double quantile(std::vector<double> values, double prob) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  if (!(prob >= 0.0 && prob <= 1.0)) throw InvalidArgument("quantile probability outside [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = prob * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

namespace {

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

SummaryRow describe(Method method, Eigen::Index t_len, double variance, std::string metric,
                    const std::vector<double>& raw) {
  std::vector<double> v;
  for (double x : raw)
    if (std::isfinite(x)) v.push_back(x);
  SummaryRow row{method, t_len, variance, std::move(metric), 0, 0, 0, 0, 0, v.size()};
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (v.empty()) {
    row.median = row.q25 = row.q75 = row.mean = row.std = nan;
    return row;
  }
  row.median = quantile(v, 0.5);
  row.q25 = quantile(v, 0.25);
  row.q75 = quantile(v, 0.75);
  double sum = 0.0;
  for (double x : v) sum += x;
  row.mean = sum / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - row.mean) * (x - row.mean);
  row.std = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
  return row;
}

}  // namespace

void write_records_csv(std::ostream& out, const std::vector<RunRecord>& records) {
  out << "run_index,seed,method,t_len,variance,snr_db,err_kx,err_kr,stable,spectral_radius,"
         "solve_time_ms,solver_status\n";
  for (const RunRecord& r : records) {
    out << r.run_index << ',' << r.seed << ',' << short_name(r.method) << ',' << r.t_len << ','
        << fmt(r.variance) << ',' << fmt(r.snr_db) << ',' << fmt(r.err_kx) << ','
        << fmt(r.err_kr) << ',' << (r.stable ? 1 : 0) << ',' << fmt(r.spectral_radius) << ','
        << fmt(r.solve_time_ms) << ',' << r.solver_status << '\n';
  }
}

std::vector<SummaryRow> summarize(const std::vector<RunRecord>& records) {
  using Key = std::tuple<Eigen::Index, double, int>;
  std::vector<Key> order;
  std::map<Key, std::vector<const RunRecord*>> groups;
  for (const RunRecord& r : records) {
    const Key key{r.t_len, r.variance, static_cast<int>(r.method)};
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.push_back(&r);
  }

  std::vector<SummaryRow> rows;
  std::map<std::pair<Eigen::Index, double>, Key> baseline;
  for (const Key& key : order) {
    const auto& group = groups[key];
    const auto [t_len, variance, method_id] = key;
    const auto method = static_cast<Method>(method_id);
    const auto collect = [&](auto field) {
      std::vector<double> v;
      for (const RunRecord* r : group) v.push_back(field(*r));
      return v;
    };
    const double nan = std::numeric_limits<double>::quiet_NaN();
    rows.push_back(describe(method, t_len, variance, "err_kx",
                            collect([&](const RunRecord& r) { return r.ok() ? r.err_kx : nan; })));
    rows.push_back(describe(method, t_len, variance, "err_kr",
                            collect([&](const RunRecord& r) { return r.ok() ? r.err_kr : nan; })));
    rows.push_back(describe(method, t_len, variance, "snr_db",
                            collect([](const RunRecord& r) { return r.snr_db; })));
    rows.push_back(describe(method, t_len, variance, "spectral_radius",
                            collect([&](const RunRecord& r) {
                              return r.ok() ? r.spectral_radius : nan;
                            })));
    rows.push_back(describe(method, t_len, variance, "stable",
                            collect([](const RunRecord& r) { return r.stable ? 1.0 : 0.0; })));
    rows.push_back(describe(method, t_len, variance, "solved",
                            collect([](const RunRecord& r) { return r.ok() ? 1.0 : 0.0; })));
    rows.push_back(describe(method, t_len, variance, "solve_time_ms",
                            collect([&](const RunRecord& r) {
                              return r.ok() ? r.solve_time_ms : nan;
                            })));

    // Paired differences against the first method of the same (T, variance).
    const auto [base_it, first] = baseline.try_emplace({t_len, variance}, key);
    if (first) continue;
    const auto& base_group = groups[base_it->second];
    const auto base_method = static_cast<Method>(std::get<2>(base_it->second));
    std::map<int, const RunRecord*> base_by_run;
    for (const RunRecord* r : base_group) base_by_run[r->run_index] = r;
    std::vector<double> dkx, dkr;
    for (const RunRecord* r : group) {
      const auto b = base_by_run.find(r->run_index);
      if (b == base_by_run.end() || !r->ok() || !b->second->ok()) continue;
      dkx.push_back(r->err_kx - b->second->err_kx);
      dkr.push_back(r->err_kr - b->second->err_kr);
    }
    const std::string suffix = "_paired_delta_vs_" + std::string(short_name(base_method));
    rows.push_back(describe(method, t_len, variance, "err_kx" + suffix, dkx));
    rows.push_back(describe(method, t_len, variance, "err_kr" + suffix, dkr));
  }
  return rows;
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "method,t_len,variance,metric,median,q25,q75,mean,std,n\n";
  for (const SummaryRow& r : rows) {
    out << short_name(r.method) << ',' << r.t_len << ',' << fmt(r.variance) << ',' << r.metric
        << ',' << fmt(r.median) << ',' << fmt(r.q25) << ',' << fmt(r.q75) << ',' << fmt(r.mean)
        << ',' << fmt(r.std) << ',' << r.n << '\n';
  }
}

}  // namespace mrcdd::bench
