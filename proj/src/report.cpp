#include "mectrust/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace mectrust {

namespace {

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

struct Moments {
  double mean = 0.0;
  double stdev = 0.0;
};

Moments moments(const std::vector<double>& xs) {
  Moments m;
  for (double x : xs) m.mean += x;
  m.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - m.mean) * (x - m.mean);
    m.stdev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return m;
}

std::vector<const RunReport*> sorted_view(std::span<const RunReport> reports) {
  std::vector<const RunReport*> v;
  for (const auto& r : reports) v.push_back(&r);
  std::stable_sort(v.begin(), v.end(), [](const RunReport* a, const RunReport* b) {
    return std::make_tuple(std::string(method_name(a->method)), a->sweep_value, a->seed) <
           std::make_tuple(std::string(method_name(b->method)), b->sweep_value, b->seed);
  });
  return v;
}

}  // namespace

std::vector<SweepRow> aggregate(std::span<const RunReport> reports) {
  std::map<std::tuple<std::string, std::string, double>, std::vector<const RunReport*>> groups;
  for (const auto& r : reports) {
    if (!r.ok) continue;
    groups[{method_name(r.method), r.sweep_variable, r.sweep_value}].push_back(&r);
  }
  std::vector<SweepRow> rows;
  for (const auto& [key, runs] : groups) {
    std::vector<double> acc, rounds, wall;
    for (const auto* r : runs) {
      acc.push_back(r->mean_accuracy);
      rounds.push_back(static_cast<double>(r->rounds));
      wall.push_back(r->wall_time_seconds);
    }
    const auto a = moments(acc);
    const auto n = moments(rounds);
    rows.push_back(SweepRow{std::get<0>(key), std::get<1>(key), std::get<2>(key), static_cast<int>(runs.size()), a.mean,
                            a.stdev, n.mean, n.stdev, moments(wall).mean});
  }
  return rows;
}

std::string render_sweep_csv(std::span<const SweepRow> rows) {
  std::ostringstream out;
  out << "method,variable,value,runs,mean_accuracy,stdev_accuracy,mean_rounds,stdev_rounds,mean_wall_time_seconds\n";
  for (const auto& r : rows) {
    out << r.method << "," << r.variable << "," << fmt("%g", r.value) << "," << r.runs << ","
        << fmt("%.6f", r.mean_accuracy) << "," << fmt("%.6f", r.stdev_accuracy) << "," << fmt("%.2f", r.mean_rounds)
        << "," << fmt("%.2f", r.stdev_rounds) << "," << fmt("%.3f", r.mean_wall_time_seconds) << "\n";
  }
  return out.str();
}

std::string render_report(std::span<const RunReport> reports, ReportFormat format) {
  if (reports.empty()) throw std::invalid_argument("no reports to render");
  const auto rows = sorted_view(reports);
  auto value_cell = [](const RunReport& r) { return r.sweep_variable == "none" ? std::string("-") : fmt("%g", r.sweep_value); };
  std::ostringstream out;
  if (format == ReportFormat::csv) {
    out << "method,variable,value,mean_accuracy,rounds,wall_time_seconds,seed\n";
    for (const auto* r : rows) {
      out << method_name(r->method) << "," << r->sweep_variable << "," << value_cell(*r) << ","
          << fmt("%.6f", r->mean_accuracy) << "," << r->rounds << "," << fmt("%.3f", r->wall_time_seconds) << ","
          << r->seed << "\n";
    }
    return out.str();
  }

  std::map<std::string, std::vector<const RunReport*>> by_variable;
  for (const auto* r : rows) by_variable[r->sweep_variable].push_back(r);
  bool first = true;
  for (const auto& [variable, group] : by_variable) {
    if (!first) out << "\n";
    first = false;
    out << "### " << variable << "\n\n";
    out << "| method | " << variable << " | mean_accuracy | rounds | wall_time_seconds | seed |\n";
    out << "|---|---|---|---|---|---|\n";
    for (const auto* r : group) {
      out << "| " << method_name(r->method) << " | " << value_cell(*r) << " | " << fmt("%.4f", r->mean_accuracy)
          << " | " << r->rounds << " | " << fmt("%.3f", r->wall_time_seconds) << " | " << r->seed << " |\n";
    }
  }
  return out.str();
}

}  // namespace mectrust
