#pragma once

#include "qdpt/metrics/series.hpp"

#include <cstdio>
#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace qdpt::harness {

inline const std::vector<std::string> kMetricNames{"faults", "behaviors", "faulty_behaviors", "final_state_sparseness",
                                                   "failure_state_sparseness"};

/// Logs of one method, one per seed.
struct MethodLogs {
  std::string method;
  std::vector<CampaignLog> logs;
};

struct MethodAggregate {
  std::string method;
  AggregateSeries series;
};

/// metric name -> per-method aggregates, in method order.
using MetricTables = std::map<std::string, std::vector<MethodAggregate>>;

inline std::map<std::string, MetricSeries> campaign_metrics(const CampaignLog& log, const BehaviorSpace& space,
                                                            int resolution) {
  auto cov = coverage_series(log, space, resolution);
  return {
      {"faults", fault_count_series(log)},
      {"behaviors", std::move(cov.behaviors)},
      {"faulty_behaviors", std::move(cov.faulty_behaviors)},
      {"final_state_sparseness", sparseness_series(log, false)},
      {"failure_state_sparseness", sparseness_series(log, true)},
  };
}

inline MetricTables compute_metric_tables(const std::vector<MethodLogs>& methods, const BehaviorSpace& space,
                                          int resolution) {
  MetricTables tables;
  for (const auto& m : methods) {
    std::map<std::string, std::vector<std::vector<double>>> per_seed;
    for (const auto& log : m.logs) {
      for (auto& [name, series] : campaign_metrics(log, space, resolution)) per_seed[name].push_back(std::move(series.values));
    }
    for (const auto& name : kMetricNames) tables[name].push_back({m.method, aggregate_across_seeds(per_seed[name])});
  }
  return tables;
}

inline std::string format_cell(double v) { return is_missing(v) ? "NA" : format_real(v); }

inline const MethodAggregate* find_method(const std::vector<MethodAggregate>& table, std::string_view method) {
  for (const auto& m : table) {
    if (m.method == method) return &m;
  }
  return nullptr;
}

/// Columns: index, method, median, q1, q3, then the same three relative to the
/// Random Testing median (NA when Random Testing is not part of the run).
inline void write_metric_csv(std::ostream& os, const std::vector<MethodAggregate>& table) {
  os << "index,method,median,q1,q3,rel_median,rel_q1,rel_q3\n";
  const MethodAggregate* base = find_method(table, "random");
  for (const auto& m : table) {
    const auto& s = m.series;
    const std::size_t n = s.median.size();
    std::vector<double> rel_med(n, kMissing), rel_q1(n, kMissing), rel_q3(n, kMissing);
    if (base && base->series.median.size() == n) {
      rel_med = relative_to_baseline(s.median, base->series.median);
      rel_q1 = relative_to_baseline(s.q1, base->series.median);
      rel_q3 = relative_to_baseline(s.q3, base->series.median);
    }
    for (std::size_t i = 0; i < n; ++i) {
      os << (i + 1) << ',' << m.method << ',' << format_cell(s.median[i]) << ',' << format_cell(s.q1[i]) << ','
         << format_cell(s.q3[i]) << ',' << format_cell(rel_med[i]) << ',' << format_cell(rel_q1[i]) << ','
         << format_cell(rel_q3[i]) << '\n';
    }
  }
}

/// One row per (behavior space, method, metric) holding end-of-budget values.
struct ComparisonRow {
  std::string behavior_space;
  std::string method;
  std::string metric;
  double median = kMissing;
  double q1 = kMissing;
  double q3 = kMissing;
  double rel_median = kMissing;
};

inline std::vector<ComparisonRow> comparison_rows(const std::string& space, const MetricTables& tables) {
  std::vector<ComparisonRow> rows;
  for (const auto& metric : kMetricNames) {
    const auto it = tables.find(metric);
    if (it == tables.end()) continue;
    const MethodAggregate* base = find_method(it->second, "random");
    for (const auto& m : it->second) {
      ComparisonRow r{space, m.method, metric};
      if (!m.series.median.empty()) {
        r.median = m.series.median.back();
        r.q1 = m.series.q1.back();
        r.q3 = m.series.q3.back();
        if (base && !base->series.median.empty()) {
          r.rel_median = relative_to_baseline({r.median}, {base->series.median.back()}).front();
        }
      }
      rows.push_back(std::move(r));
    }
  }
  return rows;
}

inline void write_comparison_csv(std::ostream& os, const std::vector<ComparisonRow>& rows) {
  os << "behavior_space,method,metric,final_median,final_q1,final_q3,rel_final_median\n";
  for (const auto& r : rows) {
    os << r.behavior_space << ',' << r.method << ',' << r.metric << ',' << format_cell(r.median) << ','
       << format_cell(r.q1) << ',' << format_cell(r.q3) << ',' << format_cell(r.rel_median) << '\n';
  }
}

}  // namespace qdpt::harness
