#pragma once

#include "qdpt/metrics/quantile.hpp"
#include "qdpt/qd/campaign.hpp"
#include "qdpt/qd/grid_archive.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>
#include <vector>

namespace qdpt {

/// NaN marks a missing value; output files spell it "NA".
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double v) { return std::isnan(v); }

struct MetricSeries {
  std::string method;
  std::uint64_t seed = 0;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
};

/// Distinct fault-triggering inputs among the first i records.
inline MetricSeries fault_count_series(const CampaignLog& log) {
  MetricSeries s{log.method, log.seed, {}};
  s.values.reserve(log.size());
  std::set<std::vector<double>> seen;
  for (const auto& r : log.records) {
    if (r.oracle) seen.insert(r.input.values);
    s.values.push_back(double(seen.size()));
  }
  return s;
}

/// Occupancy grid used for measurement only.
class ResultGrid {
 public:
  explicit ResultGrid(BehaviorSpace space, int resolution = 50)
      : space_(std::move(space)), res_(resolution), occupied_(std::size_t(resolution * resolution), false),
        faulty_(occupied_.size(), false) {}

  void add(const Behavior& b, bool fault) {
    const BinIndex bin = bin_index(space_, res_, b);
    const std::size_t at = std::size_t(bin.first * res_ + bin.second);
    if (!occupied_[at]) {
      occupied_[at] = true;
      ++coverage_;
    }
    if (fault && !faulty_[at]) {
      faulty_[at] = true;
      ++faulty_coverage_;
    }
  }

  bool occupied(BinIndex bin) const { return occupied_[std::size_t(bin.first * res_ + bin.second)]; }
  bool fault_occupied(BinIndex bin) const { return faulty_[std::size_t(bin.first * res_ + bin.second)]; }
  std::size_t coverage() const { return coverage_; }
  std::size_t faulty_coverage() const { return faulty_coverage_; }
  int resolution() const { return res_; }

 private:
  BehaviorSpace space_;
  int res_;
  std::vector<bool> occupied_;
  std::vector<bool> faulty_;
  std::size_t coverage_ = 0;
  std::size_t faulty_coverage_ = 0;
};

struct CoverageSeries {
  MetricSeries behaviors;
  MetricSeries faulty_behaviors;
};

inline CoverageSeries coverage_series(const CampaignLog& log, const BehaviorSpace& space, int resolution = 50) {
  CoverageSeries out{{log.method, log.seed, {}}, {log.method, log.seed, {}}};
  ResultGrid grid(space, resolution);
  for (const auto& r : log.records) {
    grid.add(r.behavior, r.oracle);
    out.behaviors.values.push_back(double(grid.coverage()));
    out.faulty_behaviors.values.push_back(double(grid.faulty_coverage()));
  }
  return out;
}

namespace detail {

inline double euclidean(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) s += (a[d] - b[d]) * (a[d] - b[d]);
  return std::sqrt(s);
}

}  // namespace detail

/// Mean over points of the average distance to their k nearest other points
/// (min(k, n-1) when the set is small).
inline double knn_sparseness(const std::vector<std::vector<double>>& points, int k = 3) {
  if (points.size() < 2) throw InsufficientDataError("sparseness needs at least two points");
  const std::size_t m = std::min<std::size_t>(std::size_t(k), points.size() - 1);
  std::vector<double> d;
  double total = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    d.clear();
    for (std::size_t j = 0; j < points.size(); ++j) {
      if (j != i) d.push_back(detail::euclidean(points[i], points[j]));
    }
    std::nth_element(d.begin(), d.begin() + std::ptrdiff_t(m - 1), d.end());
    double s = 0.0;
    for (std::size_t t = 0; t < m; ++t) s += d[t];
    total += s / double(m);
  }
  return total / double(points.size());
}

/// knn_sparseness of a growing point set, updated in O(n) per insertion by
/// keeping each point's k smallest distances.
class IncrementalSparseness {
 public:
  explicit IncrementalSparseness(int k = 3) : k_(std::size_t(k)) {}

  void add(std::vector<double> p) {
    std::vector<double> mine;
    for (std::size_t i = 0; i < points_.size(); ++i) {
      const double d = detail::euclidean(points_[i], p);
      insert_bounded(nearest_[i], d);
      insert_bounded(mine, d);
    }
    points_.push_back(std::move(p));
    nearest_.push_back(std::move(mine));
  }

  std::size_t size() const { return points_.size(); }

  /// Missing while fewer than two points are present.
  double value() const {
    if (points_.size() < 2) return kMissing;
    double total = 0.0;
    for (const auto& n : nearest_) {
      double s = 0.0;
      for (double d : n) s += d;
      total += s / double(n.size());
    }
    return total / double(points_.size());
  }

 private:
  void insert_bounded(std::vector<double>& v, double d) const {
    v.insert(std::upper_bound(v.begin(), v.end(), d), d);
    if (v.size() > k_) v.pop_back();
  }

  std::size_t k_;
  std::vector<std::vector<double>> points_;
  std::vector<std::vector<double>> nearest_;
};

/// Sparseness over time of the final states of distinct inputs; with
/// `faults_only` the set is restricted to fault-triggering inputs (failure
/// states). Values stay missing until two points exist.
inline MetricSeries sparseness_series(const CampaignLog& log, bool faults_only, int k = 3) {
  MetricSeries s{log.method, log.seed, {}};
  s.values.reserve(log.size());
  std::set<std::vector<double>> seen;
  IncrementalSparseness acc(k);
  double current = kMissing;
  for (const auto& r : log.records) {
    if ((!faults_only || r.oracle) && seen.insert(r.input.values).second) {
      acc.add(r.final_state);
      current = acc.value();
    }
    s.values.push_back(current);
  }
  return s;
}

/// Pointwise ratio; 0/0 is 1 and x/0 (x > 0) is missing, as is any missing operand.
inline std::vector<double> relative_to_baseline(const std::vector<double>& series, const std::vector<double>& baseline) {
  if (series.size() != baseline.size()) throw RejectedInputError("relative_to_baseline: length mismatch");
  std::vector<double> out(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double x = series[i];
    const double b = baseline[i];
    if (is_missing(x) || is_missing(b)) out[i] = kMissing;
    else if (b == 0.0) out[i] = x == 0.0 ? 1.0 : kMissing;
    else out[i] = x / b;
  }
  return out;
}

struct AggregateSeries {
  std::vector<double> median;
  std::vector<double> q1;
  std::vector<double> q3;
};

/// Pointwise median and quartiles across seeds, ignoring missing values.
inline AggregateSeries aggregate_across_seeds(const std::vector<std::vector<double>>& per_seed) {
  if (per_seed.empty()) throw InsufficientDataError("aggregate_across_seeds: no series");
  const std::size_t n = per_seed.front().size();
  for (const auto& s : per_seed) {
    if (s.size() != n) throw RejectedInputError("aggregate_across_seeds: length mismatch");
  }
  AggregateSeries out{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
  std::vector<double> col;
  for (std::size_t i = 0; i < n; ++i) {
    col.clear();
    for (const auto& s : per_seed) {
      if (!is_missing(s[i])) col.push_back(s[i]);
    }
    if (col.empty()) {
      out.median[i] = out.q1[i] = out.q3[i] = kMissing;
      continue;
    }
    out.median[i] = sample_quantile(col, 0.5);
    out.q1[i] = sample_quantile(col, 0.25);
    out.q3[i] = sample_quantile(col, 0.75);
  }
  return out;
}

}  // namespace qdpt
