#pragma once

#include "qdpt/core/errors.hpp"
#include "qdpt/core/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

namespace qdpt {

struct GmmComponent {
  double weight = 1.0;
  std::vector<double> mean;
  std::vector<double> variance;  // diagonal
};

struct GmmModel {
  std::size_t dim = 0;
  std::vector<GmmComponent> components;

  std::size_t size() const { return components.size(); }
};

struct GmmFit {
  GmmModel model;
  /// Total data log-likelihood of the seeded model, then after every EM step.
  std::vector<double> loglik_history;
};

namespace detail {

inline double log_gaussian_diag(std::span<const double> x, const GmmComponent& c) {
  double s = 0.0;
  for (std::size_t d = 0; d < x.size(); ++d) {
    const double diff = x[d] - c.mean[d];
    s += std::log(2.0 * std::numbers::pi * c.variance[d]) + diff * diff / c.variance[d];
  }
  return -0.5 * s;
}

inline double log_sum_exp(std::span<const double> v) {
  const double m = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace detail

/// log Σ_k w_k N(x; μ_k, diag σ²_k), stabilized by log-sum-exp.
inline double gmm_loglik(const GmmModel& model, std::span<const double> x) {
  if (x.size() != model.dim) throw RejectedInputError("gmm: feature dimension mismatch");
  std::vector<double> terms(model.size());
  for (std::size_t k = 0; k < model.size(); ++k) {
    terms[k] = std::log(model.components[k].weight) + detail::log_gaussian_diag(x, model.components[k]);
  }
  return detail::log_sum_exp(terms);
}

inline double gmm_total_loglik(const GmmModel& model, const std::vector<std::vector<double>>& data) {
  double s = 0.0;
  for (const auto& x : data) s += gmm_loglik(model, x);
  return s;
}

/// k-means++ seeding: the first center is uniform, each later one is drawn
/// with probability proportional to squared distance from the nearest center.
/// Seeding stops early once every point coincides with a center.
inline std::vector<std::size_t> kmeans_pp_seeds(const std::vector<std::vector<double>>& data, int k, Rng& rng) {
  std::vector<std::size_t> seeds{uniform_index(rng, data.size())};
  std::vector<double> d2(data.size(), std::numeric_limits<double>::infinity());
  while (seeds.size() < static_cast<std::size_t>(k)) {
    const auto& c = data[seeds.back()];
    double total = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      double s = 0.0;
      for (std::size_t d = 0; d < c.size(); ++d) s += (data[i][d] - c[d]) * (data[i][d] - c[d]);
      d2[i] = std::min(d2[i], s);
      total += d2[i];
    }
    if (!(total > 0.0)) break;
    double u = uniform_real(rng, 0.0, total);
    std::size_t pick = data.size() - 1;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (u < d2[i]) {
        pick = i;
        break;
      }
      u -= d2[i];
    }
    while (d2[pick] == 0.0) pick = (pick + data.size() - 1) % data.size();  // guard against rounding onto a center
    seeds.push_back(pick);
  }
  return seeds;
}

/// Diagonal-covariance EM. Variances are floored at `variance_floor`;
/// components whose responsibility mass vanishes are dropped.
inline GmmFit gmm_fit(const std::vector<std::vector<double>>& data, int components, int iterations, Rng& rng,
                      double variance_floor = 1e-6) {
  if (components <= 0) throw ParameterError("gmm: component count must be positive");
  if (iterations < 0) throw ParameterError("gmm: iteration count must be non-negative");
  if (data.size() < static_cast<std::size_t>(components)) throw InsufficientDataError("gmm: fewer points than components");
  const std::size_t dim = data.front().size();
  for (const auto& x : data) {
    if (x.size() != dim) throw RejectedInputError("gmm: ragged feature vectors");
    for (double v : x) {
      if (!std::isfinite(v)) throw RejectedInputError("gmm: non-finite feature");
    }
  }
  const double n = double(data.size());

  std::vector<double> mean(dim, 0.0);
  std::vector<double> var(dim, 0.0);
  for (const auto& x : data) {
    for (std::size_t d = 0; d < dim; ++d) mean[d] += x[d] / n;
  }
  for (const auto& x : data) {
    for (std::size_t d = 0; d < dim; ++d) var[d] += (x[d] - mean[d]) * (x[d] - mean[d]) / n;
  }
  for (double& v : var) v = std::max(v, variance_floor);

  GmmFit fit;
  fit.model.dim = dim;
  const auto seeds = kmeans_pp_seeds(data, components, rng);
  for (std::size_t s : seeds) fit.model.components.push_back({1.0 / double(seeds.size()), data[s], var});
  fit.loglik_history.push_back(gmm_total_loglik(fit.model, data));

  std::vector<std::vector<double>> resp(data.size());
  std::vector<double> terms;
  for (int it = 0; it < iterations; ++it) {
    auto& comps = fit.model.components;
    const std::size_t k_count = comps.size();
    // E-step.
    for (std::size_t i = 0; i < data.size(); ++i) {
      terms.assign(k_count, 0.0);
      for (std::size_t k = 0; k < k_count; ++k) terms[k] = std::log(comps[k].weight) + detail::log_gaussian_diag(data[i], comps[k]);
      const double lse = detail::log_sum_exp(terms);
      resp[i].resize(k_count);
      for (std::size_t k = 0; k < k_count; ++k) resp[i][k] = std::exp(terms[k] - lse);
    }
    // M-step.
    std::vector<GmmComponent> next;
    for (std::size_t k = 0; k < k_count; ++k) {
      double nk = 0.0;
      for (std::size_t i = 0; i < data.size(); ++i) nk += resp[i][k];
      if (!(nk > 1e-12 * n)) continue;
      GmmComponent c{nk / n, std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0)};
      for (std::size_t i = 0; i < data.size(); ++i) {
        for (std::size_t d = 0; d < dim; ++d) c.mean[d] += resp[i][k] * data[i][d];
      }
      for (double& m : c.mean) m /= nk;
      for (std::size_t i = 0; i < data.size(); ++i) {
        for (std::size_t d = 0; d < dim; ++d) {
          const double diff = data[i][d] - c.mean[d];
          c.variance[d] += resp[i][k] * diff * diff;
        }
      }
      for (double& v : c.variance) v = std::max(v / nk, variance_floor);
      next.push_back(std::move(c));
    }
    double wsum = 0.0;
    for (const auto& c : next) wsum += c.weight;
    for (auto& c : next) c.weight /= wsum;
    comps = std::move(next);
    fit.loglik_history.push_back(gmm_total_loglik(fit.model, data));
  }
  return fit;
}

}  // namespace qdpt
