#pragma once

#include "qdpt/harness/registry.hpp"
#include "qdpt/harness/report.hpp"

#include <openssl/evp.h>

#include <atomic>
#include <chrono>
#include <ctime>
#include <fstream>
#include <functional>
#include <mutex>
#include <thread>

#ifndef QDPT_VERSION
#define QDPT_VERSION "unknown"
#endif

namespace qdpt::harness {

namespace fs = std::filesystem;

inline std::string sha256_hex(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 16];
  while (is.read(buf, sizeof buf) || is.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(is.gcount()));
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::string hex;
  char byte[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(byte, sizeof byte, "%02x", md[i]);
    hex += byte;
  }
  return hex;
}

inline std::string log_file_name(std::string_view method, std::string_view space, std::uint64_t seed) {
  return std::string(method) + "__" + std::string(space) + "__seed" + std::to_string(seed) + ".csv";
}

struct CampaignJob {
  std::string method;
  std::uint64_t seed = 0;
  BehaviorSpace space;
};

struct CampaignRecord {
  CampaignJob job;
  std::string log;  // relative to the artifact directory
  double wall_seconds = 0.0;
  std::string status = "skipped";  // ok | failed | skipped
  std::string error;
};

struct RunOptions {
  bool force = false;
  std::optional<int> workers;
  /// Called from worker threads, serialized by the runner.
  std::function<void(const std::string&)> progress;
};

struct RunSummary {
  fs::path dir;
  bool complete = false;
  std::vector<CampaignRecord> campaigns;
  std::string policy;
};

/// Space-major, then method, then seed.
inline std::vector<CampaignJob> plan_campaigns(const ExperimentSpec& s, const std::vector<BehaviorSpace>& spaces) {
  std::vector<CampaignJob> jobs;
  for (const auto& space : spaces) {
    for (const auto& m : s.methods) {
      for (auto seed : s.seeds) jobs.push_back({m, seed, space});
    }
  }
  return jobs;
}

inline std::string timestamp(const char* fmt) {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[64];
  std::strftime(buf, sizeof buf, fmt, &tm);
  return buf;
}

/// A directory that already holds a manifest is never written into unless
/// `force`; the run goes to a fresh timestamped subdirectory instead.
inline fs::path choose_output_dir(const fs::path& base, bool force) {
  if (!fs::exists(base / "manifest.json")) return base;
  if (force) {
    for (const char* sub : {"logs", "metrics", "policy"}) fs::remove_all(base / sub);
    for (const char* f : {"manifest.json", "plot_manifest.json", "comparison.csv"}) fs::remove(base / f);
    return base;
  }
  const std::string stem = "run-" + timestamp("%Y%m%dT%H%M%SZ");
  fs::path dir = base / stem;
  for (int n = 2; fs::exists(dir); ++n) dir = base / (stem + "-" + std::to_string(n));
  return dir;
}

inline void write_text_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  body(os);
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

inline std::vector<CampaignRecord> execute_campaigns(const std::vector<CampaignJob>& jobs, const ExperimentSpec& s,
                                                     const Mdp& mdp, const Policy& policy, const fs::path& dir,
                                                     const RunOptions& opts) {
  std::vector<CampaignRecord> records(jobs.size());
  for (std::size_t i = 0; i < jobs.size(); ++i) records[i].job = jobs[i];
  const CampaignConfig config = s.resolved_campaign();
  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  std::mutex progress_mutex;

  auto worker = [&] {
    for (;;) {
      if (abort) return;
      const std::size_t i = next++;
      if (i >= jobs.size()) return;
      const CampaignJob& job = jobs[i];
      CampaignRecord& rec = records[i];
      const auto t0 = std::chrono::steady_clock::now();
      try {
        CampaignRng rng = derive_campaign_rng(s.master_seed, job.method, job.seed, job.space.name);
        CampaignLog log = run_method(job.method, mdp, policy, job.space, config, rng);
        log.seed = job.seed;
        rec.log = (fs::path("logs") / log_file_name(job.method, job.space.name, job.seed)).generic_string();
        write_text_file(dir / rec.log, [&](std::ostream& os) { write_log_csv(os, log); });
        rec.status = "ok";
      } catch (const std::exception& e) {
        rec.status = "failed";
        rec.error = e.what();
        abort = true;
      }
      rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      if (opts.progress) {
        std::lock_guard lock(progress_mutex);
        char buf[64];
        std::snprintf(buf, sizeof buf, " (%.2fs)", rec.wall_seconds);
        opts.progress(rec.status + " " + job.method + " " + job.space.name + " seed " + std::to_string(job.seed) + buf);
      }
    }
  };

  const int workers = std::max(1, opts.workers.value_or(s.workers));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return records;
}

/// Reads every log of one behavior space back from disk, grouped by method.
inline std::vector<MethodLogs> load_space_logs(const fs::path& dir, const ExperimentSpec& s, const std::string& space) {
  std::vector<MethodLogs> out;
  for (const auto& m : s.methods) {
    MethodLogs ml{m, {}};
    for (auto seed : s.seeds) {
      const fs::path path = dir / "logs" / log_file_name(m, space, seed);
      std::ifstream is(path, std::ios::binary);
      if (!is) throw std::runtime_error("missing campaign log " + path.string());
      CampaignLog log = read_log_csv(is, s.environment, space);
      if (log.method.empty()) log.method = m;
      ml.logs.push_back(std::move(log));
    }
    out.push_back(std::move(ml));
  }
  return out;
}

/// Writes metrics/<space>/<metric>.csv and plot_manifest.json; returns the
/// end-of-budget comparison rows.
inline std::vector<ComparisonRow> write_metrics(const fs::path& dir, const ExperimentSpec& s,
                                                const std::vector<BehaviorSpace>& spaces) {
  std::vector<ComparisonRow> rows;
  Json plot = Json::array();
  for (const auto& space : spaces) {
    const MetricTables tables =
        compute_metric_tables(load_space_logs(dir, s, space.name), space, s.campaign.grid_resolution);
    for (const auto& metric : kMetricNames) {
      const fs::path rel = fs::path("metrics") / space.name / (metric + ".csv");
      write_text_file(dir / rel, [&](std::ostream& os) { write_metric_csv(os, tables.at(metric)); });
      plot.push_back({{"file", rel.generic_string()},
                      {"environment", s.environment},
                      {"behavior_space", space.name},
                      {"metric", metric},
                      {"x", "index"},
                      {"y", {"median", "q1", "q3"}},
                      {"y_relative", {"rel_median", "rel_q1", "rel_q3"}},
                      {"group_by", "method"}});
    }
    auto r = comparison_rows(space.name, tables);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  write_text_file(dir / "plot_manifest.json", [&](std::ostream& os) { os << plot.dump(2) << '\n'; });
  return rows;
}

inline Json file_digests(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const fs::path rel = fs::relative(e.path(), dir);
    if (rel == "manifest.json") continue;
    // Nested timestamped reruns carry their own manifests.
    if (rel.begin()->string().rfind("run-", 0) == 0) continue;
    files.push_back(rel);
  }
  std::sort(files.begin(), files.end());
  Json out = Json::array();
  for (const auto& rel : files) {
    out.push_back({{"path", rel.generic_string()},
                   {"sha256", sha256_hex(dir / rel)},
                   {"bytes", fs::file_size(dir / rel)}});
  }
  return out;
}

inline Json campaigns_json(const std::vector<CampaignRecord>& records) {
  Json out = Json::array();
  for (const auto& r : records) {
    Json c{{"method", r.job.method},
           {"seed", r.job.seed},
           {"behavior_space", r.job.space.name},
           {"status", r.status},
           {"log", r.log},
           {"wall_seconds", r.wall_seconds}};
    if (!r.error.empty()) c["error"] = r.error;
    out.push_back(std::move(c));
  }
  return out;
}

inline void write_manifest(const fs::path& dir, const std::string& kind, const ExperimentSpec& resolved,
                           const std::string& policy, const Json& campaigns, bool complete) {
  Json m{{"format", "qdpt-manifest v1"},
         {"kind", kind},
         {"code_version", QDPT_VERSION},
         {"created", timestamp("%Y-%m-%dT%H:%M:%SZ")},
         {"complete", complete},
         {"policy", policy},
         {"config", to_json(resolved)},
         {"campaigns", campaigns},
         {"files", file_digests(dir)}};
  write_text_file(dir / "manifest.json", [&](std::ostream& os) { os << m.dump(2) << '\n'; });
}

namespace detail {

inline RunSummary run_grid(ExperimentSpec s, const RunOptions& opts, const std::string& kind) {
  validate_spec(s);
  const auto mdp = make_environment(s);
  const auto spaces = resolve_spaces(s, *mdp);
  // Echo resolved defaults so the manifest is unambiguous.
  s.behavior_spaces.clear();
  for (const auto& sp : spaces) s.behavior_spaces.push_back(sp.name);
  s.novelty_threshold = s.resolved_campaign().ns_threshold;
  if (opts.workers) s.workers = *opts.workers;

  RunSummary summary;
  summary.dir = choose_output_dir(s.output_dir, opts.force);
  fs::create_directories(summary.dir);

  PolicyHandle policy;
  try {
    policy = make_policy(s, *mdp);
  } catch (const TrainingFailure& e) {
    write_manifest(summary.dir, kind, s, e.what(), Json::array(), false);
    throw CampaignFailure(std::string("policy training failed: ") + e.what());
  }
  summary.policy = policy.description;
  if (policy.qtable) {
    write_text_file(summary.dir / "policy" / "taxi_qtable.txt", [&](std::ostream& os) { taxi::save_qtable(os, *policy.qtable); });
  }

  summary.campaigns = execute_campaigns(plan_campaigns(s, spaces), s, *mdp, *policy.policy, summary.dir, opts);
  summary.complete = std::all_of(summary.campaigns.begin(), summary.campaigns.end(),
                                 [](const CampaignRecord& r) { return r.status == "ok"; });
  if (summary.complete) {
    const auto rows = write_metrics(summary.dir, s, spaces);
    if (kind == "rq3-sweep") {
      write_text_file(summary.dir / "comparison.csv", [&](std::ostream& os) { write_comparison_csv(os, rows); });
    }
  }
  write_manifest(summary.dir, kind, s, policy.description, campaigns_json(summary.campaigns), summary.complete);
  if (!summary.complete) {
    std::string what = "campaign failure";
    for (const auto& r : summary.campaigns) {
      if (r.status == "failed") {
        what = r.job.method + " " + r.job.space.name + " seed " + std::to_string(r.job.seed) + ": " + r.error;
        break;
      }
    }
    throw CampaignFailure(what + " (partial results in " + summary.dir.string() + ")");
  }
  return summary;
}

}  // namespace detail

/// Runs every (behavior space, method, seed) campaign of the config and writes
/// logs, metrics and the manifest.
inline RunSummary run_experiment(const ExperimentSpec& spec, const RunOptions& opts = {}) {
  return detail::run_grid(spec, opts, "experiment");
}

/// The Walker behavior-space sweep; all four descriptor pairs unless the config
/// names a subset. Adds comparison.csv.
inline RunSummary rq3_sweep(ExperimentSpec spec, const RunOptions& opts = {}) {
  if (spec.environment != "walker") throw ConfigError("rq3-sweep requires environment walker");
  if (spec.behavior_spaces.empty()) {
    for (const auto& [a, b] : walker::kDescriptorPairs) spec.behavior_spaces.push_back(std::string(a) + "+" + b);
  }
  return detail::run_grid(spec, opts, "rq3-sweep");
}

/// Recomputes metrics (and the comparison table for sweeps) from the logs of
/// an existing artifact directory, then refreshes the manifest digests.
inline void report(const fs::path& dir) {
  const fs::path mpath = dir / "manifest.json";
  if (!fs::exists(mpath)) throw ConfigError("no manifest.json in " + dir.string());
  Json manifest = read_json_file(mpath);
  const ExperimentSpec s = spec_from_json(manifest.at("config"));
  validate_spec(s);
  const auto mdp = make_environment(s);
  const auto spaces = resolve_spaces(s, *mdp);
  const auto rows = write_metrics(dir, s, spaces);
  const std::string kind = manifest.value("kind", "experiment");
  if (kind == "rq3-sweep") {
    write_text_file(dir / "comparison.csv", [&](std::ostream& os) { write_comparison_csv(os, rows); });
  }
  manifest["files"] = file_digests(dir);
  write_text_file(mpath, [&](std::ostream& os) { os << manifest.dump(2) << '\n'; });
}

}  // namespace qdpt::harness
