#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "gcsim/trace.hpp"

namespace gcsim {

// Mean busy GPUs within each minute for a set of (start, end, gpus) segments.
struct BusySeries {
  int64_t start_minute = 0;  // epoch seconds, minute-aligned
  std::vector<double> busy;
};
BusySeries minute_busy_series(const std::vector<std::tuple<int64_t, int64_t, int>>& segments);

struct CDFSeries {
  std::vector<std::pair<double, double>> points;  // (value, cumulative fraction)
  size_t count = 0;
  double mean = 0.0;
  double median = 0.0;
};

struct UtilizationTimeline {
  int64_t start_minute = 0;
  int total_gpus = 0;
  std::vector<double> fraction;           // per minute, in [0,1]
  std::vector<double> hourly;             // mean fraction per hour of day (24)
  std::vector<std::pair<std::string, double>> daily;  // (date, mean fraction)
};

struct DemandBucket {
  int gpu_num = 0;
  size_t jobs = 0;
  double count_share = 0.0;
  double gpu_time = 0.0;
  double gpu_time_share = 0.0;
};

struct StatusRow {
  std::string group;  // "cpu", "gpu", or "gpu_<2^k>"
  size_t total = 0;
  double completed = 0.0;
  double canceled = 0.0;
  double failed = 0.0;
};

struct UserStats {
  std::string user;
  size_t jobs = 0;
  size_t gpu_jobs = 0;
  double gpu_time = 0.0;
  double cpu_time = 0.0;      // CPU jobs only
  double queuing_total = 0.0;
  double completed_ratio = 0.0;
};

UtilizationTimeline utilization_timeline(const std::vector<JobRecord>& jobs,
                                         const ClusterSpec& cluster);
// filter_gpu: true keeps GPU jobs, false keeps CPU jobs. Empty selection is fatal.
CDFSeries duration_cdf(const std::vector<JobRecord>& jobs, bool filter_gpu);
std::vector<DemandBucket> gpu_demand_breakdown(const std::vector<JobRecord>& jobs);
std::vector<StatusRow> status_breakdown(const std::vector<JobRecord>& jobs);
std::vector<UserStats> user_stats(const std::vector<JobRecord>& jobs);

struct AnalyticsSummary {
  size_t total_jobs = 0;
  size_t gpu_jobs = 0;
  size_t cpu_jobs = 0;
  double gpu_mean_duration = 0.0;
  double gpu_median_duration = 0.0;
  double cpu_mean_duration = 0.0;
  double cpu_median_duration = 0.0;
  double avg_gpu_num = 0.0;  // over GPU jobs
  double unsuccessful_gpu_share = 0.0;
  double unsuccessful_cpu_share = 0.0;
  double single_gpu_count_share = 0.0;
  double single_gpu_time_share = 0.0;
  double top5pct_user_gpu_time_share = 0.0;
  double top5pct_user_cpu_time_share = 0.0;
};

AnalyticsSummary analytics_summary(const std::vector<JobRecord>& jobs);
std::string analytics_summary_to_json(const AnalyticsSummary& s);

// Emits utilization.csv, cdf_duration_{gpu,cpu}.csv, demand_breakdown.csv,
// status.csv, users.csv, summary.json (+ SVG charts when requested) into
// outdir, and returns the summary JSON.
std::string write_analytics_report(const std::vector<JobRecord>& jobs,
                                   const ClusterSpec& cluster, const std::string& outdir,
                                   bool svg);

}  // namespace gcsim
