#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "gcsim/schedulers.hpp"
#include "gcsim/trace.hpp"

namespace gcsim {

struct SimOptions {
  PolicyConfig policy;
  const DurationPredictor* predictor = nullptr;  // required for qssf unless oracle/noise
  bool include_cpu_jobs = false;                 // GPU jobs only by default
  int64_t queue_threshold = 0;                   // "queued" means delay > threshold
  int64_t replay_from = std::numeric_limits<int64_t>::min();  // submit window
  int64_t replay_to = std::numeric_limits<int64_t>::max();
  int64_t vc_snapshot_time = -1;  // VC config instant; default first replayed submit
};

struct RunSegment {
  int64_t start = 0;
  int64_t end = 0;
};

struct JobOutcome {
  std::string job_id;
  std::string vc;
  std::string user;
  int gpu_num = 0;
  int64_t submit = 0;
  int64_t start = 0;  // first time on GPUs
  int64_t end = 0;    // final completion
  int64_t duration = 0;
  double priority = 0.0;
  std::vector<RunSegment> segments;               // >1 only under preemption
  std::vector<std::pair<int, int>> placement;     // (node id, gpus) of last start
};

struct UnschedulableJob {
  std::string job_id;
  std::string reason;
};

struct SimResult {
  std::string cluster_name;
  PolicyKind policy = PolicyKind::Fifo;
  int total_gpus = 0;
  int gpus_per_node = 0;
  int64_t vc_snapshot_time = 0;
  std::map<std::string, int> vc_nodes;
  std::vector<JobOutcome> outcomes;        // replayed jobs, input order
  std::vector<UnschedulableJob> unschedulable;

  std::string to_csv() const;  // job_id,submit,start,end,gpu_num,vc
};

struct VCMetrics {
  size_t jobs = 0;
  size_t queued_jobs = 0;
  double avg_jct = 0.0;
  double avg_queuing = 0.0;
  double avg_duration = 0.0;
};

struct MetricsSummary {
  VCMetrics cluster;
  std::map<std::string, VCMetrics> per_vc;
  int64_t queue_threshold = 0;
  int total_gpus = 0;
  int64_t util_start = 0;             // first minute boundary
  std::vector<double> busy_gpus;      // mean busy GPUs within each minute
};

// Consolidated best-fit placement. Jobs no larger than a node take the node
// with the smallest sufficient free count; larger jobs take floor(g/n) fully
// free nodes plus a best-fit node for the remainder. Empty result = blocked
// (except gpu_num = 0, which is an empty placement that always succeeds).
std::vector<std::pair<int, int>> consolidate_allocate(int gpu_num,
                                                      const std::vector<int>& free_gpus,
                                                      int gpus_per_node);

SimResult run_simulation(const std::vector<JobRecord>& jobs, const ClusterSpec& cluster,
                         const SimOptions& options);

MetricsSummary compute_metrics(const SimResult& result, int64_t queue_threshold);

std::string metrics_to_json(const SimResult& result, const MetricsSummary& metrics);
std::string utilization_to_csv(const MetricsSummary& metrics);

}  // namespace gcsim
