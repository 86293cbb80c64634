#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "gcsim/common.hpp"

namespace gcsim {

enum class JobStatus { Completed, Canceled, Failed };

const char* status_name(JobStatus s);                       // canonical spelling
std::optional<JobStatus> parse_status(std::string_view s);  // accepts slurm variants

struct JobRecord {
  std::string job_id;
  std::string user;
  std::string vc;
  std::string job_name;  // free text, may be empty
  int gpu_num = 0;
  int cpu_num = 0;
  int64_t submit_time = 0;
  std::optional<int64_t> start_time;
  std::optional<int64_t> end_time;
  int64_t duration = 0;  // service time in seconds
  JobStatus status = JobStatus::Completed;

  bool is_gpu() const { return gpu_num >= 1; }
};

struct RejectedRow {
  size_t line = 0;
  std::string reason;
  std::string row;
};

struct ParsedTrace {
  std::vector<JobRecord> jobs;
  std::vector<RejectedRow> rejects;
};

// Canonical job CSV:
//   job_id,user,vc,job_name,gpu_num,cpu_num,status,submit_time,start_time,end_time,duration
// Rows violating the record invariants land in `rejects` with a reason; a bad
// header is fatal.
ParsedTrace parse_job_log(std::istream& in);
void write_job_log(std::ostream& out, const std::vector<JobRecord>& jobs);
std::string serialize_job_row(const JobRecord& job);

// Adapters for released trace layouts; header-name driven (see README).
ParsedTrace parse_helios_log(std::istream& in);
ParsedTrace parse_philly_log(std::istream& in, bool merge_attempts);
ParsedTrace parse_trace_file(const std::string& path, const std::string& format);

// ---- VC configuration ----------------------------------------------------

struct VCConfig {
  std::string vc;
  int node_count = 0;
  int64_t effective_from = 0;
};

struct VCTimeline {
  std::string vc;
  std::vector<VCConfig> segments;  // sorted by effective_from, non-overlapping
  // Node count in force at time t (0 before the first segment).
  int node_count_at(int64_t t) const;
};

// CSV header: effective_from,vc,node_count. Duplicate (vc, effective_from)
// pairs are overlapping intervals and fatal.
std::vector<VCTimeline> parse_vc_config(std::istream& in);

// HeliosData-style wide table: date,<vc1>,<vc2>,... with per-VC GPU counts.
std::vector<VCTimeline> parse_helios_vc_table(std::istream& in, int gpus_per_node);

struct ClusterSpec {
  std::string name;
  int nodes = 0;
  int gpus_per_node = 0;
  std::vector<VCConfig> vcs;

  std::vector<VCTimeline> timelines() const;
  // VC -> node count in force at time t.
  std::map<std::string, int> vc_snapshot(int64_t t) const;
  int total_gpus() const { return nodes * gpus_per_node; }
};

ClusterSpec parse_cluster_json(const std::string& text);
ClusterSpec load_cluster_file(const std::string& path);
std::string cluster_to_json(const ClusterSpec& spec);

// ---- validation -----------------------------------------------------------

struct ValidationReport {
  size_t total = 0;
  size_t gpu_jobs = 0;
  size_t cpu_jobs = 0;
  size_t completed = 0;
  size_t canceled = 0;
  size_t failed = 0;
  size_t missing_times = 0;            // no recorded start/end
  size_t demand_exceeds_cluster = 0;   // gpu_num > cluster capacity
  std::vector<std::string> flags;      // human-readable notes, capped
};

ValidationReport validate_trace(const std::vector<JobRecord>& jobs, const ClusterSpec& cluster);
std::string validation_to_json(const ValidationReport& report);

// ---- synthesis ------------------------------------------------------------

struct SynthParams {
  size_t job_count = 1000;
  uint64_t seed = 1;
  int64_t start_epoch = 1585699200;  // 2020-04-01
  int64_t span_seconds = 86400 * 7;
  std::vector<double> hourly_weights = std::vector<double>(24, 1.0);
  // (gpu count, probability); gpu 0 emits CPU jobs
  std::vector<std::pair<int, double>> gpu_probs = {{1, 0.6}, {2, 0.15}, {4, 0.1}, {8, 0.1}, {16, 0.05}};
  double dur_log_mean = 5.3;  // ~200 s median
  double dur_log_sigma = 1.5;
  size_t user_count = 20;
  std::vector<std::string> name_templates = {"train_model_", "eval_model_", "preprocess_"};
  size_t name_variants = 4;  // per template
  std::vector<std::string> vcs = {"vc0"};
  double completed_weight = 0.65;
  double canceled_weight = 0.25;
  double failed_weight = 0.10;
  double queue_log_mean = 2.0;  // synthetic recorded queuing delay
  double queue_log_sigma = 1.0;
  double missing_time_frac = 0.0;  // fraction of rows without start/end
};

SynthParams synth_params_from_json(const std::string& text);
std::vector<JobRecord> synth_trace(const SynthParams& params);

}  // namespace gcsim
