#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "gcsim/gbdt.hpp"
#include "gcsim/name_cluster.hpp"
#include "gcsim/trace.hpp"

namespace gcsim {

struct RollingConfig {
  double gamma = 0.8;          // recency decay for the name-matched mean
  double tau = 0.3;            // name similarity threshold
  double default_prior = 600.0;  // seconds, used when history is empty
  bool use_median = false;     // alternative Distribution aggregator
};

// Append-only store of finished jobs with per-user / per-(user, name-cluster)
// / per-gpu indexes. Every query takes a cutoff: records whose end_time
// exceeds it are invisible, so replay code cannot read the future.
class HistoryStore {
 public:
  // Jobs without an end_time never enter the store. cluster_ids must align
  // with `jobs` (pass -1 for unnamed jobs).
  void build(const std::vector<JobRecord>& jobs, const std::vector<int>& cluster_ids);

  bool user_known(const std::string& user, int64_t cutoff) const;
  size_t size() const { return end_times_.size(); }

  // Alg. 1 rolling estimate, case selection included.
  double rolling_estimate(const JobRecord& job, int cluster_id, int64_t cutoff,
                          const RollingConfig& config) const;

 private:
  struct Series {
    std::vector<int64_t> end;      // sorted ascending
    std::vector<double> duration;  // aligned with end
    std::vector<double> prefix;    // prefix sums of duration

    size_t visible(int64_t cutoff) const;
    double mean(int64_t cutoff) const;  // NaN when empty
    double median(int64_t cutoff) const;
    double decayed_mean(int64_t cutoff, double gamma) const;  // most recent first
  };

  double aggregate(const Series& s, int64_t cutoff, const RollingConfig& config) const;

  std::vector<int64_t> end_times_;
  Series global_;
  std::map<int, Series> by_gpu_;
  std::unordered_map<std::string, Series> by_user_;
  std::map<std::pair<std::string, int>, Series> by_user_gpu_;
  std::map<std::pair<std::string, int>, Series> by_user_cluster_;
  std::map<std::tuple<std::string, int, int>, Series> by_user_cluster_gpu_;
};

// ---- feature encoding ------------------------------------------------------

inline constexpr size_t kJobFeatureCount = 9;
inline constexpr double kUnknownCode = 0.0;

struct CategoryEncoder {
  std::unordered_map<std::string, int> codes;  // 1-based; 0 reserved for unknown

  int fit(const std::string& value);           // insert-or-get
  double encode(const std::string& value) const;
};

// [user, vc, name_cluster, gpu_num, cpu_num, month, day_of_week, hour, minute]
std::vector<double> encode_job_features(const JobRecord& job, const CategoryEncoder& users,
                                        const CategoryEncoder& vcs, int cluster_id,
                                        int known_cluster_count);

// ---- predictor bundle ------------------------------------------------------

struct PredictorConfig {
  GBDTConfig gbdt;
  RollingConfig rolling;
  bool log_target = true;        // train on log1p(duration)
  int64_t update_window = 86400 * 30;
  int update_rounds = 20;
};

struct PredictorValidation {
  size_t train_rows = 0;
  size_t val_rows = 0;
  double rmse_seconds = 0.0;
  double smape_pct = 0.0;
  double rmse_log = 0.0;
  double residual_log_sigma = 0.0;
};

// The Model Update Engine bundle: encoders + name clusters + GBDT, trained on
// jobs that finished before a cutoff and periodically fine-tuned.
class DurationPredictor {
 public:
  static DurationPredictor train(const std::vector<JobRecord>& jobs, int64_t cutoff,
                                 const PredictorConfig& config);

  // P_M in seconds, clamped to >= 1. cluster_id as assigned by the caller's
  // working NameClusterIndex (codes past the trained count encode as unknown).
  double predict_ml(const JobRecord& job, int cluster_id) const;

  // Fine-tune: appends update_rounds boosting rounds fit on jobs that ended
  // inside (now - update_window, now]. Empty batches are no-ops.
  void update(const std::vector<JobRecord>& completed, int64_t now);

  PredictorValidation validate(const std::vector<JobRecord>& eval_jobs) const;

  std::string to_json() const;
  static DurationPredictor from_json(const std::string& text);

  const PredictorConfig& config() const { return config_; }
  int64_t train_cutoff() const { return cutoff_; }
  const NameClusterIndex& clusters() const { return clusters_; }
  int trained_cluster_count() const { return trained_cluster_count_; }
  size_t rounds() const { return model_.trees.size(); }

 private:
  DurationPredictor() : clusters_(0.3) {}

  double target_of(const JobRecord& job) const;
  std::vector<double> features_of(const JobRecord& job, int cluster_id) const;

  PredictorConfig config_;
  int64_t cutoff_ = 0;
  CategoryEncoder users_;
  CategoryEncoder vcs_;
  NameClusterIndex clusters_;
  int trained_cluster_count_ = 0;
  GBDTModel model_;
};

std::string predictor_validation_to_json(const PredictorValidation& v);

}  // namespace gcsim
