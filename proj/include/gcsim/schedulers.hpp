#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "gcsim/predictor.hpp"
#include "gcsim/trace.hpp"

namespace gcsim {

enum class PolicyKind { Fifo, Sjf, Srtf, Qssf };

const char* policy_name(PolicyKind kind);
std::optional<PolicyKind> parse_policy(std::string_view name);

struct PolicyConfig {
  PolicyKind kind = PolicyKind::Fifo;
  double lambda = 0.5;        // merging coefficient, P = N(lambda*P_R + (1-lambda)*P_M)
  bool qssf_oracle = false;   // perfect predictor: P_R = P_M = true duration
  double noise_sigma = 0.0;   // >0: rank by true GPU time with multiplicative
                              // log-normal noise (trace lacks names, e.g. Philly)
  uint64_t noise_seed = 1;
};

// Lower priority value schedules sooner; ties break on (submit_time, job_id).
double fifo_priority(const JobRecord& job);
double sjf_priority(const JobRecord& job);

// Remaining GPU seconds of work given accumulated service.
int64_t srtf_remaining(int64_t duration, int64_t service_done);

// Alg.-style merged priority: needs the job's name-cluster id in the caller's
// working index so history lookups and the ML feature agree.
double qssf_priority(const JobRecord& job, const HistoryStore& history, int cluster_id,
                     const DurationPredictor* predictor, const PolicyConfig& config,
                     int64_t now);

}  // namespace gcsim
