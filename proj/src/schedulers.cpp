#include "gcsim/schedulers.hpp"

#include <cmath>

namespace gcsim {

const char* policy_name(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::Fifo: return "fifo";
    case PolicyKind::Sjf: return "sjf";
    case PolicyKind::Srtf: return "srtf";
    case PolicyKind::Qssf: return "qssf";
  }
  return "fifo";
}

std::optional<PolicyKind> parse_policy(std::string_view name) {
  std::string n = to_lower(name);
  if (n == "fifo") return PolicyKind::Fifo;
  if (n == "sjf") return PolicyKind::Sjf;
  if (n == "srtf") return PolicyKind::Srtf;
  if (n == "qssf") return PolicyKind::Qssf;
  return std::nullopt;
}

double fifo_priority(const JobRecord& job) {
  return static_cast<double>(job.submit_time);
}

double sjf_priority(const JobRecord& job) {
  return static_cast<double>(job.duration);
}

int64_t srtf_remaining(int64_t duration, int64_t service_done) {
  GCSIM_CHECK(service_done >= 0 && service_done <= duration, "service outside [0, duration]");
  return duration - service_done;
}

namespace {

uint64_t fnv1a(std::string_view s) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

double qssf_priority(const JobRecord& job, const HistoryStore& history, int cluster_id,
                     const DurationPredictor* predictor, const PolicyConfig& config,
                     int64_t now) {
  const double n = static_cast<double>(job.gpu_num);
  if (config.noise_sigma > 0.0) {
    // Philly mode: no usable names, rank by noisy oracle GPU time. The noise
    // draw is keyed on the job id so it is order-independent.
    Rng rng(config.noise_seed ^ fnv1a(job.job_id));
    double noisy = std::max<double>(1.0, static_cast<double>(job.duration)) *
                   std::exp(config.noise_sigma * rng.normal());
    return n * noisy;
  }
  double p_r, p_m;
  if (config.qssf_oracle) {
    p_r = p_m = static_cast<double>(job.duration);
  } else {
    GCSIM_CHECK(predictor != nullptr, "qssf needs a trained predictor or oracle mode");
    p_r = history.rolling_estimate(job, cluster_id, now, predictor->config().rolling);
    p_m = predictor->predict_ml(job, cluster_id);
    if (!std::isfinite(p_m)) p_m = p_r;  // fall back to the rolling estimate
  }
  return n * (config.lambda * p_r + (1.0 - config.lambda) * p_m);
}

}  // namespace gcsim
