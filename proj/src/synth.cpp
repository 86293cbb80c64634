#include <algorithm>
#include <cmath>
#include <numeric>

#include "gcsim/trace.hpp"
#include "json.hpp"

namespace gcsim {

using nlohmann::json;

SynthParams synth_params_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text.empty() ? "{}" : text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("synth params: ") + e.what());
  }
  SynthParams p;
  p.job_count = doc.value("job_count", p.job_count);
  p.seed = doc.value("seed", p.seed);
  if (doc.contains("start_epoch")) {
    if (doc["start_epoch"].is_string()) {
      auto t = parse_timestamp(doc["start_epoch"].get<std::string>());
      if (!t) throw ParseError("synth params: bad start_epoch");
      p.start_epoch = *t;
    } else {
      p.start_epoch = doc["start_epoch"].get<int64_t>();
    }
  }
  p.span_seconds = doc.value("span_seconds", p.span_seconds);
  if (doc.contains("hourly_weights"))
    p.hourly_weights = doc["hourly_weights"].get<std::vector<double>>();
  if (doc.contains("gpu_probs")) {
    p.gpu_probs.clear();
    for (auto& [k, v] : doc["gpu_probs"].items())
      p.gpu_probs.emplace_back(std::stoi(k), v.get<double>());
    std::sort(p.gpu_probs.begin(), p.gpu_probs.end());
  }
  p.dur_log_mean = doc.value("dur_log_mean", p.dur_log_mean);
  p.dur_log_sigma = doc.value("dur_log_sigma", p.dur_log_sigma);
  p.user_count = doc.value("user_count", p.user_count);
  if (doc.contains("name_templates"))
    p.name_templates = doc["name_templates"].get<std::vector<std::string>>();
  p.name_variants = doc.value("name_variants", p.name_variants);
  if (doc.contains("vcs")) p.vcs = doc["vcs"].get<std::vector<std::string>>();
  p.completed_weight = doc.value("completed_weight", p.completed_weight);
  p.canceled_weight = doc.value("canceled_weight", p.canceled_weight);
  p.failed_weight = doc.value("failed_weight", p.failed_weight);
  p.queue_log_mean = doc.value("queue_log_mean", p.queue_log_mean);
  p.queue_log_sigma = doc.value("queue_log_sigma", p.queue_log_sigma);
  p.missing_time_frac = doc.value("missing_time_frac", p.missing_time_frac);
  return p;
}

std::vector<JobRecord> synth_trace(const SynthParams& p) {
  if (p.hourly_weights.size() != 24) throw InvalidArgError("synth: need 24 hourly weights");
  if (p.gpu_probs.empty()) throw InvalidArgError("synth: empty gpu distribution");
  double gpu_total = 0.0;
  for (const auto& [g, prob] : p.gpu_probs) {
    if (g < 0 || prob < 0.0) throw InvalidArgError("synth: degenerate gpu distribution");
    gpu_total += prob;
  }
  if (std::abs(gpu_total - 1.0) > 1e-6)
    throw InvalidArgError("synth: gpu probabilities must sum to 1");
  if (p.dur_log_sigma < 0.0 || p.queue_log_sigma < 0.0)
    throw InvalidArgError("synth: negative sigma");
  if (p.user_count == 0 || p.vcs.empty() || p.name_templates.empty() || p.name_variants == 0)
    throw InvalidArgError("synth: empty pool");
  double status_total = p.completed_weight + p.canceled_weight + p.failed_weight;
  if (status_total <= 0.0) throw InvalidArgError("synth: degenerate status weights");

  Rng rng(p.seed);
  std::vector<double> gpu_weights;
  gpu_weights.reserve(p.gpu_probs.size());
  for (const auto& [g, prob] : p.gpu_probs) gpu_weights.push_back(prob);
  const std::vector<double> status_weights = {p.completed_weight, p.canceled_weight,
                                              p.failed_weight};
  const int64_t span_days = std::max<int64_t>(1, p.span_seconds / 86400);

  std::vector<JobRecord> jobs;
  jobs.reserve(p.job_count);
  for (size_t i = 0; i < p.job_count; ++i) {
    JobRecord j;
    int64_t day = static_cast<int64_t>(rng.next_below(static_cast<uint64_t>(span_days)));
    int hour = static_cast<int>(rng.pick_weighted(p.hourly_weights));
    j.submit_time = p.start_epoch + day * 86400 + hour * 3600 +
                    static_cast<int64_t>(rng.next_below(3600));
    j.gpu_num = p.gpu_probs[rng.pick_weighted(gpu_weights)].first;
    j.cpu_num = j.gpu_num > 0 ? j.gpu_num * 6 : 1 + static_cast<int>(rng.next_below(8));
    j.duration = std::max<int64_t>(
        1, std::llround(rng.lognormal(p.dur_log_mean, p.dur_log_sigma)));
    size_t u = rng.next_below(p.user_count);
    j.user = "u" + std::to_string(u);
    size_t tmpl = rng.next_below(p.name_templates.size());
    j.job_name = p.name_templates[tmpl] + std::to_string(rng.next_below(p.name_variants));
    j.vc = p.vcs[rng.next_below(p.vcs.size())];
    j.status = static_cast<JobStatus>(rng.pick_weighted(status_weights));
    bool missing = rng.next_double() < p.missing_time_frac;
    int64_t queue_delay =
        std::max<int64_t>(0, std::llround(rng.lognormal(p.queue_log_mean, p.queue_log_sigma)));
    if (!missing) {
      j.start_time = j.submit_time + queue_delay;
      j.end_time = *j.start_time + j.duration;
    }
    jobs.push_back(std::move(j));
  }

  std::stable_sort(jobs.begin(), jobs.end(), [](const JobRecord& a, const JobRecord& b) {
    return a.submit_time < b.submit_time;
  });
  char buf[16];
  for (size_t i = 0; i < jobs.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "j%06zu", i);
    jobs[i].job_id = buf;
  }
  return jobs;
}

}  // namespace gcsim
