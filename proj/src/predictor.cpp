#include "gcsim/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "json.hpp"

namespace gcsim {

using nlohmann::json;

// ---- HistoryStore -----------------------------------------------------------

size_t HistoryStore::Series::visible(int64_t cutoff) const {
  return static_cast<size_t>(std::upper_bound(end.begin(), end.end(), cutoff) - end.begin());
}

double HistoryStore::Series::mean(int64_t cutoff) const {
  size_t n = visible(cutoff);
  if (n == 0) return std::nan("");
  return prefix[n - 1] / static_cast<double>(n);
}

double HistoryStore::Series::median(int64_t cutoff) const {
  size_t n = visible(cutoff);
  if (n == 0) return std::nan("");
  std::vector<double> d(duration.begin(), duration.begin() + n);
  size_t mid = n / 2;
  std::nth_element(d.begin(), d.begin() + mid, d.end());
  if (n % 2 == 1) return d[mid];
  double hi = d[mid];
  std::nth_element(d.begin(), d.begin() + mid - 1, d.end());
  return (d[mid - 1] + hi) / 2.0;
}

double HistoryStore::Series::decayed_mean(int64_t cutoff, double gamma) const {
  size_t n = visible(cutoff);
  if (n == 0) return std::nan("");
  double num = 0.0, den = 0.0, w = 1.0;
  for (size_t i = n; i-- > 0;) {
    num += w * duration[i];
    den += w;
    w *= gamma;
    if (w < den * 1e-15) break;  // remaining tail is below double rounding
  }
  return num / den;
}

void HistoryStore::build(const std::vector<JobRecord>& jobs, const std::vector<int>& cluster_ids) {
  GCSIM_CHECK(cluster_ids.size() == jobs.size(), "cluster ids misaligned with jobs");
  std::vector<uint32_t> order;
  order.reserve(jobs.size());
  for (uint32_t i = 0; i < jobs.size(); ++i)
    if (jobs[i].end_time) order.push_back(i);
  std::stable_sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
    if (*jobs[a].end_time != *jobs[b].end_time) return *jobs[a].end_time < *jobs[b].end_time;
    return jobs[a].submit_time < jobs[b].submit_time;
  });

  auto push = [](Series& s, int64_t end, double dur) {
    s.end.push_back(end);
    s.duration.push_back(dur);
    s.prefix.push_back((s.prefix.empty() ? 0.0 : s.prefix.back()) + dur);
  };

  for (uint32_t i : order) {
    const JobRecord& j = jobs[i];
    const int64_t end = *j.end_time;
    const double dur = static_cast<double>(j.duration);
    const int cluster = cluster_ids[i];
    end_times_.push_back(end);
    push(global_, end, dur);
    push(by_gpu_[j.gpu_num], end, dur);
    push(by_user_[j.user], end, dur);
    push(by_user_gpu_[{j.user, j.gpu_num}], end, dur);
    if (cluster >= 0) {
      push(by_user_cluster_[{j.user, cluster}], end, dur);
      push(by_user_cluster_gpu_[{j.user, cluster, j.gpu_num}], end, dur);
    }
  }
}

bool HistoryStore::user_known(const std::string& user, int64_t cutoff) const {
  auto it = by_user_.find(user);
  return it != by_user_.end() && it->second.visible(cutoff) > 0;
}

double HistoryStore::aggregate(const Series& s, int64_t cutoff,
                               const RollingConfig& config) const {
  return config.use_median ? s.median(cutoff) : s.mean(cutoff);
}

double HistoryStore::rolling_estimate(const JobRecord& job, int cluster_id, int64_t cutoff,
                                      const RollingConfig& config) const {
  // Case 1: unknown user -> distribution of all jobs with the same demand.
  if (!user_known(job.user, cutoff)) {
    if (auto it = by_gpu_.find(job.gpu_num); it != by_gpu_.end()) {
      double v = aggregate(it->second, cutoff, config);
      if (std::isfinite(v)) return v;
    }
    double v = aggregate(global_, cutoff, config);
    return std::isfinite(v) ? v : config.default_prior;
  }

  // Case 3: the user has name-matched history -> decayed mean, recent first.
  if (cluster_id >= 0) {
    if (auto it = by_user_cluster_.find({job.user, cluster_id}); it != by_user_cluster_.end()) {
      double v = it->second.decayed_mean(cutoff, config.gamma);
      if (std::isfinite(v)) return v;
    }
  }

  // Case 2: known user, no similar name -> the user's jobs with the same
  // demand, falling back to everything from the user.
  if (auto it = by_user_gpu_.find({job.user, job.gpu_num}); it != by_user_gpu_.end()) {
    double v = aggregate(it->second, cutoff, config);
    if (std::isfinite(v)) return v;
  }
  double v = aggregate(by_user_.at(job.user), cutoff, config);
  return std::isfinite(v) ? v : config.default_prior;
}

// ---- feature encoding --------------------------------------------------------

int CategoryEncoder::fit(const std::string& value) {
  auto [it, inserted] = codes.emplace(value, static_cast<int>(codes.size()) + 1);
  return it->second;
}

double CategoryEncoder::encode(const std::string& value) const {
  auto it = codes.find(value);
  return it == codes.end() ? kUnknownCode : static_cast<double>(it->second);
}

std::vector<double> encode_job_features(const JobRecord& job, const CategoryEncoder& users,
                                        const CategoryEncoder& vcs, int cluster_id,
                                        int known_cluster_count) {
  CivilTime ct = civil_from_epoch(job.submit_time);
  double cluster_code = kUnknownCode;
  if (cluster_id >= 0 && cluster_id < known_cluster_count)
    cluster_code = static_cast<double>(cluster_id + 1);
  return {users.encode(job.user),
          vcs.encode(job.vc),
          cluster_code,
          static_cast<double>(job.gpu_num),
          static_cast<double>(job.cpu_num),
          static_cast<double>(ct.month),
          static_cast<double>(ct.day_of_week),
          static_cast<double>(ct.hour),
          static_cast<double>(ct.minute)};
}

// ---- DurationPredictor ---------------------------------------------------------

double DurationPredictor::target_of(const JobRecord& job) const {
  double d = static_cast<double>(job.duration);
  return config_.log_target ? std::log1p(d) : d;
}

std::vector<double> DurationPredictor::features_of(const JobRecord& job, int cluster_id) const {
  return encode_job_features(job, users_, vcs_, cluster_id, trained_cluster_count_);
}

DurationPredictor DurationPredictor::train(const std::vector<JobRecord>& jobs, int64_t cutoff,
                                           const PredictorConfig& config) {
  DurationPredictor p;
  p.config_ = config;
  p.cutoff_ = cutoff;
  p.clusters_ = NameClusterIndex(config.rolling.tau);

  // Insertion order for encoders and clusters follows submit order, the same
  // order an online deployment would have seen the names.
  std::vector<uint32_t> train_idx;
  for (uint32_t i = 0; i < jobs.size(); ++i) {
    const auto& j = jobs[i];
    if (j.end_time && *j.end_time <= cutoff) train_idx.push_back(i);
  }
  if (train_idx.empty()) throw InvalidArgError("predictor: no jobs end before the cutoff");
  std::stable_sort(train_idx.begin(), train_idx.end(), [&](uint32_t a, uint32_t b) {
    return jobs[a].submit_time < jobs[b].submit_time;
  });

  Dataset data;
  for (uint32_t i : train_idx) {
    const auto& j = jobs[i];
    p.users_.fit(j.user);
    p.vcs_.fit(j.vc);
    int cluster = p.clusters_.assign(j.job_name);
    p.trained_cluster_count_ = static_cast<int>(p.clusters_.cluster_count());
    data.add_row(encode_job_features(j, p.users_, p.vcs_, cluster, p.trained_cluster_count_),
                 p.target_of(j));
  }
  p.model_ = train_gbdt(data, config.gbdt);
  return p;
}

double DurationPredictor::predict_ml(const JobRecord& job, int cluster_id) const {
  double raw = model_.predict_raw(features_of(job, cluster_id));
  double seconds = config_.log_target ? std::expm1(raw) : raw;
  if (!std::isfinite(seconds)) return seconds;  // caller falls back to P_R
  return std::max(1.0, seconds);
}

void DurationPredictor::update(const std::vector<JobRecord>& completed, int64_t now) {
  Dataset data;
  std::vector<const JobRecord*> window;
  for (const auto& j : completed) {
    if (!j.end_time) continue;
    if (*j.end_time <= now && *j.end_time > now - config_.update_window)
      window.push_back(&j);
  }
  if (window.empty()) return;
  std::stable_sort(window.begin(), window.end(), [](const JobRecord* a, const JobRecord* b) {
    return a->submit_time < b->submit_time;
  });
  for (const JobRecord* j : window) {
    int cluster = clusters_.assign(j->job_name);  // new names become unknown codes
    data.add_row(features_of(*j, cluster), target_of(*j));
  }
  boost_rounds(&model_, data, config_.gbdt, config_.update_rounds);
  cutoff_ = std::max(cutoff_, now);
}

PredictorValidation DurationPredictor::validate(const std::vector<JobRecord>& eval_jobs) const {
  PredictorValidation v;
  v.train_rows = 0;
  NameClusterIndex working = clusters_;
  double se = 0.0, se_log = 0.0, smape_sum = 0.0, resid_sum = 0.0, resid_sq = 0.0;
  size_t n = 0, smape_n = 0;
  for (const auto& j : eval_jobs) {
    int cluster = working.assign(j.job_name);
    double pred = predict_ml(j, cluster);
    if (!std::isfinite(pred)) continue;
    double actual = static_cast<double>(j.duration);
    se += (pred - actual) * (pred - actual);
    double lp = std::log1p(pred), la = std::log1p(actual);
    se_log += (lp - la) * (lp - la);
    resid_sum += lp - la;
    resid_sq += (lp - la) * (lp - la);
    double denom = (std::abs(actual) + std::abs(pred)) / 2.0;
    if (denom > 0) {
      smape_sum += std::abs(pred - actual) / denom;
      ++smape_n;
    }
    ++n;
  }
  v.val_rows = n;
  if (n > 0) {
    v.rmse_seconds = std::sqrt(se / static_cast<double>(n));
    v.rmse_log = std::sqrt(se_log / static_cast<double>(n));
    double mean_resid = resid_sum / static_cast<double>(n);
    v.residual_log_sigma = std::sqrt(std::max(0.0, resid_sq / static_cast<double>(n) - mean_resid * mean_resid));
  }
  if (smape_n > 0) v.smape_pct = 100.0 * smape_sum / static_cast<double>(smape_n);
  return v;
}

std::string DurationPredictor::to_json() const {
  json doc;
  doc["format"] = "gcsim-duration-predictor";
  doc["version"] = 1;
  doc["cutoff"] = cutoff_;
  doc["log_target"] = config_.log_target;
  doc["gamma"] = config_.rolling.gamma;
  doc["tau"] = config_.rolling.tau;
  doc["default_prior"] = config_.rolling.default_prior;
  doc["update_window"] = config_.update_window;
  doc["update_rounds"] = config_.update_rounds;
  doc["gbdt_config"] = {{"rounds", config_.gbdt.rounds},
                        {"learning_rate", config_.gbdt.learning_rate},
                        {"max_depth", config_.gbdt.max_depth},
                        {"min_samples_leaf", config_.gbdt.min_samples_leaf}};
  json users = json::object();
  for (const auto& [k, v] : users_.codes) users[k] = v;
  json vcs = json::object();
  for (const auto& [k, v] : vcs_.codes) vcs[k] = v;
  doc["users"] = std::move(users);
  doc["vcs"] = std::move(vcs);
  doc["trained_cluster_count"] = trained_cluster_count_;
  doc["clusters"] = json::parse(clusters_.to_json());
  doc["model"] = json::parse(gbdt_to_json(model_));
  return doc.dump();
}

DurationPredictor DurationPredictor::from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("predictor json: ") + e.what());
  }
  if (doc.value("format", "") != "gcsim-duration-predictor")
    throw ParseError("predictor json: unrecognized format");
  DurationPredictor p;
  p.cutoff_ = doc["cutoff"].get<int64_t>();
  p.config_.log_target = doc.value("log_target", true);
  p.config_.rolling.gamma = doc.value("gamma", 0.8);
  p.config_.rolling.tau = doc.value("tau", 0.3);
  p.config_.rolling.default_prior = doc.value("default_prior", 600.0);
  p.config_.update_window = doc.value("update_window", int64_t{86400 * 30});
  p.config_.update_rounds = doc.value("update_rounds", 20);
  if (doc.contains("gbdt_config")) {
    const auto& g = doc["gbdt_config"];
    p.config_.gbdt.rounds = g.value("rounds", 200);
    p.config_.gbdt.learning_rate = g.value("learning_rate", 0.1);
    p.config_.gbdt.max_depth = g.value("max_depth", 6);
    p.config_.gbdt.min_samples_leaf = g.value("min_samples_leaf", 20);
  }
  for (auto& [k, v] : doc["users"].items()) p.users_.codes.emplace(k, v.get<int>());
  for (auto& [k, v] : doc["vcs"].items()) p.vcs_.codes.emplace(k, v.get<int>());
  p.trained_cluster_count_ = doc["trained_cluster_count"].get<int>();
  p.clusters_ = NameClusterIndex::from_json(doc["clusters"].dump());
  p.model_ = gbdt_from_json(doc["model"].dump());
  return p;
}

std::string predictor_validation_to_json(const PredictorValidation& v) {
  json doc;
  doc["train_rows"] = v.train_rows;
  doc["val_rows"] = v.val_rows;
  doc["rmse_seconds"] = v.rmse_seconds;
  doc["smape_pct"] = v.smape_pct;
  doc["rmse_log"] = v.rmse_log;
  doc["residual_log_sigma"] = v.residual_log_sigma;
  return doc.dump(2) + "\n";
}

}  // namespace gcsim
