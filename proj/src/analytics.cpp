#include "gcsim/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <sstream>

#include "gcsim/csv.hpp"
#include "gcsim/svg.hpp"
#include "json.hpp"

namespace gcsim {

using nlohmann::json;

BusySeries minute_busy_series(const std::vector<std::tuple<int64_t, int64_t, int>>& segments) {
  BusySeries out;
  std::vector<std::pair<int64_t, int>> deltas;
  int64_t t_min = std::numeric_limits<int64_t>::max(), t_max = 0;
  for (const auto& [start, end, gpus] : segments) {
    if (end <= start) continue;
    deltas.emplace_back(start, gpus);
    deltas.emplace_back(end, -gpus);
    t_min = std::min(t_min, start);
    t_max = std::max(t_max, end);
  }
  if (deltas.empty()) return out;
  std::sort(deltas.begin(), deltas.end());
  out.start_minute = (t_min / 60) * 60;
  out.busy.assign(static_cast<size_t>((t_max - out.start_minute + 59) / 60), 0.0);
  size_t di = 0;
  int level = 0;
  int64_t t = out.start_minute;
  while (t < t_max) {
    while (di < deltas.size() && deltas[di].first <= t) level += deltas[di++].second;
    int64_t next_change = di < deltas.size() ? deltas[di].first : t_max;
    while (t < next_change) {
      int64_t minute_end = (t / 60) * 60 + 60;
      int64_t take = std::min(next_change, minute_end) - t;
      out.busy[static_cast<size_t>((t - out.start_minute) / 60)] +=
          static_cast<double>(level) * static_cast<double>(take) / 60.0;
      t += take;
    }
  }
  return out;
}

UtilizationTimeline utilization_timeline(const std::vector<JobRecord>& jobs,
                                         const ClusterSpec& cluster) {
  UtilizationTimeline out;
  out.total_gpus = cluster.total_gpus();
  std::vector<std::tuple<int64_t, int64_t, int>> segments;
  for (const auto& j : jobs) {
    if (!j.is_gpu() || !j.start_time || !j.end_time) continue;
    segments.emplace_back(*j.start_time, *j.end_time, j.gpu_num);
  }
  BusySeries busy = minute_busy_series(segments);
  out.start_minute = busy.start_minute;
  out.fraction.reserve(busy.busy.size());
  for (double b : busy.busy) out.fraction.push_back(b / static_cast<double>(out.total_gpus));

  std::vector<double> hour_sum(24, 0.0);
  std::vector<size_t> hour_n(24, 0);
  std::map<std::string, std::pair<double, size_t>> day_acc;
  for (size_t i = 0; i < out.fraction.size(); ++i) {
    int64_t t = out.start_minute + static_cast<int64_t>(i) * 60;
    CivilTime ct = civil_from_epoch(t);
    hour_sum[ct.hour] += out.fraction[i];
    hour_n[ct.hour] += 1;
    auto& [sum, n] = day_acc[format_date(t)];
    sum += out.fraction[i];
    n += 1;
  }
  out.hourly.assign(24, 0.0);
  for (int h = 0; h < 24; ++h)
    if (hour_n[h]) out.hourly[h] = hour_sum[h] / static_cast<double>(hour_n[h]);
  for (const auto& [date, acc] : day_acc)
    out.daily.emplace_back(date, acc.first / static_cast<double>(acc.second));
  return out;
}

namespace {

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  if (v.size() % 2 == 1) return v[mid];
  double hi = v[mid];
  std::nth_element(v.begin(), v.begin() + mid - 1, v.end());
  return (v[mid - 1] + hi) / 2.0;
}

}  // namespace

CDFSeries duration_cdf(const std::vector<JobRecord>& jobs, bool filter_gpu) {
  std::vector<double> values;
  for (const auto& j : jobs)
    if (j.is_gpu() == filter_gpu) values.push_back(static_cast<double>(j.duration));
  if (values.empty())
    throw InvalidArgError(std::string("duration_cdf: no ") + (filter_gpu ? "GPU" : "CPU") +
                          " jobs");
  CDFSeries out;
  out.count = values.size();
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) /
             static_cast<double>(values.size());
  out.median = median_of(values);
  std::sort(values.begin(), values.end());
  // one point per distinct value: (v, fraction of jobs <= v)
  for (size_t i = 0; i < values.size(); ++i) {
    if (i + 1 < values.size() && values[i + 1] == values[i]) continue;
    out.points.emplace_back(values[i],
                            static_cast<double>(i + 1) / static_cast<double>(values.size()));
  }
  return out;
}

std::vector<DemandBucket> gpu_demand_breakdown(const std::vector<JobRecord>& jobs) {
  std::map<int, DemandBucket> buckets;
  size_t total_jobs = 0;
  double total_time = 0.0;
  for (const auto& j : jobs) {
    if (!j.is_gpu()) continue;
    auto& b = buckets[j.gpu_num];
    b.gpu_num = j.gpu_num;
    b.jobs += 1;
    b.gpu_time += static_cast<double>(j.duration) * j.gpu_num;
    total_jobs += 1;
    total_time += static_cast<double>(j.duration) * j.gpu_num;
  }
  std::vector<DemandBucket> out;
  for (auto& [gpu, b] : buckets) {
    if (total_jobs) b.count_share = static_cast<double>(b.jobs) / static_cast<double>(total_jobs);
    if (total_time > 0) b.gpu_time_share = b.gpu_time / total_time;
    out.push_back(b);
  }
  return out;
}

std::vector<StatusRow> status_breakdown(const std::vector<JobRecord>& jobs) {
  struct Counts {
    size_t total = 0, completed = 0, canceled = 0, failed = 0;
  };
  auto tally = [](Counts& c, const JobRecord& j) {
    c.total += 1;
    switch (j.status) {
      case JobStatus::Completed: c.completed += 1; break;
      case JobStatus::Canceled: c.canceled += 1; break;
      case JobStatus::Failed: c.failed += 1; break;
    }
  };
  Counts cpu, gpu;
  std::map<int, Counts> by_pow2;
  for (const auto& j : jobs) {
    if (j.is_gpu()) {
      tally(gpu, j);
      // 2^k grid only, matching the demand groups the traces mostly use
      if ((j.gpu_num & (j.gpu_num - 1)) == 0) tally(by_pow2[j.gpu_num], j);
    } else {
      tally(cpu, j);
    }
  }
  std::vector<StatusRow> out;
  auto emit = [&](const std::string& group, const Counts& c) {
    if (c.total == 0) return;
    StatusRow r;
    r.group = group;
    r.total = c.total;
    r.completed = static_cast<double>(c.completed) / static_cast<double>(c.total);
    r.canceled = static_cast<double>(c.canceled) / static_cast<double>(c.total);
    r.failed = static_cast<double>(c.failed) / static_cast<double>(c.total);
    out.push_back(r);
  };
  emit("cpu", cpu);
  emit("gpu", gpu);
  for (const auto& [gpus, c] : by_pow2) emit("gpu_" + std::to_string(gpus), c);
  return out;
}

std::vector<UserStats> user_stats(const std::vector<JobRecord>& jobs) {
  std::map<std::string, UserStats> acc;
  std::map<std::string, size_t> completed;
  for (const auto& j : jobs) {
    auto& u = acc[j.user];
    u.user = j.user;
    u.jobs += 1;
    if (j.is_gpu()) {
      u.gpu_jobs += 1;
      u.gpu_time += static_cast<double>(j.duration) * j.gpu_num;
    } else {
      u.cpu_time += static_cast<double>(j.duration) * j.cpu_num;
    }
    if (j.start_time) u.queuing_total += static_cast<double>(*j.start_time - j.submit_time);
    if (j.status == JobStatus::Completed) completed[j.user] += 1;
  }
  std::vector<UserStats> out;
  for (auto& [user, u] : acc) {
    u.completed_ratio = static_cast<double>(completed[user]) / static_cast<double>(u.jobs);
    out.push_back(u);
  }
  std::sort(out.begin(), out.end(), [](const UserStats& a, const UserStats& b) {
    if (a.gpu_time != b.gpu_time) return a.gpu_time > b.gpu_time;
    return a.user < b.user;
  });
  return out;
}

namespace {

// Share of the total held by the top 5% of users when ranked by `key`.
double top5pct_share(std::vector<double> values) {
  std::erase_if(values, [](double v) { return v <= 0.0; });
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end(), std::greater<>());
  double total = std::accumulate(values.begin(), values.end(), 0.0);
  size_t k = std::max<size_t>(1, static_cast<size_t>(std::ceil(values.size() * 0.05)));
  double top = std::accumulate(values.begin(), values.begin() + static_cast<long>(k), 0.0);
  return total > 0 ? top / total : 0.0;
}

}  // namespace

AnalyticsSummary analytics_summary(const std::vector<JobRecord>& jobs) {
  AnalyticsSummary s;
  std::vector<double> gpu_durs, cpu_durs;
  double gpu_sum = 0.0, cpu_sum = 0.0, gpu_count_sum = 0.0;
  size_t gpu_bad = 0, cpu_bad = 0, single = 0;
  double total_gpu_time = 0.0, single_gpu_time = 0.0;
  for (const auto& j : jobs) {
    s.total_jobs += 1;
    if (j.is_gpu()) {
      s.gpu_jobs += 1;
      gpu_durs.push_back(static_cast<double>(j.duration));
      gpu_sum += static_cast<double>(j.duration);
      gpu_count_sum += j.gpu_num;
      if (j.status != JobStatus::Completed) ++gpu_bad;
      double gt = static_cast<double>(j.duration) * j.gpu_num;
      total_gpu_time += gt;
      if (j.gpu_num == 1) {
        ++single;
        single_gpu_time += gt;
      }
    } else {
      s.cpu_jobs += 1;
      cpu_durs.push_back(static_cast<double>(j.duration));
      cpu_sum += static_cast<double>(j.duration);
      if (j.status != JobStatus::Completed) ++cpu_bad;
    }
  }
  if (s.gpu_jobs) {
    s.gpu_mean_duration = gpu_sum / static_cast<double>(s.gpu_jobs);
    s.gpu_median_duration = median_of(gpu_durs);
    s.avg_gpu_num = gpu_count_sum / static_cast<double>(s.gpu_jobs);
    s.unsuccessful_gpu_share = static_cast<double>(gpu_bad) / static_cast<double>(s.gpu_jobs);
    s.single_gpu_count_share = static_cast<double>(single) / static_cast<double>(s.gpu_jobs);
    if (total_gpu_time > 0) s.single_gpu_time_share = single_gpu_time / total_gpu_time;
  }
  if (s.cpu_jobs) {
    s.cpu_mean_duration = cpu_sum / static_cast<double>(s.cpu_jobs);
    s.cpu_median_duration = median_of(cpu_durs);
    s.unsuccessful_cpu_share = static_cast<double>(cpu_bad) / static_cast<double>(s.cpu_jobs);
  }
  auto users = user_stats(jobs);
  std::vector<double> gpu_times, cpu_times;
  for (const auto& u : users) {
    gpu_times.push_back(u.gpu_time);
    cpu_times.push_back(u.cpu_time);
  }
  s.top5pct_user_gpu_time_share = top5pct_share(gpu_times);
  s.top5pct_user_cpu_time_share = top5pct_share(cpu_times);
  return s;
}

std::string analytics_summary_to_json(const AnalyticsSummary& s) {
  json doc;
  doc["total_jobs"] = s.total_jobs;
  doc["gpu_jobs"] = s.gpu_jobs;
  doc["cpu_jobs"] = s.cpu_jobs;
  doc["gpu_mean_duration"] = s.gpu_mean_duration;
  doc["gpu_median_duration"] = s.gpu_median_duration;
  doc["cpu_mean_duration"] = s.cpu_mean_duration;
  doc["cpu_median_duration"] = s.cpu_median_duration;
  doc["avg_gpu_num"] = s.avg_gpu_num;
  doc["unsuccessful_gpu_share"] = s.unsuccessful_gpu_share;
  doc["unsuccessful_cpu_share"] = s.unsuccessful_cpu_share;
  doc["single_gpu_count_share"] = s.single_gpu_count_share;
  doc["single_gpu_time_share"] = s.single_gpu_time_share;
  doc["top5pct_user_gpu_time_share"] = s.top5pct_user_gpu_time_share;
  doc["top5pct_user_cpu_time_share"] = s.top5pct_user_cpu_time_share;
  return doc.dump(2) + "\n";
}

std::string write_analytics_report(const std::vector<JobRecord>& jobs,
                                   const ClusterSpec& cluster, const std::string& outdir,
                                   bool svg) {
  namespace fs = std::filesystem;
  fs::create_directories(outdir);
  auto path = [&](const char* name) { return (fs::path(outdir) / name).string(); };
  char buf[64];
  auto fmt = [&buf](double v) {
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return std::string(buf);
  };

  UtilizationTimeline util = utilization_timeline(jobs, cluster);
  {
    std::ostringstream os;
    os << "t,busy_gpus,total_gpus,fraction\n";
    for (size_t i = 0; i < util.fraction.size(); ++i) {
      int64_t t = util.start_minute + static_cast<int64_t>(i) * 60;
      os << t << ',' << fmt(util.fraction[i] * util.total_gpus) << ',' << util.total_gpus
         << ',' << fmt(util.fraction[i]) << '\n';
    }
    write_file(path("utilization.csv"), os.str());
  }
  {
    std::ostringstream os;
    os << "hour,mean_fraction\n";
    for (int h = 0; h < 24; ++h) os << h << ',' << fmt(util.hourly[h]) << '\n';
    write_file(path("utilization_hourly.csv"), os.str());
    std::ostringstream od;
    od << "date,mean_fraction\n";
    for (const auto& [date, f] : util.daily) od << date << ',' << fmt(f) << '\n';
    write_file(path("utilization_daily.csv"), od.str());
  }

  auto write_cdf = [&](const char* name, bool gpu) {
    CDFSeries cdf = duration_cdf(jobs, gpu);
    std::ostringstream os;
    os << "value,fraction\n";
    for (const auto& [v, f] : cdf.points) os << fmt(v) << ',' << fmt(f) << '\n';
    write_file(path(name), os.str());
    return cdf;
  };
  bool have_gpu = std::any_of(jobs.begin(), jobs.end(), [](const auto& j) { return j.is_gpu(); });
  bool have_cpu = std::any_of(jobs.begin(), jobs.end(), [](const auto& j) { return !j.is_gpu(); });
  CDFSeries gpu_cdf, cpu_cdf;
  if (have_gpu) gpu_cdf = write_cdf("cdf_duration_gpu.csv", true);
  if (have_cpu) cpu_cdf = write_cdf("cdf_duration_cpu.csv", false);

  {
    std::ostringstream os;
    os << "gpu_num,jobs,count_share,gpu_time,gpu_time_share\n";
    for (const auto& b : gpu_demand_breakdown(jobs)) {
      os << b.gpu_num << ',' << b.jobs << ',' << fmt(b.count_share) << ',' << fmt(b.gpu_time)
         << ',' << fmt(b.gpu_time_share) << '\n';
    }
    write_file(path("demand_breakdown.csv"), os.str());
  }
  {
    std::ostringstream os;
    os << "group,total,completed,canceled,failed\n";
    for (const auto& r : status_breakdown(jobs)) {
      os << r.group << ',' << r.total << ',' << fmt(r.completed) << ',' << fmt(r.canceled)
         << ',' << fmt(r.failed) << '\n';
    }
    write_file(path("status.csv"), os.str());
  }
  {
    std::ostringstream os;
    os << "user,jobs,gpu_jobs,gpu_time,cpu_time,queuing_total,completed_ratio\n";
    for (const auto& u : user_stats(jobs)) {
      csv::write_record(os, {u.user, std::to_string(u.jobs), std::to_string(u.gpu_jobs),
                             fmt(u.gpu_time), fmt(u.cpu_time), fmt(u.queuing_total),
                             fmt(u.completed_ratio)});
    }
    write_file(path("users.csv"), os.str());
  }

  if (svg) {
    if (!util.fraction.empty()) {
      std::vector<double> xs(util.fraction.size());
      for (size_t i = 0; i < xs.size(); ++i) xs[i] = static_cast<double>(i) / 60.0;  // hours
      write_file(path("utilization.svg"),
                 svg_line_chart("Cluster utilization (fraction of GPUs busy)", "hours",
                                "fraction", {{xs, util.fraction, "utilization"}}));
    }
    std::vector<SvgSeries> cdfs;
    auto to_series = [](const CDFSeries& c, const char* label) {
      SvgSeries s;
      for (const auto& [v, f] : c.points) {
        s.x.push_back(std::log10(std::max(1.0, v)));
        s.y.push_back(f);
      }
      s.label = label;
      return s;
    };
    if (have_gpu) cdfs.push_back(to_series(gpu_cdf, "gpu"));
    if (have_cpu) cdfs.push_back(to_series(cpu_cdf, "cpu"));
    if (!cdfs.empty())
      write_file(path("cdf_duration.svg"),
                 svg_line_chart("Job duration CDF", "log10(seconds)", "fraction", cdfs));
  }

  std::string summary = analytics_summary_to_json(analytics_summary(jobs));
  write_file(path("summary.json"), summary);
  return summary;
}

}  // namespace gcsim
