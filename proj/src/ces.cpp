#include "gcsim/ces.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "gcsim/csv.hpp"
#include "gcsim/sim.hpp"
#include "json.hpp"

namespace gcsim {

using nlohmann::json;

NodeSeries parse_node_series_csv(std::istream& in) {
  csv::Reader reader(in);
  std::vector<std::string> fields;
  if (!reader.read_record(&fields)) throw ParseError("empty node series");
  if (fields.size() < 3 || to_lower(trim(fields[0])) != "minute")
    throw ParseError("node series header must be: minute,total,running");
  NodeSeries s;
  int64_t prev_minute = 0;
  int prev_running = 0;
  bool first = true;
  while (reader.read_record(&fields)) {
    if (fields.size() <= 1) continue;
    auto minute = parse_timestamp(fields[0]);
    auto total = parse_i64(fields[1]);
    auto running = parse_i64(fields[2]);
    if (!minute || !total || !running)
      throw ParseError("unparsable node series row at line " +
                       std::to_string(reader.line_number()));
    int64_t m = (*minute / 60) * 60;
    if (first) {
      s.start_minute = m;
      s.total = static_cast<int>(*total);
      first = false;
    } else {
      if (m <= prev_minute) throw ParseError("node series minutes must increase");
      // fill gaps by holding the previous value
      for (int64_t g = prev_minute + 60; g < m; g += 60) s.running.push_back(prev_running);
    }
    int r = static_cast<int>(std::min<int64_t>(*running, s.total));
    GCSIM_CHECK(r >= 0, "negative running count");
    s.running.push_back(r);
    prev_minute = m;
    prev_running = r;
  }
  if (s.running.empty()) throw ParseError("node series has no rows");
  return s;
}

std::string node_series_to_csv(const NodeSeries& s) {
  std::ostringstream os;
  os << "minute,total,running\n";
  for (size_t i = 0; i < s.running.size(); ++i)
    os << s.minute_epoch(i) << ',' << s.total << ',' << s.running[i] << '\n';
  return os.str();
}

NodeSeries parse_philly_node_export(std::istream& in) {
  csv::Reader reader(in);
  std::vector<std::string> fields;
  if (!reader.read_record(&fields)) throw ParseError("empty node export");
  if (fields.size() < 3) throw ParseError("node export needs time,machine,util columns");
  std::map<std::string, int> machines;
  std::map<int64_t, std::vector<char>> running_at;  // minute -> machine bitmap
  while (reader.read_record(&fields)) {
    if (fields.size() < 3) continue;
    auto t = parse_timestamp(fields[0]);
    if (!t) continue;
    int64_t minute = (*t / 60) * 60;
    auto [it, inserted] = machines.emplace(fields[1], static_cast<int>(machines.size()));
    bool busy = false;
    for (size_t i = 2; i < fields.size(); ++i) {
      auto util = parse_f64(fields[i]);
      if (util && *util > 0.0) {
        busy = true;
        break;
      }
    }
    if (busy) {
      auto& bitmap = running_at[minute];
      if (bitmap.size() <= static_cast<size_t>(it->second)) bitmap.resize(machines.size(), 0);
      bitmap[it->second] = 1;
    } else {
      running_at.try_emplace(minute);
    }
  }
  if (running_at.empty()) throw ParseError("node export has no usable rows");
  NodeSeries s;
  s.total = static_cast<int>(machines.size());
  s.start_minute = running_at.begin()->first;
  int64_t last = running_at.rbegin()->first;
  int prev = 0;
  for (int64_t m = s.start_minute; m <= last; m += 60) {
    auto it = running_at.find(m);
    if (it != running_at.end())
      prev = static_cast<int>(std::count(it->second.begin(), it->second.end(), 1));
    s.running.push_back(prev);
  }
  return s;
}

NodeSeries derive_node_series(const std::vector<JobRecord>& jobs, const ClusterSpec& cluster) {
  struct Placed {
    uint32_t job;
    std::vector<std::pair<int, int>> placement;  // global node ids
  };
  std::vector<uint32_t> usable;
  int64_t t_min = std::numeric_limits<int64_t>::max(), t_max = 0;
  for (uint32_t i = 0; i < jobs.size(); ++i) {
    const auto& j = jobs[i];
    if (!j.is_gpu() || !j.start_time || !j.end_time || *j.end_time <= *j.start_time) continue;
    usable.push_back(i);
    t_min = std::min(t_min, *j.start_time);
    t_max = std::max(t_max, *j.end_time);
  }
  NodeSeries out;
  out.total = cluster.nodes;
  if (usable.empty()) {
    out.start_minute = 0;
    out.running.assign(1, 0);
    return out;
  }
  out.start_minute = (t_min / 60) * 60;
  const size_t minutes = static_cast<size_t>((t_max - out.start_minute + 59) / 60);
  out.running.assign(minutes, 0);

  auto snapshot = cluster.vc_snapshot(t_min);
  std::map<std::string, int> vc_index;
  struct VCBox {
    int first_node;
    std::vector<int> free;
  };
  std::vector<VCBox> boxes;
  int next_node = 0;
  for (const auto& [vc, count] : snapshot) {
    vc_index[vc] = static_cast<int>(boxes.size());
    boxes.push_back({next_node, std::vector<int>(count, cluster.gpus_per_node)});
    next_node += count;
  }
  const int rest_cap = std::max(0, cluster.nodes - next_node);

  // (time, is_end, order) events over recorded intervals
  struct Ev {
    int64_t time;
    int kind;  // 0 end, 1 start
    uint32_t job;
  };
  std::vector<Ev> events;
  events.reserve(usable.size() * 2);
  for (uint32_t i : usable) {
    events.push_back({*jobs[i].start_time, 1, i});
    events.push_back({*jobs[i].end_time, 0, i});
  }
  std::sort(events.begin(), events.end(), [](const Ev& a, const Ev& b) {
    if (a.time != b.time) return a.time < b.time;
    if (a.kind != b.kind) return a.kind < b.kind;  // ends release first
    return a.job < b.job;
  });

  std::vector<int> node_occupancy(static_cast<size_t>(next_node), 0);
  std::vector<int64_t> node_interval_start(static_cast<size_t>(next_node), 0);
  // per node: merged busy minute ranges, accumulated into per-VC minute counts
  std::vector<std::vector<int>> vc_placed(boxes.size(), std::vector<int>(minutes + 1, 0));
  std::vector<std::vector<int>> vc_overflow(boxes.size(), std::vector<int>(minutes + 1, 0));
  std::vector<int> rest_overflow(minutes + 1, 0);
  std::vector<int64_t> node_last_minute(static_cast<size_t>(next_node), -1);

  auto mark_node_interval = [&](int vcb, int node, int64_t s, int64_t e) {
    int64_t m0 = (s - out.start_minute) / 60;
    int64_t m1 = (e - 1 - out.start_minute) / 60;
    m0 = std::max<int64_t>(m0, node_last_minute[node] + 1);  // dedupe shared minutes
    if (m1 < m0) return;
    vc_placed[vcb][static_cast<size_t>(m0)] += 1;
    vc_placed[vcb][static_cast<size_t>(m1 + 1)] -= 1;
    node_last_minute[node] = m1;
  };
  auto mark_overflow = [&](std::vector<int>& arr, int64_t s, int64_t e, int weight) {
    int64_t m0 = (s - out.start_minute) / 60;
    int64_t m1 = (e - 1 - out.start_minute) / 60;
    arr[static_cast<size_t>(m0)] += weight;
    arr[static_cast<size_t>(m1 + 1)] -= weight;
  };

  std::unordered_map<uint32_t, std::vector<std::pair<int, int>>> live;  // job -> placement
  for (const Ev& ev : events) {
    const JobRecord& j = jobs[ev.job];
    auto vit = vc_index.find(j.vc);
    if (ev.kind == 1) {
      int needed = (j.gpu_num + cluster.gpus_per_node - 1) / cluster.gpus_per_node;
      if (vit == vc_index.end()) {
        mark_overflow(rest_overflow, *j.start_time, *j.end_time, needed);
        continue;
      }
      VCBox& box = boxes[static_cast<size_t>(vit->second)];
      auto placement = consolidate_allocate(j.gpu_num, box.free, cluster.gpus_per_node);
      if (placement.empty()) {
        mark_overflow(vc_overflow[static_cast<size_t>(vit->second)], *j.start_time,
                      *j.end_time, needed);
        continue;
      }
      for (auto& [local, gpus] : placement) {
        box.free[local] -= gpus;
        int node = box.first_node + local;
        if (node_occupancy[node]++ == 0) node_interval_start[node] = ev.time;
      }
      live.emplace(ev.job, std::move(placement));
    } else {
      auto lit = live.find(ev.job);
      if (lit == live.end()) continue;  // was an overflow job
      VCBox& box = boxes[static_cast<size_t>(vit->second)];
      for (auto& [local, gpus] : lit->second) {
        box.free[local] += gpus;
        int node = box.first_node + local;
        if (--node_occupancy[node] == 0)
          mark_node_interval(vit->second, node, node_interval_start[node], ev.time);
      }
      live.erase(lit);
    }
  }

  for (size_t v = 0; v < boxes.size(); ++v) {
    const int cap = static_cast<int>(boxes[v].free.size());
    int placed = 0, overflow = 0;
    for (size_t m = 0; m < minutes; ++m) {
      placed += vc_placed[v][m];
      overflow += vc_overflow[v][m];
      out.running[m] += std::min(cap, placed + overflow);
    }
  }
  int rest = 0;
  for (size_t m = 0; m < minutes; ++m) {
    rest += rest_overflow[m];
    out.running[m] += std::min(rest_cap, rest);
    out.running[m] = std::min(out.running[m], out.total);
  }
  return out;
}

// ---- Alg. 2 primitives -------------------------------------------------------

int job_arrival_check(int active, int requested, int sigma) {
  GCSIM_CHECK(active >= 0 && requested >= 0 && sigma >= 0, "negative node count");
  if (active < requested) return requested - active + sigma;
  return 0;
}

std::optional<int> periodic_check(double trend_recent, double trend_future, double xi_h,
                                  double xi_p, int running, int sigma) {
  if (trend_recent >= xi_h && trend_future >= xi_p)
    return std::max(running + sigma, running);
  return std::nullopt;
}

double energy_savings_kwh(double avg_sleeping_nodes, double hours, const EnergyModel& energy) {
  GCSIM_CHECK(energy.idle_node_watts > 0 && energy.cooling_multiplier >= 0, "bad energy model");
  return avg_sleeping_nodes * energy.idle_node_watts / 1000.0 *
         (1.0 + energy.cooling_multiplier) * hours;
}

double smape(const std::vector<double>& actual, const std::vector<double>& forecast) {
  if (actual.empty()) throw InvalidArgError("smape: empty input");
  if (actual.size() != forecast.size()) throw InvalidArgError("smape: length mismatch");
  double sum = 0.0;
  size_t n = 0;
  for (size_t i = 0; i < actual.size(); ++i) {
    double denom = (std::abs(actual[i]) + std::abs(forecast[i])) / 2.0;
    if (denom == 0.0) continue;  // 0/0 point
    sum += std::abs(forecast[i] - actual[i]) / denom;
    ++n;
  }
  return n == 0 ? 0.0 : 100.0 * sum / static_cast<double>(n);
}

// ---- forecasting ----------------------------------------------------------------

bool forecast_features_row(const std::vector<double>& values, size_t t, int64_t start_minute,
                           const ForecastFeatureConfig& config, std::vector<double>* out) {
  size_t need = 0;
  for (int w : config.rolling_windows) need = std::max(need, static_cast<size_t>(w));
  for (int l : config.lags) need = std::max(need, static_cast<size_t>(l));
  if (t < need || t > values.size()) return false;

  out->clear();
  CivilTime ct = civil_from_epoch(start_minute + static_cast<int64_t>(t) * 60);
  out->push_back(static_cast<double>(ct.hour));
  out->push_back(static_cast<double>(ct.day_of_week));
  out->push_back(static_cast<double>(ct.day));
  int64_t day_start = epoch_from_civil(ct.year, ct.month, ct.day);
  bool holiday = std::find(config.holidays.begin(), config.holidays.end(), day_start) !=
                 config.holidays.end();
  out->push_back(holiday ? 1.0 : 0.0);
  for (int w : config.rolling_windows) {
    double sum = 0.0, sq = 0.0;
    for (size_t i = t - static_cast<size_t>(w); i < t; ++i) {
      sum += values[i];
      sq += values[i] * values[i];
    }
    double mean = sum / w;
    out->push_back(mean);
    out->push_back(std::sqrt(std::max(0.0, sq / w - mean * mean)));
  }
  for (int l : config.lags) out->push_back(values[t - static_cast<size_t>(l)]);
  return true;
}

GbdtForecaster GbdtForecaster::train(const NodeSeries& series, size_t train_end_index,
                                     const ForecastFeatureConfig& features,
                                     const GBDTConfig& gbdt) {
  GCSIM_CHECK(train_end_index < series.size(), "train_end_index out of range");
  std::vector<double> values(series.running.begin(),
                             series.running.begin() + static_cast<long>(train_end_index) + 1);
  Dataset data;
  std::vector<double> row;
  for (size_t t = 0; t <= train_end_index; ++t) {
    if (!forecast_features_row(values, t, series.start_minute, features, &row)) continue;
    data.add_row(row, values[t]);
  }
  if (data.rows == 0)
    throw InvalidArgError("forecaster: series too short for the configured windows");
  GbdtForecaster f;
  f.features_ = features;
  f.model_ = train_gbdt(data, gbdt);
  f.total_nodes_ = series.total;
  f.cutoff_epoch_ = series.minute_epoch(train_end_index);
  return f;
}

std::vector<double> GbdtForecaster::forecast(const NodeSeries& history, size_t now_index,
                                             int horizon_minutes) const {
  size_t look_back = 0;
  for (int w : features_.rolling_windows) look_back = std::max(look_back, static_cast<size_t>(w));
  for (int l : features_.lags) look_back = std::max(look_back, static_cast<size_t>(l));
  if (now_index + 1 < look_back || now_index >= history.size()) return {};

  const size_t buf_begin = now_index + 1 - look_back;
  std::vector<double> buf;
  buf.reserve(look_back + static_cast<size_t>(horizon_minutes));
  for (size_t i = buf_begin; i <= now_index; ++i)
    buf.push_back(static_cast<double>(history.running[i]));
  const int64_t buf_start = history.start_minute + static_cast<int64_t>(buf_begin) * 60;

  std::vector<double> out;
  std::vector<double> row;
  for (int step = 1; step <= horizon_minutes; ++step) {
    size_t t = buf.size();
    if (!forecast_features_row(buf, t, buf_start, features_, &row)) break;
    double pred = model_.predict_raw(row);
    pred = std::clamp(pred, 0.0, static_cast<double>(total_nodes_));
    out.push_back(pred);
    buf.push_back(pred);
  }
  return out;
}

std::string GbdtForecaster::to_json() const {
  json doc;
  doc["format"] = "gcsim-node-forecaster";
  doc["version"] = 1;
  doc["rolling_windows"] = features_.rolling_windows;
  doc["lags"] = features_.lags;
  doc["holidays"] = features_.holidays;
  doc["total_nodes"] = total_nodes_;
  doc["cutoff_epoch"] = cutoff_epoch_;
  doc["model"] = json::parse(gbdt_to_json(model_));
  return doc.dump();
}

GbdtForecaster GbdtForecaster::from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("forecaster json: ") + e.what());
  }
  if (doc.value("format", "") != "gcsim-node-forecaster")
    throw ParseError("forecaster json: unrecognized format");
  GbdtForecaster f;
  f.features_.rolling_windows = doc["rolling_windows"].get<std::vector<int>>();
  f.features_.lags = doc["lags"].get<std::vector<int>>();
  f.features_.holidays = doc["holidays"].get<std::vector<int64_t>>();
  f.total_nodes_ = doc["total_nodes"].get<int>();
  f.cutoff_epoch_ = doc["cutoff_epoch"].get<int64_t>();
  f.model_ = gbdt_from_json(doc["model"].dump());
  return f;
}

std::vector<double> OracleForecaster::forecast(const NodeSeries&, size_t now_index,
                                               int horizon_minutes) const {
  std::vector<double> out;
  for (int s = 1; s <= horizon_minutes; ++s) {
    size_t i = now_index + static_cast<size_t>(s);
    if (i >= full_.size()) break;
    out.push_back(static_cast<double>(full_.running[i]));
  }
  return out;
}

// ---- replay -----------------------------------------------------------------------

CESInput ces_input_from_series(NodeSeries series, int64_t eval_from_epoch) {
  CESInput input;
  input.series = std::move(series);
  for (size_t m = 1; m < input.series.size(); ++m)
    if (input.series.running[m] > input.series.running[m - 1]) input.arrivals.push_back(m);
  int64_t offset = (eval_from_epoch - input.series.start_minute) / 60;
  input.eval_begin = static_cast<size_t>(std::clamp<int64_t>(
      offset, 0, static_cast<int64_t>(input.series.size())));
  return input;
}

CESInput ces_input_from_trace(const std::vector<JobRecord>& jobs, const ClusterSpec& cluster,
                              int64_t eval_from_epoch) {
  CESInput input;
  input.series = derive_node_series(jobs, cluster);
  for (const auto& j : jobs) {
    if (!j.is_gpu() || !j.start_time) continue;
    int64_t m = (*j.start_time - input.series.start_minute) / 60;
    if (m >= 0 && m < static_cast<int64_t>(input.series.size()))
      input.arrivals.push_back(static_cast<size_t>(m));
  }
  std::sort(input.arrivals.begin(), input.arrivals.end());
  int64_t offset = (eval_from_epoch - input.series.start_minute) / 60;
  input.eval_begin = static_cast<size_t>(std::clamp<int64_t>(
      offset, 0, static_cast<int64_t>(input.series.size())));
  return input;
}

CESReport run_ces_simulation(const CESInput& input, const CESConfig& config,
                             const Forecaster* forecaster, const EnergyModel& energy) {
  const NodeSeries& series = input.series;
  const size_t minutes = series.size();
  const int total = series.total;
  GCSIM_CHECK(total > 0, "empty cluster");
  GCSIM_CHECK(input.eval_begin < minutes, "evaluation window outside the series");

  CESReport report;
  report.total_nodes = total;
  report.eval_start = series.minute_epoch(input.eval_begin);
  report.eval_end = series.minute_epoch(minutes - 1) + 60;

  const bool uses_forecast = config.enabled && !config.vanilla;
  if (uses_forecast) {
    GCSIM_CHECK(forecaster != nullptr, "CES needs a forecaster");
    if (forecaster->train_cutoff_epoch() >= report.eval_start)
      throw Error("forecaster trained past the evaluation start (leakage)");
  }

  const int check_m = std::max<int64_t>(1, config.check_period / 60);
  const int hw_m = std::max<int64_t>(1, config.history_window / 60);
  const int horizon_m = std::max<int64_t>(1, config.forecast_horizon / 60);
  const int boot_m = static_cast<int>((config.boot_delay + 59) / 60);

  enum class S { Busy, Idle, Sleeping, Waking };
  std::vector<S> state(static_cast<size_t>(total), S::Idle);
  std::vector<int64_t> last_busy(static_cast<size_t>(total), -1);
  std::vector<int64_t> ready_at(static_cast<size_t>(total), 0);
  std::vector<int> sleep_stack;  // most recently slept on top

  auto count_state = [&](S s) {
    return static_cast<int>(std::count(state.begin(), state.end(), s));
  };

  size_t arrival_pos = std::lower_bound(input.arrivals.begin(), input.arrivals.end(),
                                        input.eval_begin) -
                       input.arrivals.begin();

  double sum_sleeping = 0.0, sum_active = 0.0, sum_running = 0.0;
  double sum_util_before = 0.0, sum_util_after = 0.0;
  const size_t eval_minutes = minutes - input.eval_begin;
  report.timeline.reserve(eval_minutes);

  for (size_t m = input.eval_begin; m < minutes; ++m) {
    // waking nodes come online exactly at ready_at
    for (int n = 0; n < total; ++n)
      if (state[n] == S::Waking && ready_at[n] <= static_cast<int64_t>(m))
        state[n] = S::Idle;

    const int demand = std::clamp(series.running[m], 0, total);

    // job arrivals this minute
    while (arrival_pos < input.arrivals.size() && input.arrivals[arrival_pos] == m) {
      ++arrival_pos;
      ++report.observed_jobs;
      if (!config.enabled) continue;
      int busy = count_state(S::Busy), idle = count_state(S::Idle);
      int waking = count_state(S::Waking);
      int active = busy + idle + waking;
      if (busy + idle < demand) ++report.affected_jobs;  // waits for a waking node
      int wake = job_arrival_check(active, demand, config.sigma);
      wake = std::min(wake, static_cast<int>(sleep_stack.size()));
      if (wake > 0) {
        ++report.wake_calls;
        report.woken_nodes += static_cast<size_t>(wake);
        for (int k = 0; k < wake; ++k) {
          int n = sleep_stack.back();  // most recently slept first
          sleep_stack.pop_back();
          state[n] = S::Waking;
          ready_at[n] = static_cast<int64_t>(m) + boot_m;
        }
      }
    }

    // serve demand: keep the current busy set, promote the hottest idle nodes
    {
      int busy = count_state(S::Busy), idle = count_state(S::Idle);
      int target_busy = std::min(demand, busy + idle);
      while (busy > target_busy) {
        int pick = -1;
        for (int n = 0; n < total; ++n)
          if (state[n] == S::Busy && (pick < 0 || last_busy[n] < last_busy[pick])) pick = n;
        state[pick] = S::Idle;
        --busy;
      }
      while (busy < target_busy) {
        int pick = -1;
        for (int n = 0; n < total; ++n)
          if (state[n] == S::Idle &&
              (pick < 0 || last_busy[n] > last_busy[pick] ||
               (last_busy[n] == last_busy[pick] && n > pick)))
            pick = n;
        state[pick] = S::Busy;
        ++busy;
      }
      for (int n = 0; n < total; ++n)
        if (state[n] == S::Busy) last_busy[n] = static_cast<int64_t>(m);
    }

    // periodic check
    if (config.enabled && (m - input.eval_begin) % static_cast<size_t>(check_m) == 0) {
      const int busy = count_state(S::Busy);
      const int idle = count_state(S::Idle);
      const int waking = count_state(S::Waking);
      const int active = busy + idle + waking;
      std::optional<int> target;
      if (config.vanilla) {
        target = std::max(busy + config.sigma, busy);
      } else if (m >= static_cast<size_t>(hw_m)) {
        const double trend_recent =
            static_cast<double>(series.running[m - static_cast<size_t>(hw_m)] -
                                series.running[m]);
        std::vector<double> prediction = forecaster->forecast(series, m, horizon_m);
        if (static_cast<int>(prediction.size()) < horizon_m) {
          ++report.short_forecasts;  // fail safe toward availability
        } else {
          const double trend_future =
              prediction.front() - *std::min_element(prediction.begin(), prediction.end());
          target = periodic_check(trend_recent, trend_future, config.xi_h, config.xi_p, busy,
                                  config.sigma);
        }
      }
      if (target) {
        int to_sleep = std::min(active - *target, idle);
        for (int k = 0; k < to_sleep; ++k) {
          int pick = -1;  // coldest idle node first
          for (int n = 0; n < total; ++n)
            if (state[n] == S::Idle &&
                (pick < 0 || last_busy[n] < last_busy[pick] ||
                 (last_busy[n] == last_busy[pick] && n < pick)))
              pick = n;
          state[pick] = S::Sleeping;
          sleep_stack.push_back(pick);
        }
      }
    }

    const int busy = count_state(S::Busy);
    const int sleeping = static_cast<int>(sleep_stack.size());
    const int active = total - sleeping;
    GCSIM_CHECK(busy <= active, "running nodes exceed active nodes");
    report.timeline.push_back({active, busy, sleeping});
    sum_sleeping += sleeping;
    sum_active += active;
    sum_running += busy;
    sum_util_before += static_cast<double>(demand) / static_cast<double>(total);
    sum_util_after += active > 0 ? static_cast<double>(busy) / static_cast<double>(active) : 0.0;
  }

  const double n = static_cast<double>(eval_minutes);
  report.avg_sleeping = sum_sleeping / n;
  report.avg_active = sum_active / n;
  report.avg_running = sum_running / n;
  report.util_before = sum_util_before / n;
  report.util_after = sum_util_after / n;
  const double days = n / 1440.0;
  report.daily_wakeups = days > 0 ? static_cast<double>(report.wake_calls) / days : 0.0;
  report.avg_nodes_per_wake =
      report.wake_calls ? static_cast<double>(report.woken_nodes) /
                              static_cast<double>(report.wake_calls)
                        : 0.0;
  const double hours = n / 60.0;
  report.energy_saved_kwh = energy_savings_kwh(report.avg_sleeping, hours, energy);
  report.energy_saved_kwh_annualized = energy_savings_kwh(report.avg_sleeping, 8760.0, energy);
  return report;
}

std::string ces_report_to_json(const CESReport& r) {
  json doc;
  doc["eval_start"] = r.eval_start;
  doc["eval_end"] = r.eval_end;
  doc["total_nodes"] = r.total_nodes;
  doc["avg_sleeping_nodes"] = r.avg_sleeping;
  doc["avg_active_nodes"] = r.avg_active;
  doc["avg_running_nodes"] = r.avg_running;
  doc["wake_calls"] = r.wake_calls;
  doc["woken_nodes"] = r.woken_nodes;
  doc["daily_wakeups"] = r.daily_wakeups;
  doc["avg_nodes_per_wake"] = r.avg_nodes_per_wake;
  doc["node_util_original"] = r.util_before;
  doc["node_util_ces"] = r.util_after;
  doc["observed_jobs"] = r.observed_jobs;
  doc["affected_jobs"] = r.affected_jobs;
  doc["short_forecasts"] = r.short_forecasts;
  doc["energy_saved_kwh"] = r.energy_saved_kwh;
  doc["energy_saved_kwh_annualized"] = r.energy_saved_kwh_annualized;
  return doc.dump(2) + "\n";
}

std::string ces_timeline_to_csv(const CESReport& r) {
  std::ostringstream os;
  os << "minute,active,running,sleeping\n";
  for (size_t i = 0; i < r.timeline.size(); ++i) {
    os << (r.eval_start + static_cast<int64_t>(i) * 60) << ',' << r.timeline[i][0] << ','
       << r.timeline[i][1] << ',' << r.timeline[i][2] << '\n';
  }
  return os.str();
}

}  // namespace gcsim
