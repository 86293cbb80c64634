#include "gcsim/sim.hpp"

#include <algorithm>
#include <queue>
#include <set>
#include <sstream>

#include "gcsim/csv.hpp"
#include "json.hpp"

namespace gcsim {

using nlohmann::json;

std::vector<std::pair<int, int>> consolidate_allocate(int gpu_num,
                                                      const std::vector<int>& free_gpus,
                                                      int gpus_per_node) {
  GCSIM_CHECK(gpu_num >= 0, "negative gpu demand");
  if (gpu_num == 0) return {};
  std::vector<std::pair<int, int>> placement;

  auto best_fit = [&](int need, const std::vector<char>& taken) {
    int best = -1;
    for (size_t i = 0; i < free_gpus.size(); ++i) {
      if (taken[i] || free_gpus[i] < need) continue;
      if (best < 0 || free_gpus[i] < free_gpus[best]) best = static_cast<int>(i);
    }
    return best;
  };

  std::vector<char> taken(free_gpus.size(), 0);
  if (gpu_num <= gpus_per_node) {
    int n = best_fit(gpu_num, taken);
    if (n < 0) return {};
    placement.emplace_back(n, gpu_num);
    return placement;
  }

  const int full_nodes = gpu_num / gpus_per_node;
  const int remainder = gpu_num % gpus_per_node;
  int found = 0;
  for (size_t i = 0; i < free_gpus.size() && found < full_nodes; ++i) {
    if (free_gpus[i] == gpus_per_node) {
      placement.emplace_back(static_cast<int>(i), gpus_per_node);
      taken[i] = 1;
      ++found;
    }
  }
  if (found < full_nodes) return {};
  if (remainder > 0) {
    int n = best_fit(remainder, taken);
    if (n < 0) return {};
    placement.emplace_back(n, remainder);
  }
  return placement;
}

namespace {

enum EventKind : int { kJobEnd = 0, kJobSubmit = 1, kPeriodicTick = 2 };

struct Event {
  int64_t time;
  int kind;
  uint32_t rank;  // lexicographic rank of job_id, final tie-break
  uint32_t job;
  uint32_t generation;
};

struct EventLater {
  bool operator()(const Event& a, const Event& b) const {
    if (a.time != b.time) return a.time > b.time;
    if (a.kind != b.kind) return a.kind > b.kind;
    return a.rank > b.rank;
  }
};

struct PendKey {
  double priority;
  int64_t submit;
  uint32_t rank;
  uint32_t job;

  bool operator<(const PendKey& o) const {
    if (priority != o.priority) return priority < o.priority;
    if (submit != o.submit) return submit < o.submit;
    return rank < o.rank;
  }
};

struct EngineJob {
  uint32_t src = 0;        // index into the input job list
  uint32_t outcome = 0;    // index into result.outcomes
  int vc = -1;
  int gpu_num = 0;
  int64_t submit = 0;
  int64_t duration = 0;
  double priority = 0.0;
  int64_t remaining = 0;   // duration minus accumulated service
  int64_t seg_start = 0;
  uint32_t generation = 0;
  bool started = false;
  bool running = false;
  bool finished = false;
  std::vector<std::pair<int, int>> placement;  // node ids local to the VC
};

struct VCState {
  std::string name;
  int first_node = 0;  // global node id of the VC's first node
  std::vector<int> free;
  std::set<PendKey> queue;
  std::set<uint32_t> running;  // engine job ids
};

class Engine {
 public:
  Engine(const std::vector<JobRecord>& jobs, const ClusterSpec& cluster,
         const SimOptions& options)
      : jobs_(jobs), cluster_(cluster), opt_(options) {}

  SimResult run();

 private:
  void prepare();
  void compute_priorities();
  void schedule_vc(int vc, int64_t now);
  bool try_preempt_for(uint32_t head, int vc, int64_t now);
  void start_job(uint32_t id, int vc, int64_t now,
                 std::vector<std::pair<int, int>> placement);
  void preempt_job(uint32_t id, int vc, int64_t now);
  void finish_job(uint32_t id, int vc, int64_t now);
  void release(uint32_t id, VCState& vc);

  int64_t remaining_at(const EngineJob& j, int64_t now) const {
    return j.running ? j.remaining - (now - j.seg_start) : j.remaining;
  }

  const std::vector<JobRecord>& jobs_;
  const ClusterSpec& cluster_;
  const SimOptions& opt_;

  SimResult result_;
  std::vector<EngineJob> engine_jobs_;
  std::vector<uint32_t> rank_;  // engine job -> lexicographic rank of job_id
  std::vector<VCState> vcs_;
  std::priority_queue<Event, std::vector<Event>, EventLater> events_;
  HistoryStore history_;
  std::vector<int> cluster_ids_;  // name-cluster id per input job (qssf only)
};

void Engine::prepare() {
  result_.cluster_name = cluster_.name;
  result_.policy = opt_.policy.kind;
  result_.total_gpus = cluster_.total_gpus();
  result_.gpus_per_node = cluster_.gpus_per_node;

  // Replay set: GPU jobs inside the submit window (CPU jobs opt-in).
  std::vector<uint32_t> replay;
  int64_t first_submit = std::numeric_limits<int64_t>::max();
  for (uint32_t i = 0; i < jobs_.size(); ++i) {
    const JobRecord& j = jobs_[i];
    if (!j.is_gpu() && !opt_.include_cpu_jobs) continue;
    if (j.submit_time < opt_.replay_from || j.submit_time >= opt_.replay_to) continue;
    replay.push_back(i);
    first_submit = std::min(first_submit, j.submit_time);
  }
  result_.vc_snapshot_time = opt_.vc_snapshot_time >= 0 ? opt_.vc_snapshot_time
                             : (replay.empty() ? 0 : first_submit);
  result_.vc_nodes = cluster_.vc_snapshot(result_.vc_snapshot_time);

  std::map<std::string, int> vc_index;
  int next_node = 0;
  for (const auto& [name, count] : result_.vc_nodes) {
    VCState vc;
    vc.name = name;
    vc.first_node = next_node;
    vc.free.assign(count, cluster_.gpus_per_node);
    next_node += count;
    vc_index[name] = static_cast<int>(vcs_.size());
    vcs_.push_back(std::move(vc));
  }
  GCSIM_CHECK(next_node <= cluster_.nodes, "VC snapshot exceeds cluster nodes");

  for (uint32_t i : replay) {
    const JobRecord& j = jobs_[i];
    auto it = vc_index.find(j.vc);
    if (it == vc_index.end()) {
      result_.unschedulable.push_back({j.job_id, "unknown VC '" + j.vc + "'"});
      continue;
    }
    const int capacity =
        static_cast<int>(vcs_[it->second].free.size()) * cluster_.gpus_per_node;
    if (j.gpu_num > capacity) {
      result_.unschedulable.push_back(
          {j.job_id, "demand " + std::to_string(j.gpu_num) + " exceeds VC capacity " +
                         std::to_string(capacity)});
      continue;
    }
    EngineJob ej;
    ej.src = i;
    ej.vc = it->second;
    ej.gpu_num = j.gpu_num;
    ej.submit = j.submit_time;
    ej.duration = j.duration;
    ej.remaining = j.duration;
    ej.outcome = static_cast<uint32_t>(result_.outcomes.size());
    engine_jobs_.push_back(std::move(ej));

    JobOutcome out;
    out.job_id = j.job_id;
    out.vc = j.vc;
    out.user = j.user;
    out.gpu_num = j.gpu_num;
    out.submit = j.submit_time;
    out.duration = j.duration;
    result_.outcomes.push_back(std::move(out));
  }

  // Lexicographic job_id rank is the deterministic final tie-break.
  std::vector<uint32_t> order(engine_jobs_.size());
  for (uint32_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
    return jobs_[engine_jobs_[a].src].job_id < jobs_[engine_jobs_[b].src].job_id;
  });
  rank_.resize(engine_jobs_.size());
  for (uint32_t r = 0; r < order.size(); ++r) rank_[order[r]] = r;
}

void Engine::compute_priorities() {
  const PolicyConfig& pc = opt_.policy;
  if (pc.kind == PolicyKind::Qssf && !pc.qssf_oracle && pc.noise_sigma <= 0.0) {
    GCSIM_CHECK(opt_.predictor != nullptr, "qssf needs a model, oracle or noise mode");
    // Shared name-cluster index, extended over the whole trace in submit
    // order; history queries stay cutoff-guarded.
    NameClusterIndex working = opt_.predictor->clusters();
    std::vector<uint32_t> order(jobs_.size());
    for (uint32_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
      return jobs_[a].submit_time < jobs_[b].submit_time;
    });
    cluster_ids_.assign(jobs_.size(), -1);
    for (uint32_t i : order) cluster_ids_[i] = working.assign(jobs_[i].job_name);
    history_.build(jobs_, cluster_ids_);
  }

  for (auto& ej : engine_jobs_) {
    const JobRecord& j = jobs_[ej.src];
    switch (pc.kind) {
      case PolicyKind::Fifo:
        ej.priority = fifo_priority(j);
        break;
      case PolicyKind::Sjf:
        ej.priority = sjf_priority(j);
        break;
      case PolicyKind::Srtf:
        ej.priority = static_cast<double>(j.duration);
        break;
      case PolicyKind::Qssf:
        ej.priority = qssf_priority(j, history_,
                                    cluster_ids_.empty() ? -1 : cluster_ids_[ej.src],
                                    opt_.predictor, pc, j.submit_time);
        break;
    }
    result_.outcomes[ej.outcome].priority = ej.priority;
  }
}

void Engine::start_job(uint32_t id, int vc_id, int64_t now,
                       std::vector<std::pair<int, int>> placement) {
  EngineJob& j = engine_jobs_[id];
  VCState& vc = vcs_[vc_id];
  int allocated = 0;
  for (const auto& [node, gpus] : placement) {
    vc.free[node] -= gpus;
    GCSIM_CHECK(vc.free[node] >= 0, "node over-allocated");
    allocated += gpus;
  }
  GCSIM_CHECK(allocated == j.gpu_num, "gang violation: partial allocation");
  j.placement = std::move(placement);
  j.running = true;
  j.seg_start = now;
  if (!j.started) {
    j.started = true;
    result_.outcomes[j.outcome].start = now;
  }
  vc.running.insert(id);
  events_.push({now + j.remaining, kJobEnd, rank_[id], id, j.generation});
}

void Engine::release(uint32_t id, VCState& vc) {
  EngineJob& j = engine_jobs_[id];
  for (const auto& [node, gpus] : j.placement) {
    vc.free[node] += gpus;
    GCSIM_CHECK(vc.free[node] <= cluster_.gpus_per_node, "node freed past capacity");
  }
}

void Engine::preempt_job(uint32_t id, int vc_id, int64_t now) {
  EngineJob& j = engine_jobs_[id];
  VCState& vc = vcs_[vc_id];
  GCSIM_CHECK(j.running, "preempting a non-running job");
  release(id, vc);
  int64_t served = now - j.seg_start;
  j.remaining -= served;
  GCSIM_CHECK(j.remaining > 0, "preempted a finished job");
  if (served > 0)
    result_.outcomes[j.outcome].segments.push_back({j.seg_start, now});
  j.running = false;
  ++j.generation;  // stale end event will be dropped
  vc.running.erase(id);
  JobOutcome& out = result_.outcomes[j.outcome];
  out.priority = static_cast<double>(j.remaining);
  vc.queue.insert({static_cast<double>(j.remaining), j.submit, rank_[id], id});
}

void Engine::finish_job(uint32_t id, int vc_id, int64_t now) {
  EngineJob& j = engine_jobs_[id];
  VCState& vc = vcs_[vc_id];
  GCSIM_CHECK(j.running && !j.finished, "finishing a job that is not running");
  release(id, vc);
  JobOutcome& out = result_.outcomes[j.outcome];
  out.segments.push_back({j.seg_start, now});
  out.end = now;
  out.placement = j.placement;
  j.running = false;
  j.finished = true;
  j.remaining = 0;
  vc.running.erase(id);
}

bool Engine::try_preempt_for(uint32_t head, int vc_id, int64_t now) {
  EngineJob& h = engine_jobs_[head];
  VCState& vc = vcs_[vc_id];
  const int64_t head_remaining = remaining_at(h, now);

  // Victims must have strictly more remaining work; take the largest first.
  std::vector<uint32_t> victims(vc.running.begin(), vc.running.end());
  std::erase_if(victims, [&](uint32_t v) {
    return remaining_at(engine_jobs_[v], now) <= head_remaining;
  });
  std::sort(victims.begin(), victims.end(), [&](uint32_t a, uint32_t b) {
    int64_t ra = remaining_at(engine_jobs_[a], now);
    int64_t rb = remaining_at(engine_jobs_[b], now);
    if (ra != rb) return ra > rb;
    return rank_[a] < rank_[b];
  });
  if (victims.empty()) return false;

  std::vector<int> virtual_free = vc.free;
  std::vector<uint32_t> chosen;
  for (uint32_t v : victims) {
    for (const auto& [node, gpus] : engine_jobs_[v].placement) virtual_free[node] += gpus;
    chosen.push_back(v);
    if (!consolidate_allocate(h.gpu_num, virtual_free, cluster_.gpus_per_node).empty()) {
      for (uint32_t c : chosen) preempt_job(c, vc_id, now);
      return true;
    }
  }
  return false;
}

void Engine::schedule_vc(int vc_id, int64_t now) {
  VCState& vc = vcs_[vc_id];
  while (!vc.queue.empty()) {
    const PendKey head = *vc.queue.begin();
    EngineJob& j = engine_jobs_[head.job];
    auto placement = consolidate_allocate(j.gpu_num, vc.free, cluster_.gpus_per_node);
    if (!placement.empty() || j.gpu_num == 0) {
      vc.queue.erase(vc.queue.begin());
      start_job(head.job, vc_id, now, std::move(placement));
      continue;
    }
    if (opt_.policy.kind == PolicyKind::Srtf && try_preempt_for(head.job, vc_id, now))
      continue;  // head fits now; preempted jobs re-entered the queue behind it
    break;       // head-of-line blocking, no backfill
  }
}

SimResult Engine::run() {
  prepare();
  compute_priorities();

  for (uint32_t id = 0; id < engine_jobs_.size(); ++id) {
    events_.push({engine_jobs_[id].submit, kJobSubmit, rank_[id], id,
                  engine_jobs_[id].generation});
  }

  // All events sharing a timestamp are applied before any scheduling pass:
  // ends release first, then same-instant submits enter their queues, then
  // each touched VC schedules once. Zero-duration starts can emit new end
  // events at the same instant, so the drain/schedule cycle repeats until the
  // timestamp is exhausted.
  std::set<int> touched;
  while (!events_.empty()) {
    const int64_t t = events_.top().time;
    while (!events_.empty() && events_.top().time == t) {
      while (!events_.empty() && events_.top().time == t) {
        Event e = events_.top();
        events_.pop();
        EngineJob& j = engine_jobs_[e.job];
        if (e.kind == kJobEnd) {
          if (e.generation != j.generation || !j.running) continue;  // preempted since
          finish_job(e.job, j.vc, t);
        } else {
          vcs_[j.vc].queue.insert({j.priority, j.submit, rank_[e.job], e.job});
        }
        touched.insert(j.vc);
      }
      for (int vc : touched) schedule_vc(vc, t);
      touched.clear();
    }
  }

  for (const auto& j : engine_jobs_)
    GCSIM_CHECK(j.finished, "job never finished; scheduler wedged");
  return std::move(result_);
}

}  // namespace

SimResult run_simulation(const std::vector<JobRecord>& jobs, const ClusterSpec& cluster,
                         const SimOptions& options) {
  GCSIM_CHECK(cluster.gpus_per_node > 0, "cluster gpus_per_node must be positive");
  Engine engine(jobs, cluster, options);
  return engine.run();
}

std::string SimResult::to_csv() const {
  std::ostringstream os;
  os << "job_id,submit,start,end,gpu_num,vc\n";
  for (const auto& o : outcomes) {
    csv::write_record(os, {o.job_id, std::to_string(o.submit), std::to_string(o.start),
                           std::to_string(o.end), std::to_string(o.gpu_num), o.vc});
  }
  return os.str();
}

MetricsSummary compute_metrics(const SimResult& result, int64_t queue_threshold) {
  MetricsSummary m;
  m.queue_threshold = queue_threshold;
  m.total_gpus = result.total_gpus;

  auto account = [&](VCMetrics& vm, const JobOutcome& o) {
    vm.jobs += 1;
    vm.avg_jct += static_cast<double>(o.end - o.submit);
    vm.avg_queuing += static_cast<double>(o.start - o.submit);
    vm.avg_duration += static_cast<double>(o.duration);
    if (o.start - o.submit > queue_threshold) vm.queued_jobs += 1;
  };
  for (const auto& o : result.outcomes) {
    account(m.cluster, o);
    account(m.per_vc[o.vc], o);
  }
  auto finalize = [](VCMetrics& vm) {
    if (vm.jobs == 0) return;
    vm.avg_jct /= static_cast<double>(vm.jobs);
    vm.avg_queuing /= static_cast<double>(vm.jobs);
    vm.avg_duration /= static_cast<double>(vm.jobs);
  };
  finalize(m.cluster);
  for (auto& [vc, vm] : m.per_vc) finalize(vm);

  // Per-minute mean busy GPUs via a sweep over segment boundaries.
  std::vector<std::pair<int64_t, int>> deltas;
  int64_t t_min = std::numeric_limits<int64_t>::max(), t_max = 0;
  for (const auto& o : result.outcomes) {
    for (const auto& seg : o.segments) {
      if (seg.end <= seg.start) continue;
      deltas.emplace_back(seg.start, o.gpu_num);
      deltas.emplace_back(seg.end, -o.gpu_num);
      t_min = std::min(t_min, seg.start);
      t_max = std::max(t_max, seg.end);
    }
  }
  if (deltas.empty()) return m;
  std::sort(deltas.begin(), deltas.end());
  m.util_start = (t_min / 60) * 60;
  const size_t minutes = static_cast<size_t>((t_max - m.util_start + 59) / 60);
  m.busy_gpus.assign(minutes, 0.0);
  size_t di = 0;
  int level = 0;
  int64_t t = m.util_start;
  while (t < t_max) {
    while (di < deltas.size() && deltas[di].first <= t) level += deltas[di++].second;
    int64_t next_change = di < deltas.size() ? deltas[di].first : t_max;
    int64_t stretch_end = std::min(next_change, t_max);
    while (t < stretch_end) {
      int64_t minute_end = (t / 60) * 60 + 60;
      int64_t take = std::min(stretch_end, minute_end) - t;
      m.busy_gpus[static_cast<size_t>((t - m.util_start) / 60)] +=
          static_cast<double>(level) * static_cast<double>(take) / 60.0;
      t += take;
    }
  }
  return m;
}

std::string utilization_to_csv(const MetricsSummary& m) {
  std::ostringstream os;
  os << "t,busy_gpus,total_gpus\n";
  char buf[32];
  for (size_t i = 0; i < m.busy_gpus.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.3f", m.busy_gpus[i]);
    os << (m.util_start + static_cast<int64_t>(i) * 60) << ',' << buf << ','
       << m.total_gpus << '\n';
  }
  return os.str();
}

std::string metrics_to_json(const SimResult& result, const MetricsSummary& m) {
  auto vc_json = [](const VCMetrics& vm) {
    return json{{"jobs", vm.jobs},
                {"avg_jct", vm.avg_jct},
                {"avg_queuing", vm.avg_queuing},
                {"avg_duration", vm.avg_duration},
                {"queued_jobs", vm.queued_jobs}};
  };
  json doc;
  doc["cluster"] = result.cluster_name;
  doc["policy"] = policy_name(result.policy);
  doc["total_gpus"] = result.total_gpus;
  doc["vc_snapshot_time"] = result.vc_snapshot_time;
  doc["queue_threshold"] = m.queue_threshold;
  doc["replayed_jobs"] = result.outcomes.size();
  doc["unschedulable_jobs"] = result.unschedulable.size();
  doc["summary"] = vc_json(m.cluster);
  json per_vc = json::object();
  for (const auto& [vc, vm] : m.per_vc) per_vc[vc] = vc_json(vm);
  doc["per_vc"] = std::move(per_vc);
  json unsched = json::array();
  for (const auto& u : result.unschedulable)
    unsched.push_back({{"job_id", u.job_id}, {"reason", u.reason}});
  doc["unschedulable"] = std::move(unsched);
  return doc.dump(2) + "\n";
}

}  // namespace gcsim
