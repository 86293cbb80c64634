#include <cmath>
#include <set>

#include "../support/hand_traces.hpp"
#include "doctest.h"
#include "gcsim/sim.hpp"

using namespace gcsim;

namespace {

ClusterSpec one_vc_cluster(int nodes, int gpn) {
  ClusterSpec c;
  c.name = "test";
  c.nodes = nodes;
  c.gpus_per_node = gpn;
  c.vcs.push_back({"vcA", nodes, 0});
  return c;
}

SimOptions options_for(PolicyKind kind) {
  SimOptions o;
  o.policy.kind = kind;
  if (kind == PolicyKind::Qssf) o.policy.qssf_oracle = true;
  return o;
}

}  // namespace

TEST_CASE("consolidate_allocate") {
  SUBCASE("16-gpu job takes two fully free nodes") {
    auto p = consolidate_allocate(16, {8, 8, 4}, 8);
    REQUIRE(p.size() == 2);
    CHECK(p[0] == std::pair<int, int>{0, 8});
    CHECK(p[1] == std::pair<int, int>{1, 8});
  }
  SUBCASE("single-node jobs use best fit") {
    auto p = consolidate_allocate(4, {2, 5, 8}, 8);
    REQUIRE(p.size() == 1);
    CHECK(p[0] == std::pair<int, int>{1, 4});  // 5 is the smallest sufficient
  }
  SUBCASE("blocked when nothing fits") {
    CHECK(consolidate_allocate(1, {0, 0}, 8).empty());
    CHECK(consolidate_allocate(16, {8, 4, 4}, 8).empty());  // only one fully free node
  }
  SUBCASE("remainder node is best fit among the rest") {
    auto p = consolidate_allocate(10, {8, 8, 3, 8}, 8);
    REQUIRE(p.size() == 2);
    CHECK(p[0] == std::pair<int, int>{0, 8});
    CHECK(p[1] == std::pair<int, int>{2, 2});  // 3 free beats another full node
  }
  SUBCASE("zero gpus is an empty placement") {
    CHECK(consolidate_allocate(0, {0}, 8).empty());
  }
}

TEST_CASE("empty trace yields an empty result") {
  auto result = run_simulation({}, one_vc_cluster(1, 8), options_for(PolicyKind::Fifo));
  CHECK(result.outcomes.empty());
  CHECK(result.unschedulable.empty());
  auto m = compute_metrics(result, 0);
  CHECK(m.cluster.jobs == 0);
  CHECK(m.busy_gpus.empty());
}

TEST_CASE("hand-computed traces replay exactly under all four policies") {
  for (const auto& inst : hand_traces::instances()) {
    auto jobs = hand_traces::to_jobs(inst);
    auto cluster = hand_traces::to_cluster(inst);
    for (const auto& [policy, expected] : inst.expected) {
      CAPTURE(inst.name);
      CAPTURE(policy_name(policy));
      auto result = run_simulation(jobs, cluster, options_for(policy));
      REQUIRE(result.outcomes.size() == expected.size());
      std::map<std::string, const JobOutcome*> by_id;
      for (const auto& o : result.outcomes) by_id[o.job_id] = &o;
      for (const auto& e : expected) {
        CAPTURE(e.id);
        REQUIRE(by_id.count(e.id));
        CHECK(by_id[e.id]->start == e.start);
        CHECK(by_id[e.id]->end == e.end);
      }
    }
  }
}

TEST_CASE("spec metrics for the two-job hand trace") {
  const auto& inst = hand_traces::instances()[0];  // two_8gpu_jobs
  auto jobs = hand_traces::to_jobs(inst);
  auto cluster = hand_traces::to_cluster(inst);

  auto fifo = compute_metrics(run_simulation(jobs, cluster, options_for(PolicyKind::Fifo)), 0);
  CHECK(fifo.cluster.avg_jct == doctest::Approx(105.0));
  CHECK(fifo.cluster.avg_queuing == doctest::Approx(50.0));
  CHECK(fifo.cluster.queued_jobs == 1);

  auto sjf = compute_metrics(run_simulation(jobs, cluster, options_for(PolicyKind::Sjf)), 0);
  CHECK(sjf.cluster.avg_jct == doctest::Approx(60.0));

  // threshold excludes short delays from the queued count
  auto loose = compute_metrics(run_simulation(jobs, cluster, options_for(PolicyKind::Fifo)), 200);
  CHECK(loose.cluster.queued_jobs == 0);
}

TEST_CASE("all jobs starting at submit means zero queuing") {
  std::vector<JobRecord> jobs;
  for (int i = 0; i < 4; ++i) {
    JobRecord j;
    j.job_id = "j" + std::to_string(i);
    j.vc = "vcA";
    j.user = "u";
    j.gpu_num = 1;
    j.submit_time = i * 10;
    j.duration = 5;
    jobs.push_back(j);
  }
  auto m = compute_metrics(
      run_simulation(jobs, one_vc_cluster(1, 8), options_for(PolicyKind::Fifo)), 0);
  CHECK(m.cluster.avg_queuing == 0.0);
  CHECK(m.cluster.queued_jobs == 0);
}

TEST_CASE("per-minute utilization averages busy gpus") {
  // one 8-gpu job for one hour on a 16-gpu cluster: fraction 0.5 per minute
  std::vector<JobRecord> jobs(1);
  jobs[0].job_id = "j";
  jobs[0].vc = "vcA";
  jobs[0].gpu_num = 8;
  jobs[0].submit_time = 0;
  jobs[0].duration = 3600;
  auto result = run_simulation(jobs, one_vc_cluster(2, 8), options_for(PolicyKind::Fifo));
  auto m = compute_metrics(result, 0);
  REQUIRE(m.busy_gpus.size() == 60);
  for (double b : m.busy_gpus) CHECK(b == doctest::Approx(8.0));
  CHECK(m.total_gpus == 16);
}

TEST_CASE("unschedulable jobs are excluded and reported") {
  std::vector<JobRecord> jobs(3);
  jobs[0].job_id = "fits";
  jobs[0].vc = "vcA";
  jobs[0].gpu_num = 8;
  jobs[0].duration = 10;
  jobs[1].job_id = "too_big";
  jobs[1].vc = "vcA";
  jobs[1].gpu_num = 99;
  jobs[1].duration = 10;
  jobs[2].job_id = "wrong_vc";
  jobs[2].vc = "nope";
  jobs[2].gpu_num = 1;
  jobs[2].duration = 10;
  auto result = run_simulation(jobs, one_vc_cluster(1, 8), options_for(PolicyKind::Fifo));
  CHECK(result.outcomes.size() == 1);
  REQUIRE(result.unschedulable.size() == 2);
  CHECK(result.unschedulable[0].job_id == "too_big");
  CHECK(result.unschedulable[1].job_id == "wrong_vc");
}

TEST_CASE("cpu jobs are skipped by default and replayed on request") {
  std::vector<JobRecord> jobs(2);
  jobs[0].job_id = "gpu";
  jobs[0].vc = "vcA";
  jobs[0].gpu_num = 1;
  jobs[0].duration = 10;
  jobs[1].job_id = "cpu";
  jobs[1].vc = "vcA";
  jobs[1].gpu_num = 0;
  jobs[1].duration = 10;
  auto skip = run_simulation(jobs, one_vc_cluster(1, 8), options_for(PolicyKind::Fifo));
  CHECK(skip.outcomes.size() == 1);
  SimOptions with_cpu = options_for(PolicyKind::Fifo);
  with_cpu.include_cpu_jobs = true;
  auto both = run_simulation(jobs, one_vc_cluster(1, 8), with_cpu);
  CHECK(both.outcomes.size() == 2);
}

namespace {

SynthParams property_params(uint64_t seed) {
  SynthParams p;
  p.seed = seed;
  p.job_count = 40;
  p.span_seconds = 3600;
  p.gpu_probs = {{0, 0.1}, {1, 0.4}, {2, 0.2}, {4, 0.1}, {8, 0.1}, {16, 0.1}};
  p.dur_log_mean = 4.0;
  p.dur_log_sigma = 1.2;
  p.vcs = {"vcA", "vcB"};
  return p;
}

ClusterSpec property_cluster() {
  ClusterSpec c;
  c.name = "prop";
  c.nodes = 3;
  c.gpus_per_node = 8;
  c.vcs.push_back({"vcA", 2, 0});
  c.vcs.push_back({"vcB", 1, 0});
  return c;
}

// Capacity + gang check from recorded segments and placements.
void check_invariants(const SimResult& result, PolicyKind kind) {
  for (const auto& o : result.outcomes) {
    CHECK(o.start >= o.submit);
    int placed = 0;
    for (const auto& [node, gpus] : o.placement) {
      CHECK(gpus >= 1);
      placed += gpus;
    }
    if (o.gpu_num > 0) CHECK(placed == o.gpu_num);  // gang all-or-nothing
    int64_t service = 0;
    for (const auto& seg : o.segments) service += seg.end - seg.start;
    CHECK(service == o.duration);  // conservation, also for preempted jobs
    if (kind != PolicyKind::Srtf) CHECK(o.end - o.start == o.duration);
  }
  // capacity: sweep allocation deltas per node
  std::map<std::pair<std::string, int>, std::vector<std::pair<int64_t, int>>> per_node;
  for (const auto& o : result.outcomes) {
    if (o.segments.size() == 1 && o.gpu_num > 0) {
      for (const auto& [node, gpus] : o.placement) {
        per_node[{o.vc, node}].push_back({o.start, gpus});
        per_node[{o.vc, node}].push_back({o.end, -gpus});
      }
    }
  }
  for (auto& [key, deltas] : per_node) {
    std::sort(deltas.begin(), deltas.end());
    int level = 0;
    for (auto& [t, d] : deltas) {
      level += d;
      CHECK(level <= result.gpus_per_node);
      CHECK(level >= 0);
    }
  }
}

}  // namespace

TEST_CASE("randomized traces satisfy capacity, gang, conservation and determinism") {
  for (uint64_t seed = 1; seed <= 60; ++seed) {
    auto jobs = synth_trace(property_params(seed));
    auto cluster = property_cluster();
    for (PolicyKind kind :
         {PolicyKind::Fifo, PolicyKind::Sjf, PolicyKind::Srtf, PolicyKind::Qssf}) {
      CAPTURE(seed);
      CAPTURE(policy_name(kind));
      auto result = run_simulation(jobs, cluster, options_for(kind));
      check_invariants(result, kind);

      auto again = run_simulation(jobs, cluster, options_for(kind));
      CHECK(result.to_csv() == again.to_csv());  // byte-identical replay

      auto m = compute_metrics(result, 0);
      if (kind != PolicyKind::Srtf) {
        // accounting identity, exact in doubles for integer-second sums
        CHECK(m.cluster.avg_jct - m.cluster.avg_queuing ==
              doctest::Approx(m.cluster.avg_duration).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("fifo start order never inverts submit order within a VC") {
  for (uint64_t seed = 100; seed < 120; ++seed) {
    auto jobs = synth_trace(property_params(seed));
    auto result =
        run_simulation(jobs, property_cluster(), options_for(PolicyKind::Fifo));
    std::map<std::string, std::vector<const JobOutcome*>> by_vc;
    for (const auto& o : result.outcomes) by_vc[o.vc].push_back(&o);
    for (auto& [vc, outs] : by_vc) {
      std::sort(outs.begin(), outs.end(), [](const JobOutcome* a, const JobOutcome* b) {
        if (a->start != b->start) return a->start < b->start;
        return a->job_id < b->job_id;
      });
      for (size_t i = 1; i < outs.size(); ++i)
        CHECK(outs[i - 1]->submit <= outs[i]->submit);
    }
  }
}

TEST_CASE("qssf with uniform gpu counts equals sjf (argsort invariance)") {
  // with a perfect predictor the qssf priority is gpu_num * duration; for a
  // uniform gpu count that is sjf's priority scaled by a positive constant
  for (int gpus : {1, 8}) {
    SynthParams p = property_params(7);
    p.gpu_probs = {{gpus, 1.0}};
    auto jobs = synth_trace(p);
    auto sjf = run_simulation(jobs, property_cluster(), options_for(PolicyKind::Sjf));
    auto qssf = run_simulation(jobs, property_cluster(), options_for(PolicyKind::Qssf));
    CHECK(sjf.to_csv() == qssf.to_csv());
  }
}

TEST_CASE("qssf priority formula") {
  HistoryStore empty_history;
  JobRecord j;
  j.job_id = "x";
  j.user = "u";
  j.gpu_num = 4;
  j.duration = 100;

  PolicyConfig cfg;
  cfg.kind = PolicyKind::Qssf;
  cfg.qssf_oracle = true;

  SUBCASE("oracle merges to N times duration") {
    CHECK(qssf_priority(j, empty_history, -1, nullptr, cfg, 0) == doctest::Approx(400.0));
  }
  SUBCASE("monotone in gpu count") {
    JobRecord one = j, eight = j;
    one.gpu_num = 1;
    eight.gpu_num = 8;
    double p1 = qssf_priority(one, empty_history, -1, nullptr, cfg, 0);
    double p8 = qssf_priority(eight, empty_history, -1, nullptr, cfg, 0);
    CHECK(p8 == doctest::Approx(8.0 * p1));  // 8-gpu job ranks 8x later
  }
  SUBCASE("noise mode is deterministic per job id") {
    PolicyConfig noisy;
    noisy.kind = PolicyKind::Qssf;
    noisy.noise_sigma = 1.0;
    noisy.noise_seed = 42;
    double a = qssf_priority(j, empty_history, -1, nullptr, noisy, 0);
    double b = qssf_priority(j, empty_history, -1, nullptr, noisy, 0);
    CHECK(a == b);
    CHECK(a > 0.0);
    JobRecord other = j;
    other.job_id = "y";
    CHECK(qssf_priority(other, empty_history, -1, nullptr, noisy, 0) != a);
  }
}

TEST_CASE("qssf lambda endpoints and merging arithmetic") {
  // build a tiny real predictor so P_R and P_M differ
  std::vector<JobRecord> history;
  for (int i = 0; i < 30; ++i) {
    JobRecord h;
    h.job_id = "h" + std::to_string(i);
    h.user = "alice";
    h.vc = "vcA";
    h.job_name = "steady_job";
    h.gpu_num = 1;
    h.cpu_num = 6;
    h.submit_time = i * 1000;
    h.duration = 100;
    h.start_time = h.submit_time;
    h.end_time = h.submit_time + 100;
    history.push_back(h);
  }
  PredictorConfig pc;
  pc.gbdt.rounds = 5;
  auto predictor = DurationPredictor::train(history, 1'000'000, pc);

  NameClusterIndex working = predictor.clusters();
  std::vector<int> ids;
  for (const auto& h : history) ids.push_back(working.assign(h.job_name));
  HistoryStore store;
  store.build(history, ids);

  JobRecord q;
  q.job_id = "q";
  q.user = "alice";
  q.vc = "vcA";
  q.job_name = "steady_job";
  q.gpu_num = 4;
  q.cpu_num = 24;
  q.submit_time = 2'000'000;
  q.duration = 500;  // oracle unused here
  int cluster = working.assign(q.job_name);

  double p_r = store.rolling_estimate(q, cluster, q.submit_time, pc.rolling);
  double p_m = predictor.predict_ml(q, cluster);

  PolicyConfig cfg;
  cfg.kind = PolicyKind::Qssf;
  for (double lambda : {0.0, 0.5, 1.0}) {
    cfg.lambda = lambda;
    double got = qssf_priority(q, store, cluster, &predictor, cfg, q.submit_time);
    CHECK(got == doctest::Approx(4.0 * (lambda * p_r + (1 - lambda) * p_m)));
  }
}

TEST_CASE("replay window filters by submit time") {
  std::vector<JobRecord> jobs;
  for (int i = 0; i < 10; ++i) {
    JobRecord j;
    j.job_id = "j" + std::to_string(i);
    j.vc = "vcA";
    j.gpu_num = 1;
    j.submit_time = i * 100;
    j.duration = 10;
    jobs.push_back(j);
  }
  SimOptions o = options_for(PolicyKind::Fifo);
  o.replay_from = 300;
  o.replay_to = 700;
  auto result = run_simulation(jobs, one_vc_cluster(1, 8), o);
  CHECK(result.outcomes.size() == 4);  // submits 300,400,500,600
}
