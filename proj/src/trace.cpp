#include "gcsim/trace.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "gcsim/csv.hpp"
#include "json.hpp"

namespace gcsim {

using nlohmann::json;

const char* status_name(JobStatus s) {
  switch (s) {
    case JobStatus::Completed: return "COMPLETED";
    case JobStatus::Canceled: return "CANCELLED";
    case JobStatus::Failed: return "FAILED";
  }
  return "FAILED";
}

std::optional<JobStatus> parse_status(std::string_view s) {
  std::string u = to_lower(trim(s));
  // slurm appends context to some states, e.g. "CANCELLED by 1234"
  if (u.rfind("completed", 0) == 0 || u == "pass") return JobStatus::Completed;
  if (u.rfind("cancelled", 0) == 0 || u.rfind("canceled", 0) == 0 || u == "killed")
    return JobStatus::Canceled;
  // timeout and node fail collapse into failed
  if (u.rfind("failed", 0) == 0 || u.rfind("timeout", 0) == 0 ||
      u.rfind("node_fail", 0) == 0 || u.rfind("node fail", 0) == 0)
    return JobStatus::Failed;
  return std::nullopt;
}

namespace {

const char* kCanonicalHeader =
    "job_id,user,vc,job_name,gpu_num,cpu_num,status,submit_time,start_time,end_time,duration";

// Field-level validation shared by all adapters. Returns an error message or
// empty string.
std::string check_record(const JobRecord& j) {
  if (j.job_id.empty()) return "empty job_id";
  if (j.gpu_num < 0) return "negative gpu_num";
  if (j.cpu_num < 0) return "negative cpu_num";
  if (j.duration < 0) return "negative duration";
  if (j.start_time && !j.end_time) return "start_time without end_time";
  if (j.end_time && !j.start_time) return "end_time without start_time";
  if (j.start_time) {
    if (j.submit_time > *j.start_time) return "start before submit";
    if (*j.start_time > *j.end_time) return "negative duration";
    if (*j.end_time - *j.start_time != j.duration) return "duration mismatch";
  }
  return {};
}

struct HeaderMap {
  std::unordered_map<std::string, size_t> index;

  std::optional<size_t> find(std::initializer_list<const char*> aliases) const {
    for (const char* a : aliases) {
      auto it = index.find(a);
      if (it != index.end()) return it->second;
    }
    return std::nullopt;
  }
};

HeaderMap map_header(const std::vector<std::string>& fields) {
  HeaderMap hm;
  for (size_t i = 0; i < fields.size(); ++i) hm.index[to_lower(trim(fields[i]))] = i;
  return hm;
}

std::string join_row(const std::vector<std::string>& fields) {
  std::ostringstream os;
  csv::write_record(os, fields);
  std::string s = os.str();
  if (!s.empty() && s.back() == '\n') s.pop_back();
  return s;
}

}  // namespace

ParsedTrace parse_job_log(std::istream& in) {
  csv::Reader reader(in);
  std::vector<std::string> fields;
  if (!reader.read_record(&fields)) throw ParseError("empty job log");
  if (join_row(fields) != kCanonicalHeader)
    throw ParseError("malformed header, expected: " + std::string(kCanonicalHeader));

  ParsedTrace out;
  std::unordered_set<std::string> seen_ids;
  while (reader.read_record(&fields)) {
    size_t line = reader.line_number();
    if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
    auto reject = [&](const std::string& why) {
      out.rejects.push_back({line, why, join_row(fields)});
    };
    if (fields.size() != 11) {
      reject("expected 11 fields, got " + std::to_string(fields.size()));
      continue;
    }
    JobRecord j;
    j.job_id = fields[0];
    j.user = fields[1];
    j.vc = fields[2];
    j.job_name = fields[3];
    auto gpu = parse_i64(fields[4]);
    auto cpu = parse_i64(fields[5]);
    auto status = parse_status(fields[6]);
    auto submit = parse_i64(fields[7]);
    auto dur = parse_i64(fields[10]);
    if (!gpu) { reject("unparsable gpu_num"); continue; }
    if (!cpu) { reject("unparsable cpu_num"); continue; }
    if (!status) { reject("unknown status '" + fields[6] + "'"); continue; }
    if (!submit) { reject("unparsable submit_time"); continue; }
    if (!dur) { reject("unparsable duration"); continue; }
    j.gpu_num = static_cast<int>(*gpu);
    j.cpu_num = static_cast<int>(*cpu);
    j.status = *status;
    j.submit_time = *submit;
    j.duration = *dur;
    if (!trim(fields[8]).empty()) {
      auto v = parse_i64(fields[8]);
      if (!v) { reject("unparsable start_time"); continue; }
      j.start_time = *v;
    }
    if (!trim(fields[9]).empty()) {
      auto v = parse_i64(fields[9]);
      if (!v) { reject("unparsable end_time"); continue; }
      j.end_time = *v;
    }
    std::string err = check_record(j);
    if (!err.empty()) { reject(err); continue; }
    if (!seen_ids.insert(j.job_id).second) { reject("duplicate job_id"); continue; }
    out.jobs.push_back(std::move(j));
  }
  return out;
}

std::string serialize_job_row(const JobRecord& j) {
  std::vector<std::string> fields = {
      j.job_id,
      j.user,
      j.vc,
      j.job_name,
      std::to_string(j.gpu_num),
      std::to_string(j.cpu_num),
      status_name(j.status),
      std::to_string(j.submit_time),
      j.start_time ? std::to_string(*j.start_time) : "",
      j.end_time ? std::to_string(*j.end_time) : "",
      std::to_string(j.duration)};
  return join_row(fields);
}

void write_job_log(std::ostream& out, const std::vector<JobRecord>& jobs) {
  out << kCanonicalHeader << '\n';
  for (const auto& j : jobs) out << serialize_job_row(j) << '\n';
}

ParsedTrace parse_helios_log(std::istream& in) {
  csv::Reader reader(in);
  std::vector<std::string> fields;
  if (!reader.read_record(&fields)) throw ParseError("empty helios log");
  HeaderMap hm = map_header(fields);

  auto id_col = hm.find({"job_id", "jobid", "id"});
  auto user_col = hm.find({"user", "user_id", "user_name"});
  auto vc_col = hm.find({"vc", "vc_name", "virtual_cluster"});
  auto name_col = hm.find({"job_name", "jobname", "name"});
  auto gpu_col = hm.find({"gpu_num", "num_gpus", "gpus", "gpu"});
  auto cpu_col = hm.find({"cpu_num", "num_cpus", "cpus", "cpu"});
  auto status_col = hm.find({"status", "state"});
  auto submit_col = hm.find({"submit_time", "submitted_time", "submit"});
  auto start_col = hm.find({"start_time", "start"});
  auto end_col = hm.find({"end_time", "end"});
  auto dur_col = hm.find({"duration", "runtime", "run_time"});
  if (!id_col || !user_col || !gpu_col || !status_col || !submit_col)
    throw ParseError("helios log header missing required columns");

  ParsedTrace out;
  std::unordered_set<std::string> seen_ids;
  auto get = [&](std::optional<size_t> col) -> std::string {
    return col && *col < fields.size() ? fields[*col] : std::string();
  };
  while (reader.read_record(&fields)) {
    size_t line = reader.line_number();
    if (fields.size() <= 1) continue;
    auto reject = [&](const std::string& why) {
      out.rejects.push_back({line, why, join_row(fields)});
    };
    JobRecord j;
    j.job_id = trim(get(id_col));
    j.user = trim(get(user_col));
    j.vc = trim(get(vc_col));
    j.job_name = get(name_col);
    auto gpu = parse_i64(get(gpu_col));
    auto status = parse_status(get(status_col));
    auto submit = parse_timestamp(get(submit_col));
    if (!gpu) { reject("unparsable gpu_num"); continue; }
    if (!status) { reject("unknown status '" + get(status_col) + "'"); continue; }
    if (!submit) { reject("unparsable submit_time"); continue; }
    j.gpu_num = static_cast<int>(*gpu);
    j.status = *status;
    j.submit_time = *submit;
    if (auto cpu = parse_i64(get(cpu_col))) j.cpu_num = static_cast<int>(*cpu);
    if (auto st = parse_timestamp(get(start_col))) j.start_time = *st;
    if (auto et = parse_timestamp(get(end_col))) j.end_time = *et;
    if (j.start_time && j.end_time) {
      j.duration = *j.end_time - *j.start_time;
    } else if (auto d = parse_i64(get(dur_col))) {
      j.duration = *d;
    }
    std::string err = check_record(j);
    if (!err.empty()) { reject(err); continue; }
    if (!seen_ids.insert(j.job_id).second) { reject("duplicate job_id"); continue; }
    out.jobs.push_back(std::move(j));
  }
  return out;
}

ParsedTrace parse_philly_log(std::istream& in, bool merge_attempts) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(std::string("philly log: ") + e.what());
  }
  if (!doc.is_array()) throw ParseError("philly log: expected a JSON array of jobs");

  ParsedTrace out;
  auto ts = [](const json& v) -> std::optional<int64_t> {
    if (v.is_number()) return v.get<int64_t>();
    if (v.is_string()) return parse_timestamp(v.get<std::string>());
    return std::nullopt;
  };
  size_t idx = 0;
  for (const auto& item : doc) {
    ++idx;
    auto reject = [&](const std::string& why) {
      out.rejects.push_back({idx, why, item.dump()});
    };
    std::string jobid = item.value("jobid", "");
    if (jobid.empty()) { reject("missing jobid"); continue; }
    auto status = parse_status(item.value("status", ""));
    if (!status) { reject("unknown status"); continue; }
    auto submit = ts(item.value("submitted_time", json()));
    if (!submit) { reject("unparsable submitted_time"); continue; }

    std::string user = item.value("user", "");
    std::string vc = item.value("vc", "");
    const json& attempts = item.contains("attempts") ? item["attempts"] : json::array();

    auto attempt_gpus = [](const json& att) {
      int g = 0;
      if (att.contains("detail") && att["detail"].is_array()) {
        for (const auto& node : att["detail"]) {
          if (node.contains("gpus") && node["gpus"].is_array())
            g += static_cast<int>(node["gpus"].size());
        }
      }
      return g;
    };

    auto emit = [&](const std::string& id, std::optional<int64_t> st,
                    std::optional<int64_t> et, int gpus) {
      JobRecord j;
      j.job_id = id;
      j.user = user;
      j.vc = vc;
      j.gpu_num = gpus;
      j.status = *status;
      j.submit_time = *submit;
      if (st && et && *et >= *st && *st >= *submit) {
        j.start_time = st;
        j.end_time = et;
        j.duration = *et - *st;
      }
      out.jobs.push_back(std::move(j));
    };

    if (merge_attempts || attempts.size() <= 1) {
      std::optional<int64_t> first_start, last_end;
      int gpus = 0;
      for (const auto& att : attempts) {
        auto st = ts(att.value("start_time", json()));
        auto et = ts(att.value("end_time", json()));
        if (st && (!first_start || *st < *first_start)) first_start = st;
        if (et && (!last_end || *et > *last_end)) last_end = et;
        gpus = std::max(gpus, attempt_gpus(att));
      }
      emit(jobid, first_start, last_end, gpus);
    } else {
      int n = 0;
      for (const auto& att : attempts) {
        emit(jobid + "_a" + std::to_string(n++), ts(att.value("start_time", json())),
             ts(att.value("end_time", json())), attempt_gpus(att));
      }
    }
  }
  return out;
}

ParsedTrace parse_trace_file(const std::string& path, const std::string& format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open trace " + path);
  std::string fmt = to_lower(format);
  if (fmt.empty() || fmt == "canonical") return parse_job_log(in);
  if (fmt == "helios") return parse_helios_log(in);
  if (fmt == "philly") return parse_philly_log(in, true);
  if (fmt == "philly-attempts") return parse_philly_log(in, false);
  throw InvalidArgError("unknown trace format '" + format + "'");
}

// ---- VC configuration ------------------------------------------------------

int VCTimeline::node_count_at(int64_t t) const {
  int count = 0;
  for (const auto& seg : segments) {
    if (seg.effective_from <= t) count = seg.node_count;
    else break;
  }
  return count;
}

namespace {

std::vector<VCTimeline> build_timelines(std::vector<VCConfig> entries) {
  std::stable_sort(entries.begin(), entries.end(), [](const VCConfig& a, const VCConfig& b) {
    if (a.vc != b.vc) return a.vc < b.vc;
    return a.effective_from < b.effective_from;
  });
  std::vector<VCTimeline> out;
  for (auto& e : entries) {
    if (e.node_count < 0) throw ParseError("negative node_count for vc " + e.vc);
    if (out.empty() || out.back().vc != e.vc) {
      out.push_back({e.vc, {}});
    } else if (out.back().segments.back().effective_from == e.effective_from) {
      throw ParseError("overlapping vc config for " + e.vc + " at " +
                       std::to_string(e.effective_from));
    }
    out.back().segments.push_back(e);
  }
  return out;
}

}  // namespace

std::vector<VCTimeline> parse_vc_config(std::istream& in) {
  csv::Reader reader(in);
  std::vector<std::string> fields;
  if (!reader.read_record(&fields)) throw ParseError("empty vc config");
  if (join_row(fields) != "effective_from,vc,node_count")
    throw ParseError("malformed vc config header");
  std::vector<VCConfig> entries;
  while (reader.read_record(&fields)) {
    if (fields.size() == 1 && fields[0].empty()) continue;
    if (fields.size() != 3) throw ParseError("vc config row needs 3 fields");
    auto from = parse_timestamp(fields[0]);
    auto count = parse_i64(fields[2]);
    if (!from || !count) throw ParseError("unparsable vc config row: " + join_row(fields));
    entries.push_back({trim(fields[1]), static_cast<int>(*count), *from});
  }
  return build_timelines(std::move(entries));
}

std::vector<VCTimeline> parse_helios_vc_table(std::istream& in, int gpus_per_node) {
  GCSIM_CHECK(gpus_per_node > 0, "gpus_per_node must be positive");
  csv::Reader reader(in);
  std::vector<std::string> header;
  if (!reader.read_record(&header)) throw ParseError("empty vc table");
  if (header.size() < 2) throw ParseError("vc table needs a date column plus VC columns");
  std::vector<VCConfig> entries;
  std::vector<std::string> fields;
  while (reader.read_record(&fields)) {
    if (fields.size() <= 1) continue;
    auto date = parse_timestamp(fields[0]);
    if (!date) throw ParseError("unparsable date in vc table: " + fields[0]);
    for (size_t i = 1; i < header.size() && i < fields.size(); ++i) {
      std::string vc = trim(header[i]);
      if (vc.empty() || to_lower(vc) == "total") continue;
      auto gpus = parse_i64(fields[i]);
      if (!gpus) continue;  // blank cell: VC absent that day
      entries.push_back({vc, static_cast<int>(*gpus / gpus_per_node), *date});
    }
  }
  // collapse consecutive equal counts so timelines stay piecewise-constant
  auto timelines = build_timelines(std::move(entries));
  for (auto& tl : timelines) {
    std::vector<VCConfig> compact;
    for (const auto& seg : tl.segments) {
      if (compact.empty() || compact.back().node_count != seg.node_count)
        compact.push_back(seg);
    }
    tl.segments = std::move(compact);
  }
  return timelines;
}

std::vector<VCTimeline> ClusterSpec::timelines() const {
  return build_timelines(vcs);
}

std::map<std::string, int> ClusterSpec::vc_snapshot(int64_t t) const {
  std::map<std::string, int> snap;
  for (const auto& tl : timelines()) {
    int n = tl.node_count_at(t);
    if (n > 0) snap[tl.vc] = n;
  }
  return snap;
}

ClusterSpec parse_cluster_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("cluster json: ") + e.what());
  }
  ClusterSpec spec;
  spec.name = doc.value("name", "cluster");
  spec.nodes = doc.value("nodes", 0);
  spec.gpus_per_node = doc.value("gpus_per_node", 0);
  if (spec.nodes <= 0) throw ParseError("cluster json: nodes must be positive");
  if (spec.gpus_per_node <= 0) throw ParseError("cluster json: gpus_per_node must be positive");
  if (doc.contains("vcs")) {
    for (const auto& v : doc["vcs"]) {
      VCConfig cfg;
      cfg.vc = v.value("vc", "");
      cfg.node_count = v.value("node_count", 0);
      if (v.contains("effective_from")) {
        if (v["effective_from"].is_string()) {
          auto t = parse_timestamp(v["effective_from"].get<std::string>());
          if (!t) throw ParseError("cluster json: bad effective_from");
          cfg.effective_from = *t;
        } else {
          cfg.effective_from = v["effective_from"].get<int64_t>();
        }
      }
      if (cfg.vc.empty()) throw ParseError("cluster json: vc entry without a name");
      spec.vcs.push_back(std::move(cfg));
    }
  }
  // sum of VC node counts may not exceed the cluster at any config instant
  std::vector<int64_t> instants;
  for (const auto& v : spec.vcs) instants.push_back(v.effective_from);
  std::sort(instants.begin(), instants.end());
  instants.erase(std::unique(instants.begin(), instants.end()), instants.end());
  for (int64_t t : instants) {
    int total = 0;
    for (const auto& [vc, n] : spec.vc_snapshot(t)) total += n;
    if (total > spec.nodes)
      throw ParseError("cluster json: VC nodes (" + std::to_string(total) + ") exceed cluster (" +
                       std::to_string(spec.nodes) + ") at t=" + std::to_string(t));
  }
  return spec;
}

ClusterSpec load_cluster_file(const std::string& path) {
  return parse_cluster_json(read_file(path));
}

std::string cluster_to_json(const ClusterSpec& spec) {
  json doc;
  doc["name"] = spec.name;
  doc["nodes"] = spec.nodes;
  doc["gpus_per_node"] = spec.gpus_per_node;
  doc["vcs"] = json::array();
  for (const auto& v : spec.vcs) {
    doc["vcs"].push_back({{"vc", v.vc}, {"node_count", v.node_count}, {"effective_from", v.effective_from}});
  }
  return doc.dump(2) + "\n";
}

// ---- validation -------------------------------------------------------------

ValidationReport validate_trace(const std::vector<JobRecord>& jobs, const ClusterSpec& cluster) {
  ValidationReport r;
  const int capacity = cluster.total_gpus();
  for (const auto& j : jobs) {
    ++r.total;
    if (j.is_gpu()) ++r.gpu_jobs;
    else ++r.cpu_jobs;
    switch (j.status) {
      case JobStatus::Completed: ++r.completed; break;
      case JobStatus::Canceled: ++r.canceled; break;
      case JobStatus::Failed: ++r.failed; break;
    }
    if (!j.start_time) ++r.missing_times;
    if (j.gpu_num > capacity) {
      ++r.demand_exceeds_cluster;
      if (r.flags.size() < 100)
        r.flags.push_back("job " + j.job_id + ": demand exceeds cluster (" +
                          std::to_string(j.gpu_num) + " > " + std::to_string(capacity) + ")");
    }
  }
  return r;
}

std::string validation_to_json(const ValidationReport& r) {
  json doc;
  doc["total"] = r.total;
  doc["gpu_jobs"] = r.gpu_jobs;
  doc["cpu_jobs"] = r.cpu_jobs;
  doc["completed"] = r.completed;
  doc["canceled"] = r.canceled;
  doc["failed"] = r.failed;
  doc["missing_times"] = r.missing_times;
  doc["demand_exceeds_cluster"] = r.demand_exceeds_cluster;
  doc["flags"] = r.flags;
  return doc.dump(2) + "\n";
}

}  // namespace gcsim
