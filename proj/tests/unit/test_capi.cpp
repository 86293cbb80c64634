#include <filesystem>
#include <string>

#include "doctest.h"
#include "gcsim.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / "gcsim_capi_test") {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const char* name) const { return (path / name).string(); }
};

std::string take(char* s) {
  std::string out = s ? s : "";
  gcs_string_free(s);
  return out;
}

const char* kClusterJson =
    R"({"name":"mini","nodes":2,"gpus_per_node":8,
        "vcs":[{"vc":"vc0","node_count":2,"effective_from":0}]})";

}  // namespace

TEST_CASE("c api end to end: synth, save, open, simulate, analyze") {
  TempDir tmp;

  gcs_trace* trace = nullptr;
  REQUIRE(gcs_trace_synth(R"({"job_count": 200, "seed": 5, "vcs": ["vc0"]})", &trace) ==
          GCS_OK);
  CHECK(gcs_trace_job_count(trace) == 200);
  CHECK(gcs_trace_reject_count(trace) == 0);

  std::string trace_path = tmp.file("trace.csv");
  REQUIRE(gcs_trace_save(trace, trace_path.c_str()) == GCS_OK);

  gcs_trace* reopened = nullptr;
  REQUIRE(gcs_trace_open(trace_path.c_str(), "canonical", &reopened) == GCS_OK);
  CHECK(gcs_trace_job_count(reopened) == 200);

  gcs_cluster* cluster = nullptr;
  REQUIRE(gcs_cluster_parse(kClusterJson, &cluster) == GCS_OK);

  char* validation = nullptr;
  REQUIRE(gcs_trace_validate(trace, cluster, &validation) == GCS_OK);
  auto vdoc = json::parse(take(validation));
  CHECK(vdoc["total"] == 200);

  gcs_sim_result* result = nullptr;
  REQUIRE(gcs_simulate(trace, cluster, nullptr, R"({"policy": "sjf"})", &result) == GCS_OK);
  char* metrics = nullptr;
  REQUIRE(gcs_sim_result_metrics(result, &metrics) == GCS_OK);
  auto mdoc = json::parse(take(metrics));
  CHECK(mdoc["policy"] == "sjf");
  CHECK(mdoc["summary"]["jobs"].get<size_t>() > 0);
  REQUIRE(gcs_sim_result_write(result, tmp.file("sim").c_str()) == GCS_OK);
  CHECK(fs::exists(tmp.path / "sim" / "jobs.csv"));
  CHECK(fs::exists(tmp.path / "sim" / "summary.json"));
  CHECK(fs::exists(tmp.path / "sim" / "utilization.csv"));

  char* summary = nullptr;
  REQUIRE(gcs_analyze(trace, cluster, tmp.file("report").c_str(), 0, &summary) == GCS_OK);
  auto sdoc = json::parse(take(summary));
  CHECK(sdoc["total_jobs"] == 200);
  CHECK(fs::exists(tmp.path / "report" / "users.csv"));

  gcs_sim_result_free(result);
  gcs_cluster_free(cluster);
  gcs_trace_free(reopened);
  gcs_trace_free(trace);
}

TEST_CASE("c api error paths set codes and messages") {
  gcs_trace* trace = nullptr;
  CHECK(gcs_trace_open("/nonexistent/file.csv", nullptr, &trace) == GCS_ERR_IO);
  CHECK(std::string(gcs_last_error()).find("cannot open") != std::string::npos);

  CHECK(gcs_trace_open(nullptr, nullptr, &trace) == GCS_ERR_INVALID_ARG);

  gcs_cluster* cluster = nullptr;
  CHECK(gcs_cluster_parse("{not json", &cluster) == GCS_ERR_PARSE);

  REQUIRE(gcs_trace_synth("{\"job_count\": 10}", &trace) == GCS_OK);
  REQUIRE(gcs_cluster_parse(kClusterJson, &cluster) == GCS_OK);
  gcs_sim_result* result = nullptr;
  CHECK(gcs_simulate(trace, cluster, nullptr, R"({"policy": "wrong"})", &result) ==
        GCS_ERR_INVALID_ARG);
  // qssf without a model, oracle or noise is a state error
  CHECK(gcs_simulate(trace, cluster, nullptr, R"({"policy": "qssf"})", &result) ==
        GCS_ERR_STATE);
  gcs_cluster_free(cluster);
  gcs_trace_free(trace);

  CHECK(std::string(gcs_status_name(GCS_ERR_PARSE)) == "parse error");
  CHECK(std::string(gcs_version()).find('.') != std::string::npos);
}

TEST_CASE("c api model train/save/open and qssf simulation") {
  TempDir tmp;
  gcs_trace* trace = nullptr;
  REQUIRE(gcs_trace_synth(
              R"({"job_count": 400, "seed": 6, "span_seconds": 1209600, "vcs": ["vc0"]})",
              &trace) == GCS_OK);
  gcs_cluster* cluster = nullptr;
  REQUIRE(gcs_cluster_parse(kClusterJson, &cluster) == GCS_OK);

  // train on the first week, replay the second
  int64_t cutoff = 1585699200 + 7 * 86400;
  gcs_model* model = nullptr;
  REQUIRE(gcs_train(trace, cutoff,
                    R"({"rounds": 30, "min_samples_leaf": 5})", &model) == GCS_OK);

  char* report = nullptr;
  REQUIRE(gcs_model_validate(model, trace, &report) == GCS_OK);
  auto rdoc = json::parse(take(report));
  CHECK(rdoc["val_rows"].get<size_t>() > 0);
  CHECK(rdoc["rmse_seconds"].get<double>() >= 0.0);

  std::string model_path = tmp.file("model.json");
  REQUIRE(gcs_model_save(model, model_path.c_str()) == GCS_OK);
  gcs_model* reopened = nullptr;
  REQUIRE(gcs_model_open(model_path.c_str(), &reopened) == GCS_OK);

  // fine-tuning through the C surface is a no-op bump in rounds at minimum
  CHECK(gcs_model_update(model, trace, cutoff + 14 * 86400) == GCS_OK);
  gcs_model_free(model);
  model = nullptr;
  REQUIRE(gcs_model_open(model_path.c_str(), &model) == GCS_OK);

  const char* opts = R"({"policy": "qssf", "lambda": 0.5, "replay_from": 1586304000})";
  gcs_sim_result* a = nullptr;
  gcs_sim_result* b = nullptr;
  REQUIRE(gcs_simulate(trace, cluster, model, opts, &a) == GCS_OK);
  REQUIRE(gcs_simulate(trace, cluster, reopened, opts, &b) == GCS_OK);
  char* ma = nullptr;
  char* mb = nullptr;
  REQUIRE(gcs_sim_result_metrics(a, &ma) == GCS_OK);
  REQUIRE(gcs_sim_result_metrics(b, &mb) == GCS_OK);
  CHECK(take(ma) == take(mb));  // persisted model reproduces the schedule

  gcs_sim_result_free(a);
  gcs_sim_result_free(b);
  gcs_model_free(model);
  gcs_model_free(reopened);
  gcs_cluster_free(cluster);
  gcs_trace_free(trace);
}

TEST_CASE("c api node series, forecaster and ces round trip") {
  TempDir tmp;
  // synthetic sine series written through the public csv shape
  std::string series_path = tmp.file("series.csv");
  {
    std::string csv = "minute,total,running\n";
    for (int m = 0; m < 6 * 1440; ++m) {
      int v = static_cast<int>(std::lround(
          55.0 + 25.0 * std::sin(2.0 * M_PI * m / 1440.0)));
      csv += std::to_string(1585699200 + 60 * static_cast<int64_t>(m)) + ",100," +
             std::to_string(v) + "\n";
    }
    FILE* f = fopen(series_path.c_str(), "wb");
    fwrite(csv.data(), 1, csv.size(), f);
    fclose(f);
  }

  int64_t cutoff = 1585699200 + 4 * 86400;
  gcs_forecaster* forecaster = nullptr;
  REQUIRE(gcs_forecaster_train(
              series_path.c_str(), cutoff,
              R"({"rounds": 40, "rolling_windows": [60, 360], "lags": [60, 1440]})",
              &forecaster) == GCS_OK);

  std::string fpath = tmp.file("forecaster.json");
  REQUIRE(gcs_forecaster_save(forecaster, fpath.c_str()) == GCS_OK);
  gcs_forecaster* reopened = nullptr;
  REQUIRE(gcs_forecaster_open(fpath.c_str(), &reopened) == GCS_OK);

  char* forecast = nullptr;
  REQUIRE(gcs_forecast(reopened, series_path.c_str(), 60, &forecast) == GCS_OK);
  std::string fc = take(forecast);
  CHECK(std::count(fc.begin(), fc.end(), '\n') == 61);  // header + 60 steps

  gcs_ces_report* report = nullptr;
  REQUIRE(gcs_ces_run_series(series_path.c_str(), forecaster,
                             R"({"eval_from": 1586044800})", &report) == GCS_OK);
  char* rjson = nullptr;
  REQUIRE(gcs_ces_report_json(report, &rjson) == GCS_OK);
  auto doc = json::parse(take(rjson));
  CHECK(doc["avg_sleeping_nodes"].get<double>() >= 0.0);
  CHECK(doc["node_util_ces"].get<double>() >=
        doc["node_util_original"].get<double>() - 1e-9);
  REQUIRE(gcs_ces_report_write(report, tmp.file("ces").c_str()) == GCS_OK);
  CHECK(fs::exists(tmp.path / "ces" / "report.json"));
  CHECK(fs::exists(tmp.path / "ces" / "timeline.csv"));

  gcs_ces_report_free(report);
  gcs_forecaster_free(forecaster);
  gcs_forecaster_free(reopened);
}

TEST_CASE("file hashing") {
  TempDir tmp;
  std::string p = tmp.file("x.txt");
  FILE* f = fopen(p.c_str(), "wb");
  fputs("abc", f);
  fclose(f);
  char* hex = nullptr;
  REQUIRE(gcs_file_sha256(p.c_str(), &hex) == GCS_OK);
  CHECK(take(hex) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
