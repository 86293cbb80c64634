#include "gcsim.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>

#include "gcsim/analytics.hpp"
#include "gcsim/ces.hpp"
#include "gcsim/predictor.hpp"
#include "gcsim/sim.hpp"
#include "gcsim/trace.hpp"
#include "json.hpp"

using nlohmann::json;

struct gcs_trace {
  gcsim::ParsedTrace data;
};
struct gcs_cluster {
  gcsim::ClusterSpec spec;
};
struct gcs_model {
  std::optional<gcsim::DurationPredictor> predictor;
};
struct gcs_forecaster {
  std::optional<gcsim::GbdtForecaster> forecaster;
};
struct gcs_sim_result {
  gcsim::SimResult result;
  gcsim::MetricsSummary metrics;
};
struct gcs_ces_report {
  gcsim::CESReport report;
};

namespace {

thread_local std::string t_last_error;

gcs_status fail(gcs_status code, const std::string& message) {
  t_last_error = message;
  return code;
}

template <typename Fn>
gcs_status wrap(Fn&& fn) {
  try {
    fn();
    return GCS_OK;
  } catch (const gcsim::ParseError& e) {
    return fail(GCS_ERR_PARSE, e.what());
  } catch (const gcsim::IoError& e) {
    return fail(GCS_ERR_IO, e.what());
  } catch (const gcsim::InvalidArgError& e) {
    return fail(GCS_ERR_INVALID_ARG, e.what());
  } catch (const gcsim::Error& e) {
    return fail(GCS_ERR_STATE, e.what());
  } catch (const std::exception& e) {
    return fail(GCS_ERR_INTERNAL, e.what());
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

json parse_options(const char* options_json) {
  if (!options_json || !*options_json) return json::object();
  json doc = json::parse(options_json, nullptr, true, true);
  if (!doc.is_object()) throw gcsim::InvalidArgError("options must be a JSON object");
  return doc;
}

int64_t option_timestamp(const json& doc, const char* key, int64_t fallback) {
  if (!doc.contains(key)) return fallback;
  const auto& v = doc[key];
  if (v.is_number()) return v.get<int64_t>();
  if (v.is_string()) {
    auto t = gcsim::parse_timestamp(v.get<std::string>());
    if (!t) throw gcsim::InvalidArgError(std::string("bad timestamp for ") + key);
    return *t;
  }
  throw gcsim::InvalidArgError(std::string("bad value for ") + key);
}

gcsim::GBDTConfig gbdt_config_from(const json& doc) {
  gcsim::GBDTConfig cfg;
  cfg.rounds = doc.value("rounds", cfg.rounds);
  cfg.learning_rate = doc.value("learning_rate", cfg.learning_rate);
  cfg.max_depth = doc.value("max_depth", cfg.max_depth);
  cfg.min_samples_leaf = doc.value("min_samples_leaf", cfg.min_samples_leaf);
  return cfg;
}

void check_arg(bool ok, const char* what) {
  if (!ok) throw gcsim::InvalidArgError(what);
}

}  // namespace

extern "C" {

const char* gcs_version(void) { return "0.1.0"; }

const char* gcs_status_name(gcs_status status) {
  switch (status) {
    case GCS_OK: return "ok";
    case GCS_ERR_INVALID_ARG: return "invalid argument";
    case GCS_ERR_PARSE: return "parse error";
    case GCS_ERR_IO: return "io error";
    case GCS_ERR_STATE: return "state error";
    case GCS_ERR_INTERNAL: return "internal error";
  }
  return "unknown";
}

const char* gcs_last_error(void) { return t_last_error.c_str(); }

void gcs_string_free(char* s) { std::free(s); }

gcs_status gcs_trace_open(const char* path, const char* format, gcs_trace** out) {
  return wrap([&] {
    check_arg(path && out, "gcs_trace_open: null argument");
    auto trace = std::make_unique<gcs_trace>();
    trace->data = gcsim::parse_trace_file(path, format ? format : "canonical");
    *out = trace.release();
  });
}

gcs_status gcs_trace_synth(const char* params_json, gcs_trace** out) {
  return wrap([&] {
    check_arg(out != nullptr, "gcs_trace_synth: null out");
    auto params = gcsim::synth_params_from_json(params_json ? params_json : "{}");
    auto trace = std::make_unique<gcs_trace>();
    trace->data.jobs = gcsim::synth_trace(params);
    *out = trace.release();
  });
}

gcs_status gcs_trace_save(const gcs_trace* trace, const char* path) {
  return wrap([&] {
    check_arg(trace && path, "gcs_trace_save: null argument");
    std::ostringstream os;
    gcsim::write_job_log(os, trace->data.jobs);
    gcsim::write_file(path, os.str());
  });
}

size_t gcs_trace_job_count(const gcs_trace* trace) {
  return trace ? trace->data.jobs.size() : 0;
}

size_t gcs_trace_reject_count(const gcs_trace* trace) {
  return trace ? trace->data.rejects.size() : 0;
}

gcs_status gcs_trace_validate(const gcs_trace* trace, const gcs_cluster* cluster,
                              char** report_json) {
  return wrap([&] {
    check_arg(trace && cluster && report_json, "gcs_trace_validate: null argument");
    auto report = gcsim::validate_trace(trace->data.jobs, cluster->spec);
    *report_json = dup_string(gcsim::validation_to_json(report));
  });
}

void gcs_trace_free(gcs_trace* trace) { delete trace; }

gcs_status gcs_cluster_open(const char* path, gcs_cluster** out) {
  return wrap([&] {
    check_arg(path && out, "gcs_cluster_open: null argument");
    auto cluster = std::make_unique<gcs_cluster>();
    cluster->spec = gcsim::load_cluster_file(path);
    *out = cluster.release();
  });
}

gcs_status gcs_cluster_parse(const char* json_text, gcs_cluster** out) {
  return wrap([&] {
    check_arg(json_text && out, "gcs_cluster_parse: null argument");
    auto cluster = std::make_unique<gcs_cluster>();
    cluster->spec = gcsim::parse_cluster_json(json_text);
    *out = cluster.release();
  });
}

void gcs_cluster_free(gcs_cluster* cluster) { delete cluster; }

gcs_status gcs_analyze(const gcs_trace* trace, const gcs_cluster* cluster, const char* outdir,
                       int svg, char** summary_json) {
  return wrap([&] {
    check_arg(trace && cluster && outdir, "gcs_analyze: null argument");
    std::string summary =
        gcsim::write_analytics_report(trace->data.jobs, cluster->spec, outdir, svg != 0);
    if (summary_json) *summary_json = dup_string(summary);
  });
}

gcs_status gcs_train(const gcs_trace* trace, int64_t cutoff_epoch, const char* options_json,
                     gcs_model** out) {
  return wrap([&] {
    check_arg(trace && out, "gcs_train: null argument");
    json opts = parse_options(options_json);
    gcsim::PredictorConfig cfg;
    cfg.gbdt = gbdt_config_from(opts);
    cfg.rolling.gamma = opts.value("gamma", cfg.rolling.gamma);
    cfg.rolling.tau = opts.value("tau", cfg.rolling.tau);
    cfg.rolling.default_prior = opts.value("default_prior", cfg.rolling.default_prior);
    cfg.log_target = opts.value("log_target", cfg.log_target);
    cfg.update_window = opts.value("update_window", cfg.update_window);
    cfg.update_rounds = opts.value("update_rounds", cfg.update_rounds);
    auto model = std::make_unique<gcs_model>();
    model->predictor = gcsim::DurationPredictor::train(trace->data.jobs, cutoff_epoch, cfg);
    *out = model.release();
  });
}

gcs_status gcs_model_open(const char* path, gcs_model** out) {
  return wrap([&] {
    check_arg(path && out, "gcs_model_open: null argument");
    auto model = std::make_unique<gcs_model>();
    model->predictor = gcsim::DurationPredictor::from_json(gcsim::read_file(path));
    *out = model.release();
  });
}

gcs_status gcs_model_save(const gcs_model* model, const char* path) {
  return wrap([&] {
    check_arg(model && model->predictor && path, "gcs_model_save: null argument");
    gcsim::write_file(path, model->predictor->to_json());
  });
}

gcs_status gcs_model_validate(const gcs_model* model, const gcs_trace* trace,
                              char** report_json) {
  return wrap([&] {
    check_arg(model && model->predictor && trace && report_json,
              "gcs_model_validate: null argument");
    std::vector<gcsim::JobRecord> eval;
    for (const auto& j : trace->data.jobs)
      if (j.submit_time > model->predictor->train_cutoff()) eval.push_back(j);
    std::stable_sort(eval.begin(), eval.end(),
                     [](const auto& a, const auto& b) { return a.submit_time < b.submit_time; });
    auto v = model->predictor->validate(eval);
    *report_json = dup_string(gcsim::predictor_validation_to_json(v));
  });
}

gcs_status gcs_model_update(gcs_model* model, const gcs_trace* completed, int64_t now_epoch) {
  return wrap([&] {
    check_arg(model && model->predictor && completed, "gcs_model_update: null argument");
    model->predictor->update(completed->data.jobs, now_epoch);
  });
}

void gcs_model_free(gcs_model* model) { delete model; }

gcs_status gcs_simulate(const gcs_trace* trace, const gcs_cluster* cluster,
                        const gcs_model* model_or_null, const char* options_json,
                        gcs_sim_result** out) {
  return wrap([&] {
    check_arg(trace && cluster && out, "gcs_simulate: null argument");
    json opts = parse_options(options_json);
    gcsim::SimOptions sim;
    std::string policy = opts.value("policy", "fifo");
    auto kind = gcsim::parse_policy(policy);
    if (!kind) throw gcsim::InvalidArgError("unknown policy '" + policy + "'");
    sim.policy.kind = *kind;
    sim.policy.lambda = opts.value("lambda", sim.policy.lambda);
    check_arg(sim.policy.lambda >= 0.0 && sim.policy.lambda <= 1.0, "lambda must be in [0,1]");
    sim.policy.qssf_oracle = opts.value("qssf_oracle", false);
    sim.policy.noise_sigma = opts.value("noise_sigma", 0.0);
    sim.policy.noise_seed = opts.value("noise_seed", uint64_t{1});
    sim.include_cpu_jobs = opts.value("include_cpu_jobs", false);
    sim.queue_threshold = opts.value("queue_threshold", int64_t{0});
    sim.replay_from = option_timestamp(opts, "replay_from", sim.replay_from);
    sim.replay_to = option_timestamp(opts, "replay_to", sim.replay_to);
    sim.vc_snapshot_time = option_timestamp(opts, "vc_snapshot_time", sim.vc_snapshot_time);
    if (model_or_null && model_or_null->predictor) sim.predictor = &*model_or_null->predictor;

    auto result = std::make_unique<gcs_sim_result>();
    result->result = gcsim::run_simulation(trace->data.jobs, cluster->spec, sim);
    result->metrics = gcsim::compute_metrics(result->result, sim.queue_threshold);
    *out = result.release();
  });
}

gcs_status gcs_sim_result_metrics(const gcs_sim_result* result, char** metrics_json) {
  return wrap([&] {
    check_arg(result && metrics_json, "gcs_sim_result_metrics: null argument");
    *metrics_json = dup_string(gcsim::metrics_to_json(result->result, result->metrics));
  });
}

gcs_status gcs_sim_result_write(const gcs_sim_result* result, const char* outdir) {
  return wrap([&] {
    check_arg(result && outdir, "gcs_sim_result_write: null argument");
    namespace fs = std::filesystem;
    fs::create_directories(outdir);
    gcsim::write_file((fs::path(outdir) / "jobs.csv").string(), result->result.to_csv());
    gcsim::write_file((fs::path(outdir) / "summary.json").string(),
                      gcsim::metrics_to_json(result->result, result->metrics));
    gcsim::write_file((fs::path(outdir) / "utilization.csv").string(),
                      gcsim::utilization_to_csv(result->metrics));
  });
}

void gcs_sim_result_free(gcs_sim_result* result) { delete result; }

gcs_status gcs_node_series_convert(const char* path, const char* in_format,
                                   const char* out_csv_path) {
  return wrap([&] {
    check_arg(path && out_csv_path, "gcs_node_series_convert: null argument");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw gcsim::IoError(std::string("cannot open ") + path);
    std::string fmt = in_format ? gcsim::to_lower(in_format) : "series";
    gcsim::NodeSeries series;
    if (fmt == "series") series = gcsim::parse_node_series_csv(in);
    else if (fmt == "philly-export") series = gcsim::parse_philly_node_export(in);
    else throw gcsim::InvalidArgError("unknown node series format '" + fmt + "'");
    gcsim::write_file(out_csv_path, gcsim::node_series_to_csv(series));
  });
}

gcs_status gcs_node_series_from_trace(const gcs_trace* trace, const gcs_cluster* cluster,
                                      const char* out_csv_path) {
  return wrap([&] {
    check_arg(trace && cluster && out_csv_path, "gcs_node_series_from_trace: null argument");
    auto series = gcsim::derive_node_series(trace->data.jobs, cluster->spec);
    gcsim::write_file(out_csv_path, gcsim::node_series_to_csv(series));
  });
}

namespace {

gcsim::ForecastFeatureConfig feature_config_from(const json& opts) {
  gcsim::ForecastFeatureConfig cfg;
  if (opts.contains("rolling_windows"))
    cfg.rolling_windows = opts["rolling_windows"].get<std::vector<int>>();
  if (opts.contains("lags")) cfg.lags = opts["lags"].get<std::vector<int>>();
  if (opts.contains("holidays")) {
    for (const auto& h : opts["holidays"]) {
      auto t = gcsim::parse_timestamp(h.get<std::string>());
      if (!t) throw gcsim::InvalidArgError("bad holiday date");
      cfg.holidays.push_back(*t);
    }
  }
  return cfg;
}

}  // namespace

gcs_status gcs_forecaster_train(const char* series_csv_path, int64_t cutoff_epoch,
                                const char* options_json, gcs_forecaster** out) {
  return wrap([&] {
    check_arg(series_csv_path && out, "gcs_forecaster_train: null argument");
    std::ifstream in(series_csv_path, std::ios::binary);
    if (!in) throw gcsim::IoError(std::string("cannot open ") + series_csv_path);
    auto series = gcsim::parse_node_series_csv(in);
    // the training window is strictly before the cutoff minute
    int64_t offset = (cutoff_epoch - series.start_minute) / 60 - 1;
    check_arg(offset >= 0, "cutoff before the series start");
    size_t train_end = static_cast<size_t>(
        std::min<int64_t>(offset, static_cast<int64_t>(series.size()) - 1));
    json opts = parse_options(options_json);
    auto f = std::make_unique<gcs_forecaster>();
    f->forecaster = gcsim::GbdtForecaster::train(series, train_end, feature_config_from(opts),
                                                 gbdt_config_from(opts));
    *out = f.release();
  });
}

gcs_status gcs_forecaster_open(const char* path, gcs_forecaster** out) {
  return wrap([&] {
    check_arg(path && out, "gcs_forecaster_open: null argument");
    auto f = std::make_unique<gcs_forecaster>();
    f->forecaster = gcsim::GbdtForecaster::from_json(gcsim::read_file(path));
    *out = f.release();
  });
}

gcs_status gcs_forecaster_save(const gcs_forecaster* forecaster, const char* path) {
  return wrap([&] {
    check_arg(forecaster && forecaster->forecaster && path,
              "gcs_forecaster_save: null argument");
    gcsim::write_file(path, forecaster->forecaster->to_json());
  });
}

gcs_status gcs_forecast(const gcs_forecaster* forecaster, const char* series_csv_path,
                        int horizon_minutes, char** forecast_csv) {
  return wrap([&] {
    check_arg(forecaster && forecaster->forecaster && series_csv_path && forecast_csv,
              "gcs_forecast: null argument");
    check_arg(horizon_minutes > 0, "horizon must be positive");
    std::ifstream in(series_csv_path, std::ios::binary);
    if (!in) throw gcsim::IoError(std::string("cannot open ") + series_csv_path);
    auto series = gcsim::parse_node_series_csv(in);
    auto prediction =
        forecaster->forecaster->forecast(series, series.size() - 1, horizon_minutes);
    if (prediction.empty())
      throw gcsim::InvalidArgError("series too short for the forecaster's lookback");
    std::ostringstream os;
    os << "minute,predicted_running\n";
    char buf[32];
    for (size_t i = 0; i < prediction.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.3f", prediction[i]);
      os << (series.minute_epoch(series.size() - 1) + 60 * static_cast<int64_t>(i + 1)) << ','
         << buf << '\n';
    }
    *forecast_csv = dup_string(os.str());
  });
}

void gcs_forecaster_free(gcs_forecaster* forecaster) { delete forecaster; }

namespace {

gcsim::CESConfig ces_config_from(const json& opts) {
  gcsim::CESConfig cfg;
  cfg.sigma = opts.value("sigma", cfg.sigma);
  cfg.xi_h = opts.value("xi_h", cfg.xi_h);
  cfg.xi_p = opts.value("xi_p", cfg.xi_p);
  cfg.check_period = opts.value("check_period", cfg.check_period);
  cfg.history_window = opts.value("history_window", cfg.history_window);
  cfg.forecast_horizon = opts.value("forecast_horizon", cfg.forecast_horizon);
  cfg.boot_delay = opts.value("boot_delay", cfg.boot_delay);
  cfg.enabled = opts.value("enabled", cfg.enabled);
  cfg.vanilla = opts.value("vanilla", cfg.vanilla);
  return cfg;
}

gcsim::EnergyModel energy_model_from(const json& opts) {
  gcsim::EnergyModel energy;
  energy.idle_node_watts = opts.value("idle_node_watts", energy.idle_node_watts);
  energy.cooling_multiplier = opts.value("cooling_multiplier", energy.cooling_multiplier);
  return energy;
}

void run_ces_common(gcsim::CESInput input, const json& opts,
                    const gcs_forecaster* forecaster_or_null, gcs_ces_report** out) {
  gcsim::CESConfig cfg = ces_config_from(opts);
  const gcsim::Forecaster* forecaster = nullptr;
  if (forecaster_or_null && forecaster_or_null->forecaster)
    forecaster = &*forecaster_or_null->forecaster;
  auto report = std::make_unique<gcs_ces_report>();
  report->report = gcsim::run_ces_simulation(input, cfg, forecaster, energy_model_from(opts));
  *out = report.release();
}

}  // namespace

gcs_status gcs_ces_run_trace(const gcs_trace* trace, const gcs_cluster* cluster,
                             const gcs_forecaster* forecaster_or_null,
                             const char* options_json, gcs_ces_report** out) {
  return wrap([&] {
    check_arg(trace && cluster && out, "gcs_ces_run_trace: null argument");
    json opts = parse_options(options_json);
    int64_t eval_from = option_timestamp(opts, "eval_from", 0);
    run_ces_common(gcsim::ces_input_from_trace(trace->data.jobs, cluster->spec, eval_from),
                   opts, forecaster_or_null, out);
  });
}

gcs_status gcs_ces_run_series(const char* series_csv_path,
                              const gcs_forecaster* forecaster_or_null,
                              const char* options_json, gcs_ces_report** out) {
  return wrap([&] {
    check_arg(series_csv_path && out, "gcs_ces_run_series: null argument");
    std::ifstream in(series_csv_path, std::ios::binary);
    if (!in) throw gcsim::IoError(std::string("cannot open ") + series_csv_path);
    auto series = gcsim::parse_node_series_csv(in);
    json opts = parse_options(options_json);
    int64_t eval_from = option_timestamp(opts, "eval_from", 0);
    run_ces_common(gcsim::ces_input_from_series(std::move(series), eval_from), opts,
                   forecaster_or_null, out);
  });
}

gcs_status gcs_ces_report_json(const gcs_ces_report* report, char** json_out) {
  return wrap([&] {
    check_arg(report && json_out, "gcs_ces_report_json: null argument");
    *json_out = dup_string(gcsim::ces_report_to_json(report->report));
  });
}

gcs_status gcs_ces_report_write(const gcs_ces_report* report, const char* outdir) {
  return wrap([&] {
    check_arg(report && outdir, "gcs_ces_report_write: null argument");
    namespace fs = std::filesystem;
    fs::create_directories(outdir);
    gcsim::write_file((fs::path(outdir) / "report.json").string(),
                      gcsim::ces_report_to_json(report->report));
    gcsim::write_file((fs::path(outdir) / "timeline.csv").string(),
                      gcsim::ces_timeline_to_csv(report->report));
  });
}

void gcs_ces_report_free(gcs_ces_report* report) { delete report; }

gcs_status gcs_file_sha256(const char* path, char** hex_out) {
  return wrap([&] {
    check_arg(path && hex_out, "gcs_file_sha256: null argument");
    *hex_out = dup_string(gcsim::sha256_file(path));
  });
}

}  // extern "C"
