// gcsim command line: analyze | simulate | train | forecast | ces | synth |
// convert. Thin orchestration over the shared library's C API; every command
// writes its artifacts plus a manifest.json with input/output hashes so runs
// can be reproduced and compared byte for byte.

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "gcsim.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void die(const std::string& context) {
  std::cerr << "gcsim: " << context << ": " << gcs_last_error() << "\n";
  std::exit(1);
}

void check(gcs_status status, const std::string& context) {
  if (status != GCS_OK) die(context + " (" + gcs_status_name(status) + ")");
}

std::string take(char* s) {
  std::string out = s ? s : "";
  gcs_string_free(s);
  return out;
}

std::string hash_file(const std::string& path) {
  char* hex = nullptr;
  check(gcs_file_sha256(path.c_str(), &hex), "hashing " + path);
  return take(hex);
}

struct Manifest {
  std::string command;
  json options = json::object();
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;

  void add_output_dir(const std::string& dir) {
    std::vector<std::string> files;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
      if (!entry.is_regular_file()) continue;
      if (entry.path().filename() == "manifest.json") continue;
      files.push_back(entry.path().string());
    }
    std::sort(files.begin(), files.end());
    outputs.insert(outputs.end(), files.begin(), files.end());
  }

  void write(const std::string& outdir) {
    json doc;
    doc["tool"] = "gcsim";
    doc["version"] = gcs_version();
    doc["command"] = command;
    doc["options"] = options;
    auto hash_list = [&](const std::vector<std::string>& paths) {
      json arr = json::array();
      for (const auto& p : paths)
        arr.push_back({{"path", p}, {"sha256", hash_file(p)}});
      return arr;
    };
    doc["inputs"] = hash_list(inputs);
    doc["outputs"] = hash_list(outputs);
    std::ofstream out(fs::path(outdir) / "manifest.json", std::ios::binary);
    out << doc.dump(2) << "\n";
    if (!out) die("writing manifest");
  }
};

struct Handles {
  gcs_trace* trace = nullptr;
  gcs_cluster* cluster = nullptr;
  gcs_model* model = nullptr;
  gcs_forecaster* forecaster = nullptr;
  ~Handles() {
    gcs_trace_free(trace);
    gcs_cluster_free(cluster);
    gcs_model_free(model);
    gcs_forecaster_free(forecaster);
  }
};

// common flags shared by trace-consuming commands
struct TraceArgs {
  std::string trace_path;
  std::string format = "canonical";
  std::string cluster_path;

  void bind(CLI::App* cmd, bool need_cluster) {
    cmd->add_option("--trace", trace_path, "Job trace file")->required();
    cmd->add_option("--format", format, "Trace format: canonical|helios|philly|philly-attempts")
        ->default_val("canonical");
    auto* c = cmd->add_option("--cluster", cluster_path, "Cluster spec JSON");
    if (need_cluster) c->required();
  }

  void open(Handles* h, Manifest* m) const {
    check(gcs_trace_open(trace_path.c_str(), format.c_str(), &h->trace),
          "opening trace " + trace_path);
    m->inputs.push_back(trace_path);
    if (size_t rejects = gcs_trace_reject_count(h->trace))
      std::cerr << "gcsim: note: " << rejects << " rows rejected while parsing "
                << trace_path << "\n";
    if (!cluster_path.empty()) {
      check(gcs_cluster_open(cluster_path.c_str(), &h->cluster),
            "opening cluster " + cluster_path);
      m->inputs.push_back(cluster_path);
    }
  }
};

// Epoch seconds or "YYYY-MM-DD[ HH:MM:SS]" (UTC).
int64_t parse_time_flag(const std::string& value, const std::string& flag) {
  int y, mo, d, hh = 0, mi = 0, ss = 0;
  char sep;
  int n = std::sscanf(value.c_str(), "%d-%d-%d%c%d:%d:%d", &y, &mo, &d, &sep, &hh, &mi, &ss);
  if (value.find('-', 1) != std::string::npos && (n == 3 || n >= 6)) {
    if (n == 3) hh = mi = ss = 0;
    y -= mo <= 2;
    const int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (mo + (mo > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    int64_t days = era * 146097 + static_cast<int64_t>(doe) - 719468;
    return days * 86400 + hh * 3600 + mi * 60 + ss;
  }
  try {
    size_t pos = 0;
    int64_t v = std::stoll(value, &pos);
    if (pos == value.size()) return v;
  } catch (...) {
  }
  std::cerr << "gcsim: " << flag << ": expected epoch seconds or YYYY-MM-DD, got '" << value
            << "'\n";
  std::exit(1);
}

}  // namespace

// ---- synth -------------------------------------------------------------------

static void cmd_synth(const std::string& params_path, const std::string& params_inline,
                      uint64_t seed, bool seed_set, const std::string& outdir) {
  fs::create_directories(outdir);
  Manifest manifest;
  manifest.command = "synth";
  json params = json::object();
  if (!params_path.empty()) {
    std::ifstream in(params_path);
    if (!in) {
      std::cerr << "gcsim: cannot open " << params_path << "\n";
      std::exit(1);
    }
    in >> params;
    manifest.inputs.push_back(params_path);
  }
  if (!params_inline.empty()) params.merge_patch(json::parse(params_inline));
  if (seed_set) params["seed"] = seed;
  manifest.options = params;

  Handles h;
  check(gcs_trace_synth(params.dump().c_str(), &h.trace), "synthesizing trace");
  std::string trace_path = (fs::path(outdir) / "trace.csv").string();
  check(gcs_trace_save(h.trace, trace_path.c_str()), "writing " + trace_path);
  std::cout << "synthesized " << gcs_trace_job_count(h.trace) << " jobs -> " << trace_path
            << "\n";
  manifest.add_output_dir(outdir);
  manifest.write(outdir);
}

// ---- analyze ----------------------------------------------------------------

static void cmd_analyze(const TraceArgs& args, const std::string& outdir, bool svg) {
  fs::create_directories(outdir);
  Manifest manifest;
  manifest.command = "analyze";
  Handles h;
  args.open(&h, &manifest);
  manifest.options = {{"trace", args.trace_path}, {"format", args.format},
                      {"cluster", args.cluster_path}, {"svg", svg}};
  char* summary = nullptr;
  check(gcs_analyze(h.trace, h.cluster, outdir.c_str(), svg ? 1 : 0, &summary),
        "analyzing trace");
  std::cout << take(summary);
  manifest.add_output_dir(outdir);
  manifest.write(outdir);
}

// ---- simulate ----------------------------------------------------------------

static void cmd_simulate(const TraceArgs& args, const std::vector<std::string>& policies,
                         double lambda, const std::string& model_path, bool oracle,
                         double noise_sigma, uint64_t seed, bool include_cpu,
                         int64_t queue_threshold, const std::string& from,
                         const std::string& to, const std::string& vc_asof,
                         const std::string& outdir) {
  fs::create_directories(outdir);
  Manifest manifest;
  manifest.command = "simulate";
  Handles h;
  args.open(&h, &manifest);
  if (!model_path.empty()) {
    check(gcs_model_open(model_path.c_str(), &h.model), "opening model " + model_path);
    manifest.inputs.push_back(model_path);
  }

  json base_options;
  base_options["lambda"] = lambda;
  base_options["qssf_oracle"] = oracle;
  base_options["noise_sigma"] = noise_sigma;
  base_options["noise_seed"] = seed;
  base_options["include_cpu_jobs"] = include_cpu;
  base_options["queue_threshold"] = queue_threshold;
  if (!from.empty()) base_options["replay_from"] = from;
  if (!to.empty()) base_options["replay_to"] = to;
  if (!vc_asof.empty()) base_options["vc_snapshot_time"] = vc_asof;
  manifest.options = base_options;
  manifest.options["policies"] = policies;

  // independent runs, one thread each, isolated handles-free state
  struct RunOut {
    std::string policy;
    std::string error;
    json summary;
  };
  std::vector<RunOut> runs(policies.size());
  std::vector<std::thread> threads;
  for (size_t i = 0; i < policies.size(); ++i) {
    threads.emplace_back([&, i] {
      json options = base_options;
      options["policy"] = policies[i];
      gcs_sim_result* result = nullptr;
      gcs_status st = gcs_simulate(h.trace, h.cluster, h.model, options.dump().c_str(),
                                   &result);
      if (st != GCS_OK) {
        runs[i] = {policies[i], gcs_last_error(), {}};
        return;
      }
      std::string dir = policies.size() == 1
                            ? outdir
                            : (fs::path(outdir) / policies[i]).string();
      st = gcs_sim_result_write(result, dir.c_str());
      if (st != GCS_OK) {
        runs[i] = {policies[i], gcs_last_error(), {}};
        gcs_sim_result_free(result);
        return;
      }
      char* metrics = nullptr;
      gcs_sim_result_metrics(result, &metrics);
      runs[i] = {policies[i], "", json::parse(take(metrics))};
      gcs_sim_result_free(result);
    });
  }
  for (auto& t : threads) t.join();

  bool failed = false;
  for (const auto& r : runs) {
    if (!r.error.empty()) {
      std::cerr << "gcsim: simulate " << r.policy << ": " << r.error << "\n";
      failed = true;
      continue;
    }
    const auto& s = r.summary["summary"];
    std::cout << r.policy << ": jobs=" << s["jobs"] << " avg_jct=" << s["avg_jct"]
              << " avg_queuing=" << s["avg_queuing"] << " queued_jobs=" << s["queued_jobs"]
              << "\n";
  }
  if (failed) std::exit(1);
  manifest.add_output_dir(outdir);
  manifest.write(outdir);
}

// ---- train -------------------------------------------------------------------

static void cmd_train(const TraceArgs& args, const std::string& cutoff, int rounds,
                      double learning_rate, int max_depth, int min_leaf, double gamma,
                      double tau, const std::string& outdir) {
  fs::create_directories(outdir);
  Manifest manifest;
  manifest.command = "train";
  Handles h;
  args.open(&h, &manifest);

  json options = {{"rounds", rounds},       {"learning_rate", learning_rate},
                  {"max_depth", max_depth}, {"min_samples_leaf", min_leaf},
                  {"gamma", gamma},         {"tau", tau},
                  {"cutoff", cutoff}};
  manifest.options = options;

  int64_t cutoff_epoch = parse_time_flag(cutoff, "--cutoff");
  check(gcs_train(h.trace, cutoff_epoch, options.dump().c_str(), &h.model), "training model");

  std::string model_path = (fs::path(outdir) / "model.json").string();
  check(gcs_model_save(h.model, model_path.c_str()), "writing " + model_path);
  char* report = nullptr;
  check(gcs_model_validate(h.model, h.trace, &report), "validating model");
  std::string report_text = take(report);
  std::ofstream(fs::path(outdir) / "validation.json", std::ios::binary) << report_text;
  std::cout << report_text;
  manifest.add_output_dir(outdir);
  manifest.write(outdir);
}

// ---- forecast ----------------------------------------------------------------

static void cmd_forecast(const std::string& series_path, const std::string& model_path,
                         bool do_train, const std::string& cutoff, int horizon, int rounds,
                         const std::string& outdir) {
  fs::create_directories(outdir);
  Manifest manifest;
  manifest.command = "forecast";
  manifest.inputs.push_back(series_path);
  manifest.options = {{"series", series_path}, {"train", do_train},
                      {"cutoff", cutoff},      {"horizon", horizon},
                      {"rounds", rounds},      {"model", model_path}};
  Handles h;
  if (do_train) {
    int64_t cutoff_epoch = parse_time_flag(cutoff, "--cutoff");
    json options = {{"rounds", rounds}};
    check(gcs_forecaster_train(series_path.c_str(), cutoff_epoch, options.dump().c_str(),
                               &h.forecaster),
          "training forecaster");
    std::string out_model = (fs::path(outdir) / "forecaster.json").string();
    check(gcs_forecaster_save(h.forecaster, out_model.c_str()), "writing " + out_model);
    std::cout << "forecaster written to " << out_model << "\n";
  } else {
    if (model_path.empty()) {
      std::cerr << "gcsim: forecast needs --model or --train\n";
      std::exit(1);
    }
    check(gcs_forecaster_open(model_path.c_str(), &h.forecaster),
          "opening forecaster " + model_path);
    manifest.inputs.push_back(model_path);
  }
  char* forecast = nullptr;
  check(gcs_forecast(h.forecaster, series_path.c_str(), horizon, &forecast), "forecasting");
  std::string csv = take(forecast);
  std::ofstream(fs::path(outdir) / "forecast.csv", std::ios::binary) << csv;
  std::cout << "forecast horizon " << horizon << " min -> "
            << (fs::path(outdir) / "forecast.csv").string() << "\n";
  manifest.add_output_dir(outdir);
  manifest.write(outdir);
}

// ---- ces ---------------------------------------------------------------------

static void cmd_ces(const std::string& trace_path, const std::string& format,
                    const std::string& cluster_path, const std::string& series_path,
                    const std::string& from, const std::string& forecaster_path,
                    bool train_forecaster, int forecaster_rounds, json ces_options,
                    const std::string& outdir) {
  fs::create_directories(outdir);
  Manifest manifest;
  manifest.command = "ces";
  Handles h;

  const bool from_trace = !trace_path.empty();
  if (from_trace == !series_path.empty()) {
    std::cerr << "gcsim: ces needs exactly one of --trace or --series\n";
    std::exit(1);
  }
  int64_t eval_from = parse_time_flag(from, "--from");
  ces_options["eval_from"] = eval_from;
  manifest.options = ces_options;
  manifest.options["trace"] = trace_path;
  manifest.options["series"] = series_path;
  manifest.options["forecaster"] = forecaster_path;
  manifest.options["train_forecaster"] = train_forecaster;

  std::string series_for_training = series_path;
  if (from_trace) {
    if (cluster_path.empty()) {
      std::cerr << "gcsim: ces --trace needs --cluster\n";
      std::exit(1);
    }
    check(gcs_trace_open(trace_path.c_str(), format.c_str(), &h.trace),
          "opening trace " + trace_path);
    check(gcs_cluster_open(cluster_path.c_str(), &h.cluster),
          "opening cluster " + cluster_path);
    manifest.inputs.push_back(trace_path);
    manifest.inputs.push_back(cluster_path);
    if (train_forecaster) {
      // derive the node series once so the forecaster trains on pre-window data
      series_for_training = (fs::path(outdir) / "node_series.csv").string();
      check(gcs_node_series_from_trace(h.trace, h.cluster, series_for_training.c_str()),
            "deriving node series");
    }
  } else {
    manifest.inputs.push_back(series_path);
  }

  const bool needs_forecaster =
      ces_options.value("enabled", true) && !ces_options.value("vanilla", false);
  if (needs_forecaster) {
    if (!forecaster_path.empty()) {
      check(gcs_forecaster_open(forecaster_path.c_str(), &h.forecaster),
            "opening forecaster " + forecaster_path);
      manifest.inputs.push_back(forecaster_path);
    } else if (train_forecaster) {
      json options = {{"rounds", forecaster_rounds}};
      check(gcs_forecaster_train(series_for_training.c_str(), eval_from,
                                 options.dump().c_str(), &h.forecaster),
            "training forecaster");
      std::string out_model = (fs::path(outdir) / "forecaster.json").string();
      check(gcs_forecaster_save(h.forecaster, out_model.c_str()), "writing " + out_model);
    } else {
      std::cerr << "gcsim: ces needs --forecaster, --train-forecaster, --vanilla or "
                   "--disabled\n";
      std::exit(1);
    }
  }

  gcs_ces_report* report = nullptr;
  if (from_trace) {
    check(gcs_ces_run_trace(h.trace, h.cluster, h.forecaster, ces_options.dump().c_str(),
                            &report),
          "running ces");
  } else {
    check(gcs_ces_run_series(series_path.c_str(), h.forecaster, ces_options.dump().c_str(),
                             &report),
          "running ces");
  }
  check(gcs_ces_report_write(report, outdir.c_str()), "writing ces report");
  char* rjson = nullptr;
  gcs_ces_report_json(report, &rjson);
  std::cout << take(rjson);
  gcs_ces_report_free(report);
  manifest.add_output_dir(outdir);
  manifest.write(outdir);
}

// ---- convert ------------------------------------------------------------------

static void cmd_convert(const std::string& in_path, const std::string& format,
                        const std::string& node_export, const std::string& outdir) {
  fs::create_directories(outdir);
  Manifest manifest;
  manifest.command = "convert";
  manifest.options = {{"in", in_path}, {"format", format}, {"node_export", node_export}};
  if (!in_path.empty()) {
    Handles h;
    manifest.inputs.push_back(in_path);
    check(gcs_trace_open(in_path.c_str(), format.c_str(), &h.trace),
          "opening trace " + in_path);
    if (size_t rejects = gcs_trace_reject_count(h.trace))
      std::cerr << "gcsim: note: " << rejects << " rows rejected\n";
    std::string out = (fs::path(outdir) / "trace.csv").string();
    check(gcs_trace_save(h.trace, out.c_str()), "writing " + out);
    std::cout << gcs_trace_job_count(h.trace) << " jobs -> " << out << "\n";
  }
  if (!node_export.empty()) {
    manifest.inputs.push_back(node_export);
    std::string out = (fs::path(outdir) / "node_series.csv").string();
    check(gcs_node_series_convert(node_export.c_str(), "philly-export", out.c_str()),
          "converting node export");
    std::cout << "node series -> " << out << "\n";
  }
  manifest.add_output_dir(outdir);
  manifest.write(outdir);
}

int main(int argc, char** argv) {
  CLI::App app{"gcsim: trace-driven GPU cluster scheduling and energy-saving simulator"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Config file (key=value per line; flags override)");

  uint64_t seed = 1;
  bool seed_set = false;
  app.add_flag_callback("--version", [] {
    std::cout << "gcsim " << gcs_version() << "\n";
    std::exit(0);
  });

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a deterministic synthetic trace");
  std::string synth_params, synth_inline, synth_out = "out/synth";
  synth->add_option("--params", synth_params, "SynthParams JSON file");
  synth->add_option("--params-json", synth_inline, "Inline SynthParams JSON");
  synth->add_option("--seed", seed, "RNG seed")->each([&](const std::string&) { seed_set = true; });
  synth->add_option("--out", synth_out, "Output directory")->capture_default_str();

  // analyze
  auto* analyze = app.add_subcommand("analyze", "Characterization report from a trace");
  TraceArgs analyze_args;
  analyze_args.bind(analyze, true);
  std::string analyze_out = "out/analyze";
  bool analyze_svg = true;
  analyze->add_option("--out", analyze_out, "Report directory")->capture_default_str();
  analyze->add_flag("--svg,!--no-svg", analyze_svg, "Emit SVG charts")->capture_default_str();

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Replay a trace under scheduling policies");
  TraceArgs sim_args;
  sim_args.bind(simulate, true);
  std::string sim_policies = "fifo", sim_model, sim_from, sim_to, sim_asof,
              sim_out = "out/simulate";
  double sim_lambda = 0.5, sim_noise = 0.0;
  bool sim_oracle = false, sim_cpu = false;
  int64_t sim_threshold = 0;
  simulate->add_option("--policy,--policies", sim_policies,
                       "Comma-separated: fifo,sjf,srtf,qssf")->capture_default_str();
  simulate->add_option("--lambda", sim_lambda, "QSSF merging coefficient in [0,1]")
      ->capture_default_str();
  simulate->add_option("--model", sim_model, "Trained duration model (qssf)");
  simulate->add_flag("--oracle", sim_oracle, "QSSF with a perfect predictor");
  simulate->add_option("--noise-sigma", sim_noise,
                       "QSSF noisy-oracle mode (log-normal sigma)");
  simulate->add_option("--seed", seed, "Noise seed")->each([&](const std::string&) { seed_set = true; });
  simulate->add_flag("--include-cpu", sim_cpu, "Also replay CPU jobs");
  simulate->add_option("--queue-threshold", sim_threshold,
                       "Delay (s) beyond which a job counts as queued");
  simulate->add_option("--from", sim_from, "Replay only jobs submitted at/after (epoch)");
  simulate->add_option("--to", sim_to, "Replay only jobs submitted before (epoch)");
  simulate->add_option("--vc-asof", sim_asof, "VC configuration snapshot instant (epoch)");
  simulate->add_option("--out", sim_out, "Output directory")->capture_default_str();

  // train
  auto* train = app.add_subcommand("train", "Train the duration predictor");
  TraceArgs train_args;
  train_args.bind(train, false);
  std::string train_cutoff, train_out = "out/train";
  int train_rounds = 200, train_depth = 6, train_min_leaf = 20;
  double train_lr = 0.1, train_gamma = 0.8, train_tau = 0.3;
  train->add_option("--cutoff", train_cutoff, "Train on jobs ending before this epoch")
      ->required();
  train->add_option("--rounds", train_rounds, "Boosting rounds")->capture_default_str();
  train->add_option("--learning-rate", train_lr, "Shrinkage")->capture_default_str();
  train->add_option("--max-depth", train_depth, "Tree depth limit")->capture_default_str();
  train->add_option("--min-leaf", train_min_leaf, "Min samples per leaf")
      ->capture_default_str();
  train->add_option("--gamma", train_gamma, "Rolling estimator decay")->capture_default_str();
  train->add_option("--tau", train_tau, "Name similarity threshold")->capture_default_str();
  train->add_option("--out", train_out, "Output directory")->capture_default_str();

  // forecast
  auto* forecast = app.add_subcommand("forecast", "Train/apply the node-count forecaster");
  std::string fc_series, fc_model, fc_cutoff, fc_out = "out/forecast";
  bool fc_train = false;
  int fc_horizon = 180, fc_rounds = 200;
  forecast->add_option("--series", fc_series, "Node series CSV (minute,total,running)")
      ->required();
  forecast->add_flag("--train", fc_train, "Train a forecaster instead of loading one");
  forecast->add_option("--cutoff", fc_cutoff, "Training cutoff epoch (with --train)");
  forecast->add_option("--model", fc_model, "Existing forecaster JSON");
  forecast->add_option("--horizon", fc_horizon, "Forecast horizon in minutes")
      ->capture_default_str();
  forecast->add_option("--rounds", fc_rounds, "Boosting rounds (with --train)")
      ->capture_default_str();
  forecast->add_option("--out", fc_out, "Output directory")->capture_default_str();

  // ces
  auto* ces = app.add_subcommand("ces", "Cluster energy saving replay");
  std::string ces_trace, ces_format = "canonical", ces_cluster, ces_series, ces_from,
              ces_forecaster, ces_out = "out/ces";
  bool ces_train_fc = false, ces_vanilla = false, ces_disabled = false;
  int ces_sigma = 3, ces_xi_h = 2, ces_xi_p = 2, ces_fc_rounds = 200;
  int64_t ces_check = 600, ces_hw = 3600, ces_horizon = 10800, ces_boot = 300;
  double ces_watts = 800.0, ces_cooling = 2.0;
  ces->add_option("--trace", ces_trace, "Job trace (derives the node series)");
  ces->add_option("--format", ces_format, "Trace format")->capture_default_str();
  ces->add_option("--cluster", ces_cluster, "Cluster spec JSON (with --trace)");
  ces->add_option("--series", ces_series, "Node series CSV (minute,total,running)");
  ces->add_option("--from", ces_from, "Evaluation window start (epoch)")->required();
  ces->add_option("--forecaster", ces_forecaster, "Trained forecaster JSON");
  ces->add_flag("--train-forecaster", ces_train_fc,
                "Train a forecaster on pre-window data");
  ces->add_option("--forecaster-rounds", ces_fc_rounds, "Boosting rounds when training")
      ->capture_default_str();
  ces->add_option("--sigma", ces_sigma, "Buffer nodes")->capture_default_str();
  ces->add_option("--xi-h", ces_xi_h, "Recent-trend threshold (nodes)")->capture_default_str();
  ces->add_option("--xi-p", ces_xi_p, "Future-trend threshold (nodes)")->capture_default_str();
  ces->add_option("--check-period", ces_check, "Periodic check (s)")->capture_default_str();
  ces->add_option("--history-window", ces_hw, "Recent trend window (s)")->capture_default_str();
  ces->add_option("--horizon", ces_horizon, "Forecast horizon (s)")->capture_default_str();
  ces->add_option("--boot-delay", ces_boot, "Node boot delay (s)")->capture_default_str();
  ces->add_flag("--vanilla", ces_vanilla, "Baseline DRS: sleep whenever idle");
  ces->add_flag("--disabled", ces_disabled, "Controller off (baseline utilization)");
  ces->add_option("--watts", ces_watts, "Idle node watts")->capture_default_str();
  ces->add_option("--cooling", ces_cooling, "Cooling energy multiplier")->capture_default_str();
  ces->add_option("--out", ces_out, "Output directory")->capture_default_str();

  // convert
  auto* convert = app.add_subcommand("convert", "Convert external layouts to canonical files");
  std::string cv_in, cv_format = "helios", cv_node_export, cv_out = "out/convert";
  convert->add_option("--in", cv_in, "Trace in an external layout");
  convert->add_option("--format", cv_format, "helios|philly|philly-attempts")
      ->capture_default_str();
  convert->add_option("--node-export", cv_node_export, "Philly per-minute GPU export");
  convert->add_option("--out", cv_out, "Output directory")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  if (synth->parsed()) cmd_synth(synth_params, synth_inline, seed, seed_set, synth_out);
  if (analyze->parsed()) cmd_analyze(analyze_args, analyze_out, analyze_svg);
  if (simulate->parsed()) {
    std::vector<std::string> policies;
    std::string cur;
    for (char c : sim_policies + ",") {
      if (c == ',') {
        if (!cur.empty()) policies.push_back(cur);
        cur.clear();
      } else {
        cur.push_back(c);
      }
    }
    cmd_simulate(sim_args, policies, sim_lambda, sim_model, sim_oracle, sim_noise, seed,
                 sim_cpu, sim_threshold, sim_from, sim_to, sim_asof, sim_out);
  }
  if (train->parsed())
    cmd_train(train_args, train_cutoff, train_rounds, train_lr, train_depth, train_min_leaf,
              train_gamma, train_tau, train_out);
  if (forecast->parsed())
    cmd_forecast(fc_series, fc_model, fc_train, fc_cutoff, fc_horizon, fc_rounds, fc_out);
  if (ces->parsed()) {
    json options = {{"sigma", ces_sigma},     {"xi_h", ces_xi_h},
                    {"xi_p", ces_xi_p},       {"check_period", ces_check},
                    {"history_window", ces_hw}, {"forecast_horizon", ces_horizon},
                    {"boot_delay", ces_boot}, {"enabled", !ces_disabled},
                    {"vanilla", ces_vanilla}, {"idle_node_watts", ces_watts},
                    {"cooling_multiplier", ces_cooling}};
    cmd_ces(ces_trace, ces_format, ces_cluster, ces_series, ces_from, ces_forecaster,
            ces_train_fc, ces_fc_rounds, options, ces_out);
  }
  if (convert->parsed()) cmd_convert(cv_in, cv_format, cv_node_export, cv_out);
  return 0;
}
