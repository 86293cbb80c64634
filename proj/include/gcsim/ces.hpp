#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gcsim/gbdt.hpp"
#include "gcsim/trace.hpp"

namespace gcsim {

enum class NodeState { ActiveBusy, ActiveIdle, Sleeping, Waking };

// Per-minute node counts. `running` is demand: nodes hosting at least one job
// in that minute.
struct NodeSeries {
  int64_t start_minute = 0;  // epoch seconds, minute aligned
  int total = 0;
  std::vector<int> running;

  size_t size() const { return running.size(); }
  int64_t minute_epoch(size_t i) const { return start_minute + static_cast<int64_t>(i) * 60; }
};

NodeSeries parse_node_series_csv(std::istream& in);  // header: minute,total,running
std::string node_series_to_csv(const NodeSeries& series);
// Philly-style per-minute monitoring export: time,machineId,<per-gpu util...>.
// A machine is running in a minute when any GPU reports utilization > 0.
NodeSeries parse_philly_node_export(std::istream& in);

// Reconstructs node occupancy from recorded start/end times by replaying the
// consolidated allocator; unplaceable jobs fall back to ceil(g / gpus_per_node)
// nodes with per-VC counts clamped to the VC size.
NodeSeries derive_node_series(const std::vector<JobRecord>& jobs, const ClusterSpec& cluster);

struct CESConfig {
  int sigma = 3;                     // buffer nodes
  int xi_h = 2;                      // recent-trend threshold (nodes)
  int xi_p = 2;                      // future-trend threshold (nodes)
  int64_t check_period = 600;        // seconds
  int64_t history_window = 3600;     // seconds
  int64_t forecast_horizon = 10800;  // seconds
  int64_t boot_delay = 300;          // seconds
  bool enabled = true;
  bool vanilla = false;  // sleep whenever idle, ignoring both trends
};

struct EnergyModel {
  double idle_node_watts = 800.0;
  double cooling_multiplier = 2.0;
};

// Alg. 2 primitives.
int job_arrival_check(int active, int requested, int sigma);
std::optional<int> periodic_check(double trend_recent, double trend_future, double xi_h,
                                  double xi_p, int running, int sigma);
double energy_savings_kwh(double avg_sleeping_nodes, double hours, const EnergyModel& energy);

// Symmetric mean absolute percentage error; 0/0 points are skipped.
double smape(const std::vector<double>& actual, const std::vector<double>& forecast);

// ---- forecasting -----------------------------------------------------------

struct ForecastFeatureConfig {
  std::vector<int> rolling_windows = {60, 360, 1440};  // minutes: 1h, 6h, 24h
  std::vector<int> lags = {60, 1440, 10080};           // minutes: 1h, 24h, 168h
  std::vector<int64_t> holidays;                       // epoch at 00:00 of each holiday
};

// Features for predicting the series value at index t given values[0..t-1]:
// [hour, dow, day-of-month, holiday, rolling means..., rolling stds..., lags...].
// Returns false when history is too short for a window or lag.
bool forecast_features_row(const std::vector<double>& values, size_t t, int64_t start_minute,
                           const ForecastFeatureConfig& config, std::vector<double>* out);

class Forecaster {
 public:
  virtual ~Forecaster() = default;
  // Predicted running nodes for minutes now+1 .. now+horizon. May return fewer
  // steps; callers treat a short forecast as "do not sleep".
  virtual std::vector<double> forecast(const NodeSeries& history, size_t now_index,
                                       int horizon_minutes) const = 0;
  virtual int64_t train_cutoff_epoch() const = 0;
};

class GbdtForecaster : public Forecaster {
 public:
  // Trains on series[0..train_end_index] (inclusive). Recursive multi-step
  // prediction at forecast time; outputs clamped to [0, total].
  static GbdtForecaster train(const NodeSeries& series, size_t train_end_index,
                              const ForecastFeatureConfig& features, const GBDTConfig& gbdt);

  std::vector<double> forecast(const NodeSeries& history, size_t now_index,
                               int horizon_minutes) const override;
  int64_t train_cutoff_epoch() const override { return cutoff_epoch_; }

  std::string to_json() const;
  static GbdtForecaster from_json(const std::string& text);

 private:
  GbdtForecaster() = default;
  ForecastFeatureConfig features_;
  GBDTModel model_;
  int total_nodes_ = 0;
  int64_t cutoff_epoch_ = 0;
};

// Test helper: reads the actual future from a full series.
class OracleForecaster : public Forecaster {
 public:
  explicit OracleForecaster(NodeSeries full) : full_(std::move(full)) {}
  std::vector<double> forecast(const NodeSeries&, size_t now_index,
                               int horizon_minutes) const override;
  int64_t train_cutoff_epoch() const override { return 0; }

 private:
  NodeSeries full_;
};

// ---- replay ------------------------------------------------------------------

struct CESInput {
  NodeSeries series;                // full span, history before eval included
  std::vector<size_t> arrivals;     // minute index per job arrival (sorted)
  size_t eval_begin = 0;            // index where CES control starts
};

CESInput ces_input_from_trace(const std::vector<JobRecord>& jobs, const ClusterSpec& cluster,
                              int64_t eval_from_epoch);
CESInput ces_input_from_series(NodeSeries series, int64_t eval_from_epoch);

struct CESReport {
  int64_t eval_start = 0;
  int64_t eval_end = 0;
  int total_nodes = 0;
  double avg_sleeping = 0.0;
  double avg_active = 0.0;
  double avg_running = 0.0;
  size_t wake_calls = 0;
  size_t woken_nodes = 0;
  double daily_wakeups = 0.0;
  double avg_nodes_per_wake = 0.0;
  double util_before = 0.0;  // running / total, every node always on
  double util_after = 0.0;   // running / active under CES
  size_t observed_jobs = 0;
  size_t affected_jobs = 0;
  size_t short_forecasts = 0;  // periodic checks skipped fail-safe
  double energy_saved_kwh = 0.0;
  double energy_saved_kwh_annualized = 0.0;
  std::vector<std::array<int, 3>> timeline;  // per minute: active, running, sleeping
};

// Replays the demand timeline against the node state machine. The job
// timeline itself stays fixed; arrivals finding fewer ready nodes than the
// demand requires are counted as affected (they would wait <= boot_delay).
CESReport run_ces_simulation(const CESInput& input, const CESConfig& config,
                             const Forecaster* forecaster, const EnergyModel& energy);

std::string ces_report_to_json(const CESReport& report);
std::string ces_timeline_to_csv(const CESReport& report);

}  // namespace gcsim
