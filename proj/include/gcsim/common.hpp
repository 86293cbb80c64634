#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gcsim {

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};
struct ParseError : Error {
  explicit ParseError(const std::string& msg) : Error(msg) {}
};
struct IoError : Error {
  explicit IoError(const std::string& msg) : Error(msg) {}
};
struct InvalidArgError : Error {
  explicit InvalidArgError(const std::string& msg) : Error(msg) {}
};

// Invariant checks stay on in release builds; the simulator relies on them.
#define GCSIM_CHECK(cond, msg)                                          \
  do {                                                                  \
    if (!(cond)) throw ::gcsim::Error(std::string("invariant: ") + (msg)); \
  } while (0)

// ---- calendar ----------------------------------------------------------
// All conversions are UTC; traces carry a single native timezone.

struct CivilTime {
  int year = 1970;
  int month = 1;   // 1..12
  int day = 1;     // 1..31
  int hour = 0;
  int minute = 0;
  int second = 0;
  int day_of_week = 3;  // Monday = 0
};

int64_t days_from_civil(int y, int m, int d);
void civil_from_days(int64_t z, int* y, int* m, int* d);
CivilTime civil_from_epoch(int64_t epoch);
int64_t epoch_from_civil(int y, int m, int d, int hh = 0, int mm = 0, int ss = 0);

// Accepts "YYYY-MM-DD", "YYYY-MM-DD HH:MM:SS", "YYYY-MM-DDTHH:MM:SS" or a
// plain integer epoch.
std::optional<int64_t> parse_timestamp(std::string_view s);
std::string format_date(int64_t epoch);      // YYYY-MM-DD
std::string format_datetime(int64_t epoch);  // YYYY-MM-DD HH:MM:SS

// ---- rng ---------------------------------------------------------------
// Seed-exact sampling: distributions are hand-rolled on top of the engine
// because std::*_distribution output differs across standard libraries.

class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}

  uint64_t next_u64();
  double next_double();                 // [0, 1)
  uint64_t next_below(uint64_t n);      // [0, n), n > 0
  double normal();                      // standard normal (Box-Muller)
  double lognormal(double mu, double sigma);
  // Index into w proportional to weight; weights need not be normalized.
  size_t pick_weighted(const std::vector<double>& w);

 private:
  uint64_t state_;
};

// ---- strings / parsing --------------------------------------------------

std::vector<std::string> split(std::string_view s, char sep);
std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
std::optional<int64_t> parse_i64(std::string_view s);
std::optional<double> parse_f64(std::string_view s);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);
std::string sha256_file(const std::string& path);
std::string sha256_bytes(std::string_view data);

}  // namespace gcsim
