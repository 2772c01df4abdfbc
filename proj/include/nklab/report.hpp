#ifndef NKLAB_REPORT_HPP
#define NKLAB_REPORT_HPP

// Run configuration and machine-readable reports. A verification run is a
// flat list of CheckRecord values; this header renders them as JSON (one
// object with config, records, and a summary) or CSV (fixed header, one row
// per record) with byte-deterministic output for a fixed configuration, so
// reports can be diffed across runs and platforms.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nklab/errors.hpp"

namespace nklab {

struct RunConfig {
  std::uint64_t seed = 42;
  int samples = 1000;
  double tol_exact = 1e-10;
  double tol_fd = 1e-5;
  double fd_step = 1e-4;
  std::vector<double> lambda_grid = {-1.0, 0.5, 2.0, 3.0};
  std::string out_path;         // empty: write to standard output
  std::string format = "json";  // "json" or "csv"

  // Throws InvalidInput unless samples >= 1, every tolerance and the step
  // are positive, and format is one of the two known names.
  void validate() const;
};

// Replaces cfg.seed with the value of the NKLAB_SEED environment variable
// when that variable is set; returns whether an override happened. A set but
// non-numeric value throws InvalidInput rather than being ignored.
bool apply_env_seed_override(RunConfig& cfg);

struct CheckRecord {
  std::string suite;
  std::string check;
  int samples = 0;
  double max_residual = 0.0;
  double tolerance = 0.0;
  std::optional<double> expected;
  std::optional<double> observed;
  bool pass = false;
};

// Builds a record with `pass` derived from the stated invariant:
// max_residual <= tolerance, and |observed - expected| <= tolerance whenever
// both optionals are present.
CheckRecord make_record(std::string suite, std::string check, int samples,
                        double max_residual, double tolerance,
                        std::optional<double> expected = std::nullopt,
                        std::optional<double> observed = std::nullopt);

bool all_pass(const std::vector<CheckRecord>& records);

// JSON rendering: {"config": {...}, "records": [...], "summary":
// {"total": n, "passed": p, "failed": f}}, two-space indentation, keys in
// declaration order. Absent optionals render as null.
std::string render_json(const std::vector<CheckRecord>& records,
                        const RunConfig& cfg);

// CSV rendering with the fixed header
//   suite,check,samples,max_residual,tolerance,expected,observed,pass
// one row per record, 17 significant digits for real values, empty cells
// for absent optionals, "true"/"false" for pass.
std::string render_csv(const std::vector<CheckRecord>& records);

// Renders in cfg.format and writes to cfg.out_path, or to standard output
// when the path is empty. Throws IoError when the file cannot be written.
void write_report(const std::vector<CheckRecord>& records,
                  const RunConfig& cfg);

}  // namespace nklab

#endif
