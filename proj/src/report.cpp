#include "nklab/report.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "json.hpp"

namespace nklab {

namespace {

using Json = nlohmann::ordered_json;

// 17 significant digits: enough for a lossless double round-trip.
std::string real_cell(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Json record_json(const CheckRecord& r) {
  Json j;
  j["suite"] = r.suite;
  j["check"] = r.check;
  j["samples"] = r.samples;
  j["max_residual"] = r.max_residual;
  j["tolerance"] = r.tolerance;
  j["expected"] = r.expected ? Json(*r.expected) : Json(nullptr);
  j["observed"] = r.observed ? Json(*r.observed) : Json(nullptr);
  j["pass"] = r.pass;
  return j;
}

}  // namespace

void RunConfig::validate() const {
  if (samples < 1) {
    throw InvalidInput("config: samples must be at least 1");
  }
  if (!(tol_exact > 0.0) || !(tol_fd > 0.0) || !(fd_step > 0.0)) {
    throw InvalidInput("config: tolerances and the step must be positive");
  }
  if (format != "json" && format != "csv") {
    throw InvalidInput("config: format must be json or csv, got '" + format +
                       "'");
  }
}

bool apply_env_seed_override(RunConfig& cfg) {
  const char* env = std::getenv("NKLAB_SEED");
  if (env == nullptr) return false;
  std::uint64_t value = 0;
  const char* end = env + std::string_view(env).size();
  auto res = std::from_chars(env, end, value);
  if (res.ec != std::errc{} || res.ptr != end) {
    throw InvalidInput(std::string("NKLAB_SEED is not an unsigned integer: '") +
                       env + "'");
  }
  cfg.seed = value;
  return true;
}

CheckRecord make_record(std::string suite, std::string check, int samples,
                        double max_residual, double tolerance,
                        std::optional<double> expected,
                        std::optional<double> observed) {
  CheckRecord r;
  r.suite = std::move(suite);
  r.check = std::move(check);
  r.samples = samples;
  r.max_residual = max_residual;
  r.tolerance = tolerance;
  r.expected = expected;
  r.observed = observed;
  r.pass = max_residual <= tolerance;
  if (expected && observed) {
    r.pass = r.pass && std::abs(*observed - *expected) <= tolerance;
  }
  return r;
}

bool all_pass(const std::vector<CheckRecord>& records) {
  for (const auto& r : records) {
    if (!r.pass) return false;
  }
  return true;
}

std::string render_json(const std::vector<CheckRecord>& records,
                        const RunConfig& cfg) {
  Json doc;
  Json jc;
  jc["seed"] = cfg.seed;
  jc["samples"] = cfg.samples;
  jc["tol_exact"] = cfg.tol_exact;
  jc["tol_fd"] = cfg.tol_fd;
  jc["fd_step"] = cfg.fd_step;
  jc["lambda_grid"] = cfg.lambda_grid;
  jc["format"] = cfg.format;
  doc["config"] = jc;

  Json recs = Json::array();
  int passed = 0;
  for (const auto& r : records) {
    recs.push_back(record_json(r));
    if (r.pass) ++passed;
  }
  doc["records"] = recs;

  Json sum;
  sum["total"] = static_cast<int>(records.size());
  sum["passed"] = passed;
  sum["failed"] = static_cast<int>(records.size()) - passed;
  doc["summary"] = sum;

  return doc.dump(2) + "\n";
}

std::string render_csv(const std::vector<CheckRecord>& records) {
  std::string out =
      "suite,check,samples,max_residual,tolerance,expected,observed,pass\n";
  for (const auto& r : records) {
    out += r.suite;
    out += ',';
    out += r.check;
    out += ',';
    out += std::to_string(r.samples);
    out += ',';
    out += real_cell(r.max_residual);
    out += ',';
    out += real_cell(r.tolerance);
    out += ',';
    if (r.expected) out += real_cell(*r.expected);
    out += ',';
    if (r.observed) out += real_cell(*r.observed);
    out += ',';
    out += r.pass ? "true" : "false";
    out += '\n';
  }
  return out;
}

void write_report(const std::vector<CheckRecord>& records,
                  const RunConfig& cfg) {
  const std::string text =
      cfg.format == "csv" ? render_csv(records) : render_json(records, cfg);
  if (cfg.out_path.empty()) {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(cfg.out_path, std::ios::binary);
  if (!out) {
    throw IoError("cannot open '" + cfg.out_path + "' for writing");
  }
  out << text;
  out.flush();
  if (!out.good()) {
    throw IoError("failed while writing '" + cfg.out_path + "'");
  }
}

}  // namespace nklab
