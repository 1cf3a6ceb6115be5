#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cflow/diff.hpp"
#include "cflow/field.hpp"

namespace cflow {

/// Everything a verification run needs, as parsed text plus numeric knobs.
/// Raw strings are resolved (and validated) inside run_campaign so that file
/// values and command-line overrides merge uniformly.
struct CampaignConfig {
  std::string statement = "theorem1";
  int dim = 0;
  std::string bracket;
  std::vector<std::string> fields;  ///< component lists, slot order
  std::string section;
  std::string algebra;             ///< preset name or file path
  std::vector<int> reparam;        ///< per-slot curve orders (default 1)
  int points = 10;
  std::uint64_t seed = 1;
  std::string sample_box;          ///< "lo:hi[,lo:hi...]", default [-1,1]^dim
  std::string domain_box;          ///< field/section domain, default [-10,10]^dim
  std::vector<std::string> explicit_points;  ///< raw "c1,c2,..." entries

  double h0 = 0.0;                 ///< 0 = per-order default
  int levels = 4;
  int stencil_order = 4;
  double vanish_tol = 1e-5;
  double match_tol = 0.0;          ///< 0 = 1e-7 closed-form, 1e-4 numeric
  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
  double t_max = 2.0;
  std::string closed_form = "auto";  ///< auto | on | off
  int order = 3;                   ///< highest order for the lemma7 sweep
  bool parallel = true;
  std::string format = "json";     ///< json | csv
  std::string out;                 ///< report path, empty = no file
};

/// Parses "key = value" lines ('#' comments). Throws ConfigError / IoError.
CampaignConfig load_config_file(const std::string& path);
/// Applies one key/value pair onto a config (same keys as the file format).
void set_config_entry(CampaignConfig& cfg, const std::string& key, const std::string& value);

/// One derivative-order check at one sample point.
struct OrderRecord {
  int order = 0;
  double estimate_norm = 0.0;
  double oracle_norm = 0.0;
  double residual = 0.0;
  double error_estimate = 0.0;
  bool pass = false;
};

struct PointRecord {
  Vec point;
  std::vector<OrderRecord> orders;
  std::string verdict;  ///< pass | fail | skipped
  std::string reason;   ///< populated for skipped records
};

struct Report {
  CampaignConfig config;
  std::vector<PointRecord> records;
  int n_pass = 0;
  int n_fail = 0;
  int n_skip = 0;
  /// pass iff no record failed and >= ceil(0.8 * points) passed.
  std::string verdict = "pass";
  double match_tol_effective = 0.0;
  bool all_closed_form = false;
  double elapsed_seconds = 0.0;
};

/// Runs the configured statement over its sample points. Throws ConfigError
/// on invalid input; per-point numeric failures become skipped records.
Report run_campaign(const CampaignConfig& cfg);

/// 0 verdict pass, 3 when more than 20% of points were skipped, 1 otherwise.
int report_exit_code(const Report& rep);

}  // namespace cflow
