#pragma once

#include <string>

#include "cflow/campaign.hpp"

namespace cflow {

/// Full nested report: config echo, resolved tolerances, per-point records,
/// summary with the lowercase verdict at the root.
std::string report_to_json(const Report& rep);

/// One row per (point, order) with columns
/// point,order,estimate_norm,oracle_norm,residual,error_estimate,verdict.
/// Coordinates are ';'-joined; skipped points emit a single "skipped" row.
/// Output is deterministic for a fixed config and seed.
std::string report_to_csv(const Report& rep);

/// Writes the report in the requested format ("json" or "csv").
/// Throws IoError when the file cannot be written, ConfigError on a bad format.
void write_report(const Report& rep, const std::string& path, const std::string& format);

}  // namespace cflow
