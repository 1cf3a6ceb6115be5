#include "cflow/report_io.hpp"

#include <cstdio>
#include <fstream>
#include <string>

#include <json.hpp>

#include "cflow/errors.hpp"

namespace cflow {
namespace {

using ordered_json = nlohmann::ordered_json;

std::string num17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string join_point(const Vec& x) {
  std::string out;
  for (int d = 0; d < x.size(); ++d) {
    if (d) out += ';';
    out += num17(x[d]);
  }
  return out;
}

ordered_json config_json(const CampaignConfig& c) {
  ordered_json j;
  j["statement"] = c.statement;
  j["dim"] = c.dim;
  j["bracket"] = c.bracket;
  j["fields"] = c.fields;
  j["section"] = c.section;
  j["algebra"] = c.algebra;
  j["reparam"] = c.reparam;
  j["points"] = c.points;
  j["seed"] = c.seed;
  j["box"] = c.sample_box;
  j["domain"] = c.domain_box;
  j["explicit_points"] = c.explicit_points;
  j["h0"] = c.h0;
  j["levels"] = c.levels;
  j["stencil_order"] = c.stencil_order;
  j["vanish_tol"] = c.vanish_tol;
  j["match_tol"] = c.match_tol;
  j["abs_tol"] = c.abs_tol;
  j["rel_tol"] = c.rel_tol;
  j["t_max"] = c.t_max;
  j["closed_form"] = c.closed_form;
  j["order"] = c.order;
  j["parallel"] = c.parallel;
  j["format"] = c.format;
  j["out"] = c.out;
  return j;
}

}  // namespace

std::string report_to_json(const Report& rep) {
  ordered_json j;
  j["verdict"] = rep.verdict;
  j["config"] = config_json(rep.config);
  j["resolved"] = {{"match_tol", rep.match_tol_effective},
                   {"closed_form", rep.all_closed_form}};
  ordered_json recs = ordered_json::array();
  for (const auto& r : rep.records) {
    ordered_json jr;
    ordered_json pt = ordered_json::array();
    for (int d = 0; d < r.point.size(); ++d) pt.push_back(r.point[d]);
    jr["point"] = pt;
    jr["verdict"] = r.verdict;
    if (!r.reason.empty()) jr["reason"] = r.reason;
    ordered_json rows = ordered_json::array();
    for (const auto& o : r.orders) {
      rows.push_back({{"order", o.order},
                      {"estimate_norm", o.estimate_norm},
                      {"oracle_norm", o.oracle_norm},
                      {"residual", o.residual},
                      {"error_estimate", o.error_estimate},
                      {"verdict", o.pass ? "pass" : "fail"}});
    }
    jr["orders"] = rows;
    recs.push_back(std::move(jr));
  }
  j["records"] = recs;
  j["summary"] = {{"points", rep.records.size()},
                  {"pass", rep.n_pass},
                  {"fail", rep.n_fail},
                  {"skipped", rep.n_skip},
                  {"verdict", rep.verdict},
                  {"elapsed_seconds", rep.elapsed_seconds}};
  return j.dump(2) + "\n";
}

std::string report_to_csv(const Report& rep) {
  std::string out = "point,order,estimate_norm,oracle_norm,residual,error_estimate,verdict\n";
  for (const auto& r : rep.records) {
    const std::string pt = join_point(r.point);
    if (r.verdict == "skipped") {
      out += pt + ",0,nan,nan,nan,nan,skipped\n";
      continue;
    }
    for (const auto& o : r.orders) {
      out += pt + ',' + std::to_string(o.order) + ',' + num17(o.estimate_norm) + ',' +
             num17(o.oracle_norm) + ',' + num17(o.residual) + ',' +
             num17(o.error_estimate) + ',' + (o.pass ? "pass" : "fail") + '\n';
    }
  }
  return out;
}

void write_report(const Report& rep, const std::string& path, const std::string& format) {
  std::string body;
  if (format == "json") {
    body = report_to_json(rep);
  } else if (format == "csv") {
    body = report_to_csv(rep);
  } else {
    throw ConfigError("unknown report format '" + format + "' (expected json or csv)");
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f << body;
  if (!f) throw IoError("failed while writing '" + path + "'");
}

}  // namespace cflow
