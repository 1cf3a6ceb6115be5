// Command-line front end: `cflow verify <statement>` runs one verification
// campaign from a config file plus flag overrides and emits a report.

#include <cstdio>
#include <exception>
#include <map>
#include <string>
#include <utility>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>

#include "cflow/campaign.hpp"
#include "cflow/errors.hpp"
#include "cflow/report_io.hpp"

namespace {

int run_verify(cflow::CampaignConfig cfg, bool quiet) {
  const cflow::Report rep = cflow::run_campaign(cfg);
  if (!cfg.out.empty()) cflow::write_report(rep, cfg.out, cfg.format);
  if (!quiet) {
    if (cfg.out.empty()) {
      const std::string body = cfg.format == "csv" ? cflow::report_to_csv(rep)
                                                   : cflow::report_to_json(rep);
      std::fputs(body.c_str(), stdout);
    }
    std::fprintf(stderr,
                 "%s: %zu record(s) | pass %d fail %d skipped %d | verdict %s | "
                 "match_tol %.3g | %.2f s\n",
                 cfg.statement.c_str(), rep.records.size(), rep.n_pass, rep.n_fail,
                 rep.n_skip, rep.verdict.c_str(), rep.match_tol_effective,
                 rep.elapsed_seconds);
  }
  return cflow::report_exit_code(rep);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical verification of commutator-of-flows identities"};
  app.require_subcommand(1);

  CLI::App* verify = app.add_subcommand("verify", "Run a verification campaign");
  std::string statement;
  std::string config_path;
  std::vector<std::string> field_vals;
  std::vector<std::string> point_vals;
  bool serial = false;
  bool quiet = false;
  int threads = 0;

  CLI::Option* statement_opt =
      verify->add_option("statement", statement,
                         "theorem1 | theorem10 | lemma6 | lemma7 | lemma8 | lemma9 | "
                         "prop11 | cor12-first | cor12-second (optional with --config)");
  verify->add_option("--config", config_path, "campaign config file (key = value lines)");
  verify->add_option("--field", field_vals,
                     "vector field components, one flag per slot (replaces config fields)");
  verify->add_option("--point", point_vals,
                     "explicit sample point c1,c2,... (replaces config points)");

  // Scalar overrides share the config-file parser via set_config_entry.
  std::map<std::string, std::string> vals;
  std::vector<std::pair<CLI::Option*, std::string>> scalar_opts;
  const auto pass = [&](const std::string& flag, const std::string& key,
                        const std::string& help) {
    scalar_opts.emplace_back(verify->add_option(flag, vals[key], help), key);
  };
  pass("--bracket", "bracket", "bracket word, e.g. [[1,2],3]");
  pass("--section", "section", "tensor section, e.g. type=(0,1); w_1 = x2");
  pass("--algebra", "algebra", "algebra preset name or basis file");
  pass("--reparam", "reparam", "curve orders per slot, e.g. 1,2");
  pass("--points", "points", "number of random sample points");
  pass("--seed", "seed", "RNG seed for sample points");
  pass("--dim", "dim", "manifold dimension");
  pass("--box", "box", "sample box lo:hi[,lo:hi...]");
  pass("--domain", "domain", "domain box lo:hi[,lo:hi...]");
  pass("--h0", "h0", "base derivative step (0 = per-order default)");
  pass("--levels", "levels", "Richardson levels");
  pass("--stencil-order", "stencil_order", "stencil accuracy order");
  pass("--match-tol", "match_tol", "residual tolerance (0 = auto)");
  pass("--vanish-tol", "vanish_tol", "vanishing-order tolerance");
  pass("--abs-tol", "abs_tol", "integrator absolute tolerance");
  pass("--rel-tol", "rel_tol", "integrator relative tolerance");
  pass("--t-max", "t_max", "largest |t| the integrator accepts");
  pass("--closed-form", "closed_form", "auto | on | off");
  pass("--order", "order", "highest derivative order (lemma7 sweep)");
  pass("--format", "format", "report format: json | csv");
  pass("--out", "out", "report output path (default: stdout)");
  verify->add_flag("--serial", serial, "run the point sweep on one thread");
  verify->add_option("--threads", threads, "OpenMP thread count (0 = runtime default)");
  verify->add_flag("--quiet", quiet, "suppress stdout report and summary line");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;  // usage problems are config errors
  }

  try {
    if (config_path.empty() && statement_opt->count() == 0)
      throw cflow::ConfigError("a statement argument or --config file is required");
    cflow::CampaignConfig cfg;
    if (!config_path.empty()) cfg = cflow::load_config_file(config_path);
    if (statement_opt->count() > 0) cfg.statement = statement;
    for (const auto& [opt, key] : scalar_opts)
      if (opt->count() > 0) cflow::set_config_entry(cfg, key, vals[key]);
    if (!field_vals.empty()) {
      cfg.fields.clear();
      for (const auto& f : field_vals) cflow::set_config_entry(cfg, "field", f);
    }
    if (!point_vals.empty()) {
      cfg.explicit_points.clear();
      for (const auto& p : point_vals) cflow::set_config_entry(cfg, "point", p);
    }
    if (serial) cfg.parallel = false;
#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#endif
    return run_verify(std::move(cfg), quiet);
  } catch (const cflow::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const cflow::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 1;
  }
}
