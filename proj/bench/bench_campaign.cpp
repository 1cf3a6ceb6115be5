// Benchmark: the same campaign on one thread and on the OpenMP pool.
// Points are independent, so the parallel sweep must reproduce the serial
// records byte for byte; the benchmark checks that while timing both.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "cflow/campaign.hpp"
#include "cflow/report_io.hpp"

namespace {

cflow::CampaignConfig bench_config(int points) {
  cflow::CampaignConfig cfg;
  cfg.statement = "theorem1";
  cfg.dim = 3;
  cfg.bracket = "[[1,2],3]";
  // Non-affine components force the ODE integrator, the expensive path.
  cfg.fields = {"1, 0.1*sin(x3), 0", "0, x1, 0.1*x1*x2", "0.1*x2, 0, x2"};
  cfg.closed_form = "off";
  cfg.points = points;
  cfg.seed = 7;
  return cfg;
}

double timed_run(cflow::CampaignConfig cfg, bool parallel, cflow::Report& out) {
  cfg.parallel = parallel;
  const auto t0 = std::chrono::steady_clock::now();
  out = cflow::run_campaign(cfg);
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  const int points = argc > 1 ? std::atoi(argv[1]) : 24;
  const cflow::CampaignConfig cfg = bench_config(points);

#ifdef _OPENMP
  std::printf("OpenMP enabled, max threads %d\n", omp_get_max_threads());
#else
  std::printf("OpenMP not available; both runs are serial\n");
#endif
  std::printf("campaign: %s, %d points, numeric flows\n", cfg.statement.c_str(), points);

  cflow::Report serial_rep, parallel_rep;
  const double ts = timed_run(cfg, false, serial_rep);
  const double tp = timed_run(cfg, true, parallel_rep);

  const bool identical =
      cflow::report_to_csv(serial_rep) == cflow::report_to_csv(parallel_rep);
  std::printf("serial   : %8.3f s (verdict %s)\n", ts, serial_rep.verdict.c_str());
  std::printf("parallel : %8.3f s (verdict %s)\n", tp, parallel_rep.verdict.c_str());
  std::printf("speedup  : %8.2fx\n", tp > 0 ? ts / tp : 0.0);
  std::printf("records identical: %s\n", identical ? "yes" : "NO");
  return identical ? 0 : 1;
}
