#include "expsplit/tuner.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <thread>

#include "expsplit/bench.hpp"
#include "expsplit/stability.hpp"
#include "expsplit/steppers.hpp"
#include "expsplit/threads.hpp"

namespace expsplit {

namespace {

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

BackendChoice natural_backend(const GridSpec& grid, const SchemeSpec& scheme) {
  if (grid.bc == BoundaryKind::Periodic) return BackendChoice::Fourier;
  // mu-mode grids expose only the exponential; phi-based schemes go through
  // Arnoldi on the split operator
  switch (scheme.id) {
    case Scheme::le:
    case Scheme::sle:
    case Scheme::l2a:
    case Scheme::l2b:
    case Scheme::sl2:
      return BackendChoice::Kron;
    default:
      return BackendChoice::Krylov;
  }
}

}  // namespace

std::vector<double> default_lambda_grid(const SchemeSpec& scheme, int points) {
  const double lo = lambda_threshold(scheme);
  std::vector<double> grid(points);
  for (int i = 0; i < points; ++i)
    grid[i] = lo + (1.0 - lo) * double(i) / double(points - 1);
  return grid;
}

ScanReport scan_lambda(const SchemeSpec& scheme, const Preset& preset,
                       Index coarse_n, long m, double T,
                       std::vector<double> lambda_grid) {
  if (lambda_grid.empty())
    throw std::invalid_argument("scan_lambda: empty lambda grid");
  const double floor = lambda_threshold(scheme) - 1e-3;
  for (double lam : lambda_grid)
    if (lam < floor || lam > 1.0)
      throw std::invalid_argument(
          "scan_lambda: lambda grid leaves the admissible range");

  ScanReport rep;
  rep.scheme = scheme;
  rep.lambdas = std::move(lambda_grid);
  rep.coarse_n = coarse_n;
  rep.steps = m;
  rep.errors.assign(rep.lambdas.size(), 0.0);
  rep.blowup.assign(rep.lambdas.size(), false);

  const GridSpec grid = preset.grid(coarse_n);
  auto ops = make_discretization(preset.problem, grid);
  const Field u0 = ops->sample(preset.problem.u0);

  // scan-local reference: lawson2b at its own stability threshold, 8x steps
  const double t0 = now_seconds();
  const double lam_ref = lambda_threshold(SchemeSpec(Scheme::l2b));
  const SplitConfig split_ref = make_split(preset.problem, grid, lam_ref);
  AcceleratedSystem ref_sys(
      *ops, split_ref,
      make_action(*ops, split_ref, natural_backend(grid, SchemeSpec(Scheme::l2b))));
  IntegrationPlan ref_plan;
  ref_plan.scheme = SchemeSpec(Scheme::l2b);
  ref_plan.m = 8 * m;
  ref_plan.T = T;
  ref_plan.record_trace = false;
  IntegrationResult ref = integrate(ref_plan, ref_sys, u0);
  if (ref.blew_up)
    throw std::runtime_error("scan_lambda: reference integration diverged");
  rep.reference_seconds = now_seconds() - t0;

  const double t1 = now_seconds();
  auto run_point = [&](size_t i) {
    const SplitConfig split = make_split(preset.problem, grid, rep.lambdas[i]);
    KrylovOptions kopts;
    kopts.tol = std::pow(T / double(m), scheme.order() + 1) / 100.0;
    AcceleratedSystem sys(
        *ops, split,
        make_action(*ops, split, natural_backend(grid, scheme), kopts));
    IntegrationPlan plan;
    plan.scheme = scheme;
    plan.m = m;
    plan.T = T;
    plan.record_trace = false;
    try {
      IntegrationResult r = integrate(plan, sys, u0);
      if (r.blew_up) {
        rep.blowup[i] = true;
        rep.errors[i] = std::numeric_limits<double>::infinity();
      } else {
        rep.errors[i] = error_inf_rel(r.u, ref.u);
      }
    } catch (const KrylovFailure&) {
      rep.blowup[i] = true;
      rep.errors[i] = std::numeric_limits<double>::infinity();
    }
  };

  const int nthreads = std::min<int>(thread_count(), int(rep.lambdas.size()));
  if (nthreads <= 1) {
    for (size_t i = 0; i < rep.lambdas.size(); ++i) run_point(i);
  } else {
    std::vector<std::thread> pool;
    for (int tid = 0; tid < nthreads; ++tid) {
      pool.emplace_back([&, tid] {
        for (size_t i = size_t(tid); i < rep.lambdas.size(); i += size_t(nthreads))
          run_point(i);
      });
    }
    for (auto& th : pool) th.join();
  }
  rep.scan_seconds = now_seconds() - t1;

  size_t best = 0;
  bool any = false;
  for (size_t i = 0; i < rep.errors.size(); ++i) {
    if (rep.blowup[i]) continue;
    if (!any || rep.errors[i] < rep.errors[best]) {
      best = i;
      any = true;
    }
  }
  if (!any)
    throw std::runtime_error(
        "scan_lambda: every scanned lambda diverged; check the scheme threshold");
  rep.lambda_best = rep.lambdas[best];
  return rep;
}

void write_scan_csv(const ScanReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_scan_csv: cannot open " + path);
  out << "lambda,error,blowup\n";
  char buf[128];
  for (size_t i = 0; i < report.lambdas.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%d\n", report.lambdas[i],
                  report.errors[i], report.blowup[i] ? 1 : 0);
    out << buf;
  }
}

}  // namespace expsplit
