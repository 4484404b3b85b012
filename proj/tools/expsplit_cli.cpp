// Command line driver: stability tables and rasters, the validation
// experiments, the performance run matrices and the lambda scan.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include "expsplit/bench.hpp"
#include "expsplit/stability.hpp"
#include "expsplit/tuner.hpp"

using namespace expsplit;

namespace {

constexpr int kExitValidationMismatch = 2;

std::vector<SchemeSpec> parse_schemes(const std::vector<std::string>& names) {
  std::vector<SchemeSpec> out;
  for (const auto& n : names) out.push_back(SchemeSpec::parse(n));
  return out;
}

int cmd_thresholds(const std::string& out_path) {
  const std::vector<SchemeSpec> schemes = {
      SchemeSpec(Scheme::bfe), SchemeSpec(Scheme::imex2), SchemeSpec(Scheme::ee),
      SchemeSpec(Scheme::erk2p2), SchemeSpec(Scheme::erk2p1),
      SchemeSpec(Scheme::l2a), SchemeSpec(Scheme::l2b), SchemeSpec(Scheme::le),
      SchemeSpec(Scheme::sle), SchemeSpec(Scheme::sl2)};
  std::printf("%-8s %-5s %s\n", "scheme", "order", "stability lower bound");
  std::vector<std::pair<std::string, double>> rows;
  for (const SchemeSpec& s : schemes) {
    const double thr = lambda_threshold(s);
    rows.emplace_back(s.name(), thr);
    std::printf("%-8s %-5d %.4f\n", s.name(), s.order(), thr);
  }
  const auto [alpha_star, lambda_star] = optimize_alpha_sl2();
  std::printf("sl2 free parameter: alpha* = %.4f gives lambda* = %.4f\n",
              alpha_star, lambda_star);
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    out << "scheme,order,lambda_threshold\n";
    for (size_t i = 0; i < schemes.size(); ++i) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "%s,%d,%.17g\n", rows[i].first.c_str(),
                    schemes[i].order(), rows[i].second);
      out << buf;
    }
    char buf[128];
    std::snprintf(buf, sizeof buf, "sl2-alpha-star,2,%.17g\n", alpha_star);
    out << buf;
  }
  return 0;
}

int cmd_region(const std::string& scheme_name, double lambda,
               const std::vector<double>& window, int width, int height,
               const std::string& out_path) {
  const SchemeSpec scheme = SchemeSpec::parse(scheme_name);
  RegionWindow w{window[0], window[1], window[2], window[3]};
  StabilityRaster raster = astability_region(scheme, lambda, w, width, height);
  write_pgm(raster, out_path);
  long count = 0;
  for (unsigned char v : raster.inside) count += v;
  std::printf("%s lambda=%.4f: %ld of %d pixels stable -> %s\n", scheme.name(),
              lambda, count, width * height, out_path.c_str());
  return 0;
}

int cmd_validate(const std::string& preset, Index n, int max_exp,
                 const std::string& out_dir) {
  if (!out_dir.empty()) std::filesystem::create_directories(out_dir);
  if (preset == "lin1d") {
    ThresholdValidation v = validate_thresholds(n ? n : Index(1) << 12, max_exp, out_dir);
    std::printf("%-8s %8s %10s %10s %12s\n", "scheme", "lambda", "observed",
                "expected", "err(m=16)");
    for (const ThresholdCell& c : v.cells) {
      std::printf("%-8s %8.4f %10s %10s %12.4e%s\n", c.scheme.name(), c.lambda,
                  c.stable_observed ? "stable" : "unstable",
                  c.stable_expected ? "stable" : "unstable", c.error_at_16,
                  c.stable_observed == c.stable_expected ? "" : "   <-- MISMATCH");
    }
    std::printf("ee error at (lambda=1, m=16): %.6e\n", v.ee_error_m16_lambda1);
    std::printf(v.all_match ? "threshold validation: PASS\n"
                            : "threshold validation: FAIL\n");
    return v.all_match ? 0 : kExitValidationMismatch;
  }
  if (preset == "nl1d") {
    Nl1dValidation v = validate_nl1d(n ? n : Index(1) << 10, out_dir);
    std::printf("%-8s %8s %8s   errors over m = 2^7..2^11\n", "scheme", "lambda",
                "slope");
    for (const OrderMeasurement& o : v.orders) {
      std::printf("%-8s %8.4f %8.3f  ", o.scheme.name(), o.lambda, o.slope);
      for (double e : o.errors) std::printf(" %.3e", e);
      std::printf("\n");
    }
    std::printf("sle error at threshold %.4e vs lambda=1 %.4e (ratio %.1f)\n",
                v.sle_error_threshold, v.sle_error_one,
                v.sle_error_one / v.sle_error_threshold);
    std::printf("sl2 error at threshold %.4e vs lambda=1 %.4e (ratio %.1f)\n",
                v.sl2_error_threshold, v.sl2_error_one,
                v.sl2_error_one / v.sl2_error_threshold);
    const bool ok = v.orders_ok && v.monotonicity_ok;
    std::printf(ok ? "nl1d validation: PASS\n" : "nl1d validation: FAIL\n");
    return ok ? 0 : kExitValidationMismatch;
  }
  std::fprintf(stderr, "validate: unknown preset '%s'\n", preset.c_str());
  return 1;
}

int cmd_bench(ExperimentConfig cfg, const std::string& out_dir) {
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    cfg.cache_dir = out_dir;
  }
  std::vector<RunRecord> records = run_experiment(cfg);
  std::cout << summarize_report(records);
  if (!out_dir.empty()) {
    const std::string path = out_dir + "/runs_" + cfg.preset + "_" +
                             formulation_name(cfg.formulation) + ".csv";
    emit_report(records, path);
    std::printf("wrote %s\n", path.c_str());
  }
  return 0;
}

int cmd_tune(const std::string& scheme_name, const std::string& preset_name,
             double b, Index coarse_n, long steps, int points,
             const std::string& out_path) {
  const SchemeSpec scheme = SchemeSpec::parse(scheme_name);
  const Preset preset = make_preset(preset_name, b);
  ScanReport rep = scan_lambda(scheme, preset, coarse_n, steps,
                               preset.problem.T, default_lambda_grid(scheme, points));
  std::printf("lambda,error,blowup\n");
  for (size_t i = 0; i < rep.lambdas.size(); ++i)
    std::printf("%.17g,%.17g,%d\n", rep.lambdas[i], rep.errors[i],
                rep.blowup[i] ? 1 : 0);
  std::printf("# %s on %s (N=%lld, m=%ld): lambda_best = %.4f (scan %.2fs, ref %.2fs)\n",
              scheme.name(), preset_name.c_str(),
              static_cast<long long>(rep.coarse_n), rep.steps, rep.lambda_best,
              rep.scan_seconds, rep.reference_seconds);
  if (!out_path.empty()) write_scan_csv(rep, out_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"accelerated exponential integrators for advection-diffusion-reaction"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "",
                 "key=value file with one [section] per subcommand; flags win");

  // stability thresholds | region
  auto* stab = app.add_subcommand("stability", "linear stability laboratory");
  stab->require_subcommand(1);
  auto* thr = stab->add_subcommand("thresholds",
                                   "unconditional-stability lambda lower bounds");
  std::string thr_out;
  thr->add_option("--out", thr_out, "also write the table as CSV");

  auto* reg = stab->add_subcommand("region", "rasterize an A-stability region");
  std::string reg_scheme = "sle", reg_out = "region.pgm";
  double reg_lambda = 1.0;
  std::vector<double> reg_window = {-20.0, 2.0, -14.0, 14.0};
  int reg_w = 512, reg_h = 512;
  reg->add_option("--scheme", reg_scheme, "scheme label")->required();
  reg->add_option("--lambda", reg_lambda, "extraction fraction")->required();
  reg->add_option("--window", reg_window, "re_min re_max im_min im_max")
      ->expected(4);
  reg->add_option("--res", reg_w, "horizontal resolution");
  reg->add_option("--res-y", reg_h, "vertical resolution (default --res)");
  reg->add_option("--out", reg_out, "output portable graymap");

  // validate
  auto* val = app.add_subcommand("validate", "stability/accuracy validation");
  std::string val_preset = "lin1d", val_out;
  Index val_n = 0;
  int val_maxexp = 14;
  val->add_option("--preset", val_preset, "lin1d or nl1d")->required();
  val->add_option("--n", val_n, "grid points per direction");
  val->add_option("--max-exp", val_maxexp, "largest step exponent (lin1d)");
  val->add_option("--out", val_out, "cache/output directory");

  // bench
  auto* ben = app.add_subcommand("bench", "run matrix with timings");
  ExperimentConfig cfg;
  std::string ben_formulation = "accelerated", ben_backend, ben_out,
              ben_lambda_source = "table";
  std::vector<std::string> ben_schemes = {"le", "sle", "l2a", "sl2"};
  ben->add_option("--preset", cfg.preset, "adr2d or adr3d")->required();
  ben->add_option("--b", cfg.b, "advection parameter of adr3d");
  ben->add_option("--schemes", ben_schemes, "scheme labels");
  ben->add_option("--formulation", ben_formulation, "accelerated|original");
  ben->add_option("--backend", ben_backend, "fourier|kron|dense|krylov");
  ben->add_option("--n", cfg.n, "grid points per direction");
  ben->add_option("--steps", cfg.step_counts, "step counts");
  ben->add_option("--T", cfg.T, "final time");
  ben->add_option("--lambda-source", ben_lambda_source, "table|tuned|value");
  ben->add_option("--lambda", cfg.lambda_value, "explicit lambda");
  ben->add_option("--ref-multiple", cfg.reference_multiple,
                  "reference steps = multiple x largest m");
  ben->add_option("--out", ben_out, "output directory");

  // tune-lambda
  auto* tun = app.add_subcommand("tune-lambda", "coarse-grid lambda scan");
  std::string tun_scheme, tun_preset = "adr2d", tun_out;
  double tun_b = -0.01;
  Index tun_n = 64;
  long tun_steps = 256;
  int tun_points = 20;
  tun->add_option("--scheme", tun_scheme, "scheme label")->required();
  tun->add_option("--preset", tun_preset, "preset name")->required();
  tun->add_option("--b", tun_b, "advection parameter of adr3d");
  tun->add_option("--coarse-n", tun_n, "coarse grid points per direction");
  tun->add_option("--steps", tun_steps, "scan step count");
  tun->add_option("--points", tun_points, "lambda grid size");
  tun->add_option("--out", tun_out, "write the scan table as CSV");

  // report
  auto* repc = app.add_subcommand("report", "summarize a runs CSV");
  std::string rep_in;
  repc->add_option("--input", rep_in, "runs CSV")->required();

  bool res_y_given = false;
  reg->callback([&] { res_y_given = reg->count("--res-y") > 0; });

  CLI11_PARSE(app, argc, argv);

  try {
    if (thr->parsed()) return cmd_thresholds(thr_out);
    if (reg->parsed())
      return cmd_region(reg_scheme, reg_lambda, reg_window, reg_w,
                        res_y_given ? reg_h : reg_w, reg_out);
    if (val->parsed()) return cmd_validate(val_preset, val_n, val_maxexp, val_out);
    if (ben->parsed()) {
      cfg.schemes = parse_schemes(ben_schemes);
      cfg.formulation = ben_formulation == "original" ? Formulation::Original
                                                      : Formulation::Accelerated;
      if (!ben_backend.empty()) cfg.backend = parse_backend(ben_backend);
      if (cfg.step_counts.empty()) {
        cfg.step_counts = cfg.preset == "adr3d" ? std::vector<long>{32, 64, 128, 256}
                                                : std::vector<long>{256, 512, 1024, 2048};
      }
      if (ben_lambda_source == "tuned")
        cfg.lambda_source = LambdaSource::Tuned;
      else if (ben_lambda_source == "value")
        cfg.lambda_source = LambdaSource::Explicit;
      return cmd_bench(cfg, ben_out);
    }
    if (tun->parsed())
      return cmd_tune(tun_scheme, tun_preset, tun_b, tun_n, tun_steps, tun_points,
                      tun_out);
    if (repc->parsed()) {
      std::cout << summarize_report(parse_report(rep_in));
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
