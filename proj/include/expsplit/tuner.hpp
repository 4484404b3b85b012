#pragma once

#include <string>
#include <vector>

#include "expsplit/problem.hpp"
#include "expsplit/schemes.hpp"

namespace expsplit {

/// Outcome of the coarse-grid parameter scan over admissible lambda.
struct ScanReport {
  SchemeSpec scheme;
  std::vector<double> lambdas;  // ascending, within [lambda*(scheme), 1]
  std::vector<double> errors;   // relative inf-norm vs the scan-local reference
  std::vector<bool> blowup;
  double lambda_best = 1.0;
  Index coarse_n = 0;
  long steps = 0;
  double scan_seconds = 0.0;
  double reference_seconds = 0.0;
};

/// Default grid: `points` equispaced values from lambda*(scheme) to 1.
std::vector<double> default_lambda_grid(const SchemeSpec& scheme, int points);

/// Runs the scheme on a coarse grid for every lambda in the grid and returns
/// the error-minimizing value (ties toward smaller lambda).  Errors are
/// measured against a lawson2b reference on the same coarse grid with 8x the
/// steps; blow-ups are recorded as infinite error.  Scan points run in
/// parallel when EXPSPLIT_THREADS is set.
ScanReport scan_lambda(const SchemeSpec& scheme, const Preset& preset,
                       Index coarse_n, long m, double T,
                       std::vector<double> lambda_grid);

void write_scan_csv(const ScanReport& report, const std::string& path);

}  // namespace expsplit
