#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "expsplit/problem.hpp"
#include "expsplit/schemes.hpp"
#include "expsplit/steppers.hpp"

namespace expsplit {

/// max|u - ref| / max|ref|, at the final time.
double error_inf_rel(const Field& u, const Field& ref);

// -- binary field dumps (reference cache + exchange format) -----------------
// 8-byte magic "EXSPFLD1", int64 dim, int64 n[dim], then float64 values,
// little endian, row-major over (n_1, ..., n_d) (last index fastest).

void save_field(const std::string& path, const Field& f, const GridSpec& grid);
Field load_field(const std::string& path, const GridSpec& grid);
bool field_file_matches(const std::string& path, const GridSpec& grid);

// -- experiment driver -------------------------------------------------------

enum class Formulation { Accelerated, Original };
const char* formulation_name(Formulation f);

enum class LambdaSource { Table, Tuned, Explicit };

struct ExperimentConfig {
  std::string preset = "adr2d";
  double b = -0.01;  // adr3d advection parameter
  std::vector<SchemeSpec> schemes;
  Formulation formulation = Formulation::Accelerated;
  std::optional<BackendChoice> backend;  // default: natural per grid/scheme
  Index n = 0;                           // 0: preset default
  std::vector<long> step_counts;
  double T = 0.0;  // 0: preset default
  LambdaSource lambda_source = LambdaSource::Table;
  double lambda_value = 1.0;  // for Explicit
  long reference_multiple = 4;
  std::string cache_dir;  // empty: no reference caching
  unsigned seed = 0;      // reserved; the presets are deterministic
};

struct RunRecord {
  std::string scheme;
  Formulation formulation = Formulation::Accelerated;
  Index n = 0;
  long m = 0;
  double lambda = 1.0;
  double error = 0.0;
  double seconds = 0.0;
  bool blowup = false;
};

/// Executes the (scheme, m) run matrix of the config against a lawson2b
/// reference (accelerated split, reference_multiple x the largest m),
/// recording the relative error at T and the stepping wall time.
std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg);

/// CSV with header scheme,formulation,N,m,lambda,error,seconds,blowup and
/// 17 significant digits; rows ordered by scheme name then ascending m.
void emit_report(const std::vector<RunRecord>& records, const std::string& path);
std::vector<RunRecord> parse_report(const std::string& path);
std::string summarize_report(const std::vector<RunRecord>& records);

// -- stability validation (lin1d) -------------------------------------------

struct ThresholdCell {
  SchemeSpec scheme;
  double lambda = 1.0;
  bool stable_observed = false;
  bool stable_expected = false;
  double error_at_16 = 0.0;  // error of the m=16 run (diagnostic)
};

struct ThresholdValidation {
  std::vector<ThresholdCell> cells;
  bool all_match = true;
  double ee_error_m16_lambda1 = 0.0;
};

/// Integrates every analyzed scheme over m = 2^{4,6,...,max_exponent} for
/// lambda in {1, 1/2, 1/3, 0.301, 0.218, 1/(2e), 0.183, 0.17}, classifies
/// each pair as stable (all errors < 1e-1) and compares with the
/// classification implied by the scheme's stability threshold.
ThresholdValidation validate_thresholds(Index n = 1 << 12, int max_exponent = 14,
                                        const std::string& cache_dir = "");

// -- nl1d validation: convergence orders and lambda-monotonicity -------------

struct OrderMeasurement {
  SchemeSpec scheme;
  double lambda = 1.0;
  double slope = 0.0;
  std::vector<double> errors;
};

struct Nl1dValidation {
  std::vector<OrderMeasurement> orders;
  double sle_error_threshold = 0.0, sle_error_one = 0.0;
  double sl2_error_threshold = 0.0, sl2_error_one = 0.0;
  bool orders_ok = true;
  bool monotonicity_ok = true;
};

/// Orders measured at lambda = each scheme's stability threshold over
/// m = 2^7..2^11; the lambda sweep compares errors at the threshold and at
/// lambda = 1 for the stabilized schemes at m = 2^12.  Reference: erk2p2 at
/// lambda = 1/2 with 2^18 steps (cached when cache_dir is set).
Nl1dValidation validate_nl1d(Index n = 1 << 10, const std::string& cache_dir = "");

}  // namespace expsplit
