#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "polymer/observables.hpp"
#include "polymer/oracle.hpp"
#include "polymer/rate_functions.hpp"
#include "polymer/sturm_liouville.hpp"

namespace polymer::cli {

enum class Format { Csv, Json };

struct Range {
  double min = 0.0, max = 0.0;
  int steps = 1;  // number of grid points, >= 1
  std::vector<double> grid() const;
};

struct ScanConfig {
  std::string model_path;
  Range delta, beta;
  int trunc = 0;      // fixed truncation override, 0 = adaptive
  double tol = 1e-10;
  std::string out;    // empty = stdout
  Format format = Format::Csv;
};

struct AsymptoticReport {
  std::string regime;
  double fitted_exponent = 0.0;
  double fitted_constant = 0.0;
  double reference_value = 0.0;
  double relative_error = 0.0;
  std::string reference_provenance;
  std::vector<std::pair<double, double>> data;  // (abscissa, measured)
};

/// 17-significant-digit, locale-independent float formatting.
std::string fmt(double v);

int cmd_point(const std::string& model_path, double delta, double beta, int trunc,
              std::ostream& out);
int cmd_scan(const ScanConfig& config, std::ostream& out);
int cmd_critical_curve(const std::string& model_path, const Range& delta, int trunc,
                       Format format, std::ostream& out);
int cmd_rate_function(const std::string& model_path, double delta, double beta, RateKind kind,
                      const Range& theta, int trunc, Format format, std::ostream& out);
int cmd_sturm(std::optional<double> b_fixed, const Range& a_range, bool astar_mode,
              const Range& b_range, Format format, std::ostream& out);
int cmd_oracle(const std::string& model_path, const std::string& check, double delta, double beta,
               int n, std::int64_t steps, std::uint64_t seed, std::ostream& out);
int cmd_asymptotics(const std::string& model_path, const std::string& regime, double delta,
                    std::ostream& out);
AsymptoticReport run_asymptotics(const ChargeModel& model, const std::string& regime,
                                 double delta);

/// Full argv-level entry point; returns the process exit code
/// (0 ok, 2 configuration error, 4 usage/help, 3 numerical failure).
int run_cli(const std::vector<std::string>& args);

}  // namespace polymer::cli
