#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace besselgap::cli {

/// Fully resolved run configuration (defaults, then --config file, then flags).
struct RunConfig {
  std::string command;
  double alpha = 0.0;
  std::vector<double> r{1.0};
  std::vector<double> s{0.0};
  std::vector<double> x{1.0};
  std::vector<std::pair<double, double>> intervals;
  std::vector<int> m;
  int ell = 1;
  double s_thin = 0.5;
  double x1 = 1.0;
  double x2 = 2.0;
  std::vector<int> n{25, 50, 100};
  int N = 32;
  int draws = 2000;
  std::uint64_t seed = 1000;
  std::string probe = "s-merge";
  int j = 1;
  std::vector<double> deltas{1e-4, 1e-3, 1e-2};
  double quad_tol = 1e-12;
  double ode_tol = 1e-10;
  double eps = 0.0;
  std::string format = "csv";
  int jobs = 0;
};

enum Exit : int { kOk = 0, kUnknownCommand = 1, kValidation = 2, kNumerical = 3 };

/// Parses argv, dispatches, writes the artifact to out and messages to err.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// "a,b,c" or "start:stop:count".
std::vector<double> parse_grid(const std::string& text);

}  // namespace besselgap::cli
