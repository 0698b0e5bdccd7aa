#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "oneshot/ppr.hpp"

namespace oneshot {

enum class DmeMechanism { ppr_gaussian, csgm, discrete_laplace, ppr_laplace };

std::string to_string(DmeMechanism m);
// Throws std::invalid_argument on unknown names.
DmeMechanism parse_mechanism(const std::string& name);

struct DmeConfig {
  std::size_t n = 500;
  std::size_t d = 1000;
  double C = 1.0;
  double eps = 1.0;
  double delta = 1e-6;
  double alpha = 2.0;
  std::size_t chunk_dim = 2;
  // Bits per client. Infinity means no budget.
  double bit_budget = std::numeric_limits<double>::infinity();
  uint64_t trials = 200;
  uint64_t seed = 1;
  DmeMechanism mechanism = DmeMechanism::ppr_gaussian;
};

void validate(const DmeConfig& cfg);

struct TrialReport {
  std::string mechanism;
  uint64_t trials = 0;
  double mse = 0.0;
  double mse_stderr = 0.0;
  double mse_theory = 0.0;    // closed form where one exists, else NaN
  double bits_mean = 0.0;     // measured bits per client
  double bits_bound = 0.0;    // the bound checked against the budget
  double eps_used = 0.0;      // eps' actually simulated
  double sigma = 0.0;         // central noise level
  PrivacyPair central;
  PrivacyPair local;          // NaN when the mechanism has no local guarantee
  std::string local_route;
  double metric_coefficient = 0.0;  // for metric privacy mechanisms
  double bias = 0.0;          // projected bias, metric experiment only
  double wall_time = 0.0;
  double points_mean = 0.0;   // PPR points examined per encode
  double points_max = 0.0;
};

// Client data with entries in {-1, +1}, P(+1) = 0.8. Row i is client i.
std::vector<std::vector<double>> gen_clients(std::size_t n, std::size_t d, uint64_t seed);

// Largest eps' <= cfg.eps whose whole-vector PPR size bound fits the bit
// budget. Throws std::invalid_argument when no eps' > 0 fits.
double largest_feasible_eps(const DmeConfig& cfg);

// Sliced PPR of the Gaussian mechanism. Clients scale their data by
// C / sqrt(d) so that ||x_i|| = C.
TrialReport run_ppr_dme(const DmeConfig& cfg);
// Coordinate-subsampled Gaussian baseline on the same data.
TrialReport run_csgm_dme(const DmeConfig& cfg);
// Dispatches on cfg.mechanism (ppr_gaussian or csgm).
TrialReport run_dme(const DmeConfig& cfg);

struct MetricConfig {
  std::size_t d = 500;
  double C = 10000.0;
  double eps = 1.0;
  double alpha = 2.0;
  double bits = 1000.0;
  double x_radius = 0.5;  // ||x|| / C for the test point
  uint64_t trials = 5000;
  uint64_t seed = 1;
};

void validate(const MetricConfig& cfg);

// First: PPR-compressed Laplace (closed-form MSE at the largest eps' that
// fits the budget). Second: discrete Laplace baseline by Monte Carlo.
std::pair<TrialReport, TrialReport> run_metric_experiment(const MetricConfig& cfg);

// Wall time of PPR on single chunks of the DME Gaussian mechanism.
struct PprBenchRow {
  double eps = 0.0;
  std::size_t chunk_dim = 0;
  double alpha = 0.0;
  uint64_t reps = 0;
  double time_mean = 0.0;
  double time_stderr = 0.0;
  double points_mean = 0.0;
  double log2_r_star = 0.0;
};

PprBenchRow ppr_bench(const DmeConfig& cfg, uint64_t reps);

}  // namespace oneshot
