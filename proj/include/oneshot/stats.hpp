#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace oneshot {

struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;
};

MeanStderr mean_stderr(std::span<const double> xs);

// Streaming accumulator (Welford).
class RunningStats {
 public:
  void add(double x);
  void merge(const RunningStats& o);
  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const;
  double stderr_() const;

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

// Asymptotic Kolmogorov tail Q(lambda) = 2 sum (-1)^{k-1} exp(-2 k^2 lambda^2).
double kolmogorov_q(double lambda);

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// One-sample KS against a continuous CDF. Sorts a copy of xs.
TestResult ks_one_sample(std::vector<double> xs,
                         const std::function<double(double)>& cdf);
TestResult ks_two_sample(std::vector<double> a, std::vector<double> b);

// Pearson chi-square goodness of fit. Cells with expected count below
// min_expected are pooled into one cell.
TestResult chi_square_gof(std::span<const double> observed,
                          std::span<const double> expected_probs,
                          double min_expected = 5.0);

double normal_cdf(double x, double mean = 0.0, double sd = 1.0);

}  // namespace oneshot
