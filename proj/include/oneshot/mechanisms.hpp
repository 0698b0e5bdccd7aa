#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "oneshot/ppr.hpp"
#include "oneshot/rng.hpp"

namespace oneshot {

// Classical calibration C sqrt(2 ln(1.25/delta)) / eps, for eps in (0,1] and
// delta in (0,1).
double gaussian_sigma_for_dp(double C, double eps, double delta);

// Gaussian mechanism N(x, (sigma^2/n) I_d) with proposal
// Q = N(0, (C^2/d + sigma^2/n) I_d).
struct GaussianMechSpec {
  std::vector<double> x;
  double sigma = 1.0;
  double C = 1.0;
  std::size_t n = 1;
};

// Everything PPR needs for one mechanism instance, plus the divergence.
struct MechanismModel {
  Proposal proposal;
  DensityRatio ratio;
  double kl_bits = 0.0;        // exact D(P||Q) when known, else an upper bound
  double kl_bound_bits = 0.0;  // the closed-form bound used for sizing
};

MechanismModel gaussian_ratio(const GaussianMechSpec& spec);

// Closed-form pieces of the Gaussian pair with variances a < b.
double gaussian_log_ratio(std::span<const double> z, std::span<const double> x,
                          double a, double b);
double gaussian_log_r_star(std::span<const double> x, double a, double b);
double gaussian_kl_nats(std::span<const double> x, double a, double b);

// Laplace mechanism with density proportional to exp(-eps ||z - x||_2).
//
// A Gaussian proposal has lighter tails than this density, so the ratio is
// unbounded. The proposal used here is the mixture
//   (1 - w) N(0, s^2 I_d) + w RadialLaplace(eps / 2),  s^2 = C^2/d + (d+1)/eps^2,
// which keeps the ratio bounded by (1/w) 2^d exp(eps ||x|| / 2). With w = 0
// laplace_ratio throws, since no finite bound exists.
struct LaplaceMechSpec {
  std::vector<double> x;
  double eps = 1.0;
  double C = 1.0;
  double mixture_weight = 0.1;
};

MechanismModel laplace_ratio(const LaplaceMechSpec& spec);
std::vector<double> laplace_sample_direct(const LaplaceMechSpec& spec,
                                          SeededStream& stream);
// log of eps^d / (S_d Gamma(d)) with S_d the surface area of the unit sphere.
double laplace_log_normalizer(std::size_t d, double eps);

// log2(3.56) / min((alpha-1)/2, 1).
double eta_alpha(double alpha);
// ell + log2(ell + 1) + 2.
double total_budget_bits(double ell);

double gaussian_ppr_ell(double C, std::size_t n, std::size_t d, double sigma,
                        double alpha);
double laplace_ppr_ell(double C, double eps, std::size_t d, double alpha);
double generic_compression_bound(double eps, double alpha);

// Renyi-to-approximate DP conversion (natural log):
// eps + ln(1/(gamma delta))/(gamma - 1) + ln(1 - 1/gamma).
double rdp_to_dp(double gamma, double eps, double delta);

struct RdpGaussian {
  double sigma = 0.0;
  double gamma = 0.0;    // optimizing Renyi order
  double eps_dp = 0.0;   // achieved (eps, delta)-DP level
};

// min over gamma of rdp_to_dp(gamma, gamma C^2 / (2 sigma^2), delta).
RdpGaussian gaussian_rdp_eps(double C, double sigma, double delta);
// Smallest sigma whose Renyi-route guarantee is (eps, delta)-DP.
RdpGaussian gaussian_sigma_rdp(double C, double eps, double delta);

struct PrivacyReport {
  PrivacyPair central;
  PrivacyPair local;
  std::string local_route;  // "approx-dp" or "renyi"
};

// Central guarantee of the aggregate and local guarantee of one client's
// PPR output. The approximate-DP route (2 alpha sqrt(n) eps, 2 delta) is used
// when eps < 1/sqrt(n); otherwise the per-client Gaussian of variance
// sigma^2/n is accounted through Renyi DP and inflated by (2 alpha, 2).
PrivacyReport gaussian_ppr_privacy(double C, std::size_t n, double sigma,
                                   double eps, double delta, double alpha);

// Coordinate subsampled Gaussian mechanism. Each coordinate is kept
// independently with probability q = min(1, bits/d) and sent as one
// stochastically rounded bit in {-B, +B}; the server adds N(0, sigma^2) to
// every coordinate of the sum and divides by n q. Privacy is the d-fold
// composition of a Poisson-subsampled Gaussian with noise multiplier
// sigma / B, accounted at integer Renyi orders 2..399.
struct CsgmParams {
  double eps = 1.0;
  double delta = 1e-6;
  double bits = 1.0;
  std::size_t n = 1;
  std::size_t d = 1;
  double coord_bound = 1.0;  // B, a bound on |x_j|
};

struct CsgmCalibration {
  CsgmParams params;
  double q = 1.0;
  double sigma = 0.0;
  double eps_dp = 0.0;
  int order = 0;
};

double csgm_rdp_eps(double q, double sigma, double coord_bound, std::size_t d,
                    int order);
double csgm_dp_eps(double q, double sigma, double coord_bound, std::size_t d,
                   double delta, int* best_order = nullptr);
CsgmCalibration csgm_calibrate(const CsgmParams& params);
// Closed-form MSE when every |x_j| equals coord_bound.
double csgm_mse_formula(const CsgmCalibration& cal);

struct CsgmMessage {
  std::vector<uint32_t> coords;
  std::vector<int8_t> signs;
  std::size_t bits() const { return coords.size(); }
};

CsgmMessage csgm_encode(std::span<const double> x, const CsgmCalibration& cal,
                        SeededStream& stream);
CsgmMessage csgm_encode(std::span<const double> x, double eps, double delta,
                        double bits, std::size_t n, std::size_t d,
                        SeededStream& stream);
std::vector<double> csgm_estimate(std::span<const CsgmMessage> messages,
                                  const CsgmCalibration& cal,
                                  SeededStream& server_stream);

// Discrete Laplace baseline on the ball B_d(C): add noise with density
// proportional to exp(-eps ||y||), move the result to the closest point of
// the ball, then round each coordinate to a multiple of u, where u is chosen
// so that Vol(B_d(C)) / u^d = 2^bits.
struct DiscreteLaplaceResult {
  std::vector<double> z;
  double step = 0.0;
  std::size_t bits = 0;
};

double ball_log_volume(std::size_t d, double C);
double discrete_laplace_step(double C, std::size_t d, double bits);
std::size_t discrete_laplace_bits(double C, std::size_t d, double step);
DiscreteLaplaceResult discrete_laplace_baseline(std::span<const double> x,
                                                double eps, double C,
                                                double bits,
                                                SeededStream& stream);

}  // namespace oneshot
