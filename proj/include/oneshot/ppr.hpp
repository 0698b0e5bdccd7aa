#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "oneshot/pfr.hpp"
#include "oneshot/rng.hpp"

namespace oneshot {

// PPR parameter alpha in (1, inf]. The constructor caches the constants the
// exact encoder needs.
class PprParams {
 public:
  explicit PprParams(double alpha);
  static PprParams infinite();

  double alpha() const { return alpha_; }
  bool is_infinite() const { return std::isinf(alpha_); }
  // gamma(1 - 1/alpha, 1), the lower incomplete gamma function.
  double gamma1() const { return gamma1_; }

 private:
  double alpha_;
  double gamma1_ = 0.0;
};

// r(z) = dP/dQ(z) together with a bound r_star >= sup_z r(z). The encoder
// throws if it ever observes r(z) > r_star.
struct DensityRatio {
  std::function<double(std::span<const double>)> ratio_fn;
  double r_star = 1.0;
};

// Sampler for the proposal Q. sample() writes one draw of dimension dim.
struct Proposal {
  std::size_t dim = 1;
  std::function<void(SeededStream&, std::span<double>)> sample;
};

// Label of the shared randomness. Proposal draw k (1-based) is produced by
// SeededStream(seed, substream) positioned at counter (k-1) * 2^32, so a
// sampler may consume up to 2^32 counters per draw and decoding is O(1).
struct SharedSeed {
  uint64_t seed = 0;
  uint64_t substream = 0;
};

constexpr int kSharedDrawShift = 32;

struct EncodeResult {
  uint64_t k = 0;
  // Number of proposal draws Z_1..Z_m whose ratio was evaluated.
  uint64_t points_examined = 0;
  // Number of points of the reparametrized process that were generated.
  uint64_t points_generated = 0;
  double w_star = std::numeric_limits<double>::infinity();
  double wall_time = 0.0;
  std::vector<double> z;
};

// Exact encoder. For finite alpha, K satisfies
// Pr(K = k | T, Z) = Tt_k^{-alpha} / sum_i Tt_i^{-alpha}, Tt_i = T_i / r(Z_i).
// For alpha = inf, K = argmin_i Tt_i. T and the auxiliary marks come from
// local; only the Z_i come from the shared seed.
EncodeResult encode(const PprParams& params, const Proposal& proposal,
                    const DensityRatio& ratio, const SharedSeed& shared,
                    SeededStream& local);

// Same point generation as encode(), but the selection is made among the
// first n_points points (in increasing T) only.
EncodeResult encode_truncated(const PprParams& params, const Proposal& proposal,
                              const DensityRatio& ratio,
                              const SharedSeed& shared, SeededStream& local,
                              uint64_t n_points);

// Exact encoder with the same law of K as encode(), built for throughput.
// It scans the T process in increasing order but only materializes points
// that can still beat the running minimum: given w_star, a future point at
// time t can win only if V <= w_star r_star^alpha / t^alpha, so those points
// form a thinned Poisson process whose integrated intensity has a closed
// form. The points skipped in each gap only shift the index and are added as
// a Poisson count. Work is proportional to the number of such candidate
// points, which has light tails, unlike the heap scan whose running time has
// a polynomial tail at alpha = 2. Here points_examined counts evaluated
// candidates and can be smaller than k.
EncodeResult encode_thinned(const PprParams& params, const Proposal& proposal,
                            const DensityRatio& ratio, const SharedSeed& shared,
                            SeededStream& local);

// k-th proposal draw of the shared stream (k >= 1).
std::vector<double> decode(const Proposal& proposal, uint64_t k,
                           const SharedSeed& shared);
void decode_into(const Proposal& proposal, uint64_t k, const SharedSeed& shared,
                 std::span<double> out);

// Pr(K = k) proportional to tilde_t[k]^{-alpha}.
Pmf conditional_index_pmf(std::span<const double> tilde_t, double alpha);

// Bounds on E[log2 K] in bits given D(P||Q) in bits.
double logk_bound_simple(double alpha, double kl_bits);
double logk_bound_refined(double alpha, double kl_bits);
// min of the two; alpha = inf is accepted.
double expected_logk_bound(double alpha, double kl_bits);

struct PrivacyPair {
  double eps = 0.0;
  double delta = 0.0;
};

// (2 alpha eps, 2 delta). For metric privacy the coefficient of d_X is
// metric_coefficient(alpha) * eps.
PrivacyPair privacy_inflation(double eps, double delta, double alpha);
double metric_coefficient(double alpha);

// Largest alpha with which PPR is (alpha eps + eps_tilde, 2(delta +
// delta_tilde))-DP: e^{-4.2} delta_tilde eps_tilde^2 / ln(1/delta_tilde) + 1.
double alpha_for_tight_dp(double eps_tilde, double delta_tilde);

}  // namespace oneshot
