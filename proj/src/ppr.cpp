#include "oneshot/ppr.hpp"

#include <chrono>
#include <cmath>
#include <algorithm>
#include <random>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/minima.hpp>

namespace oneshot {

PprParams::PprParams(double alpha) : alpha_(alpha) {
  if (!(alpha > 1.0)) throw std::invalid_argument("PPR: alpha must be > 1");
  if (!std::isinf(alpha))
    gamma1_ = boost::math::tgamma_lower(1.0 - 1.0 / alpha, 1.0);
}

PprParams PprParams::infinite() {
  return PprParams(std::numeric_limits<double>::infinity());
}

namespace {

struct HeapPoint {
  double t;
  double v;
  uint64_t seq;
  // (t / r_star)^alpha v, a lower bound on the point's score. The point can
  // still win only while this is <= w_star.
  double floor;
};

struct LaterFirst {
  bool operator()(const HeapPoint& a, const HeapPoint& b) const {
    if (a.t != b.t) return a.t > b.t;
    return a.seq > b.seq;
  }
};

double checked_ratio(const DensityRatio& ratio, std::span<const double> z) {
  const double r = ratio.ratio_fn(z);
  if (!std::isfinite(r) || r < 0.0)
    throw std::runtime_error("PPR: density ratio is not a finite non-negative value");
  if (r > ratio.r_star)
    throw std::runtime_error("PPR: observed density ratio exceeds r_star");
  return r;
}

void check_inputs(const Proposal& proposal, const DensityRatio& ratio) {
  if (proposal.dim == 0 || !proposal.sample)
    throw std::invalid_argument("PPR: proposal sampler missing");
  if (!ratio.ratio_fn) throw std::invalid_argument("PPR: ratio missing");
  if (!(ratio.r_star > 0.0) || !std::isfinite(ratio.r_star))
    throw std::invalid_argument("PPR: r_star must be finite and positive");
}

class SharedDraws {
 public:
  SharedDraws(const Proposal& p, const SharedSeed& s)
      : proposal_(p), stream_(s.seed, s.substream) {}
  void draw(uint64_t k, std::span<double> out) {
    stream_.jump_to((k - 1) << kSharedDrawShift);
    proposal_.sample(stream_, out);
  }

 private:
  const Proposal& proposal_;
  SeededStream stream_;
};

EncodeResult encode_infinite(const Proposal& proposal,
                             const DensityRatio& ratio,
                             const SharedSeed& shared, SeededStream& local) {
  EncodeResult res;
  SharedDraws draws(proposal, shared);
  std::vector<double> z(proposal.dim);
  res.z.resize(proposal.dim);
  double t = 0.0;
  for (;;) {
    t += local.exp();
    if (t / ratio.r_star >= res.w_star) break;
    ++res.points_generated;
    const uint64_t k = ++res.points_examined;
    draws.draw(k, z);
    const double r = checked_ratio(ratio, z);
    const double w = r > 0.0 ? t / r : std::numeric_limits<double>::infinity();
    if (w < res.w_star) {
      res.w_star = w;
      res.k = k;
      res.z = z;
    }
  }
  return res;
}

// Algorithm body shared by the exact and truncated encoders. When
// n_points > 0 the termination test is replaced by "n_points popped".
// x^alpha and x^(-1/alpha), with a pow-free path for alpha = 2, the value
// used in every experiment.
struct AlphaPow {
  double alpha;
  bool square;
  double pow(double x) const { return square ? x * x : std::pow(x, alpha); }
  double inv_root(double x) const {
    return square ? 1.0 / std::sqrt(x) : std::pow(x, -1.0 / alpha);
  }
};

EncodeResult encode_impl(const PprParams& params, const Proposal& proposal,
                         const DensityRatio& ratio, const SharedSeed& shared,
                         SeededStream& local, uint64_t n_points, AlphaPow apow) {
  const double alpha = params.alpha();
  const double e_inv = std::exp(-1.0);
  const double denom = e_inv + params.gamma1();
  const double p_first = e_inv / denom;
  const double scale = alpha / denom;
  const double trunc_shape = 1.0 - 1.0 / alpha;
  const double rstar_pow = 1.0 / apow.pow(ratio.r_star);

  EncodeResult res;
  SharedDraws draws(proposal, shared);
  std::vector<double> z(proposal.dim);
  res.z.resize(proposal.dim);

  // Min-heap on (t, insertion order); reused across calls on this thread.
  static thread_local std::vector<HeapPoint> heap;
  heap.clear();

  double u = 0.0;
  uint64_t possible = 0;
  uint64_t seq = 0;
  for (;;) {
    u += local.exp();
    // b^{1/alpha} = u * scale, so keep both forms without a pow call.
    const double b_root = u * scale;
    const double b = apow.pow(b_root);
    if (n_points == 0 && possible == 0 && b * rstar_pow >= res.w_star) break;

    double t, v;
    if (local.uniform() < p_first) {
      t = b_root;
      v = local.exp() + 1.0;
    } else {
      v = local.gamma_trunc01(trunc_shape);
      t = b_root * apow.inv_root(v);
    }
    const double floor = apow.pow(t / ratio.r_star) * v;
    heap.push_back({t, v, seq++, floor});
    std::push_heap(heap.begin(), heap.end(), LaterFirst{});
    possible += floor <= res.w_star;
    ++res.points_generated;

    while (!heap.empty() && heap.front().t <= b_root) {
      std::pop_heap(heap.begin(), heap.end(), LaterFirst{});
      const HeapPoint p = heap.back();
      heap.pop_back();
      possible -= p.floor <= res.w_star;
      const uint64_t k = ++res.points_examined;
      draws.draw(k, z);
      const double r = checked_ratio(ratio, z);
      const double w = r > 0.0 ? apow.pow(p.t / r) * p.v
                                : std::numeric_limits<double>::infinity();
      if (w < res.w_star) {
        res.w_star = w;
        res.k = k;
        res.z = z;
        // w_star only decreases, so a point ruled out stays ruled out. Keeping
        // the count exact lets the loop stop without popping points that
        // were marked possible against an older, larger w_star.
        possible = 0;
        for (const HeapPoint& h : heap) possible += h.floor <= res.w_star;
      }
      if (n_points > 0 && k == n_points) {
        if (res.k == 0) {
          // Every ratio was zero; fall back to the first point.
          res.k = 1;
          draws.draw(1, res.z);
        }
        return res;
      }
    }
  }
  return res;
}

// Integrated intensity of the candidate process beyond tau,
//   G(tau) = int_tau^inf (1 - exp(-c t^-alpha)) dt
//          = c^{1/alpha} gamma(s, X) - tau (1 - e^{-X}),  X = c tau^-alpha,
// with s = 1 - 1/alpha. For small X the two terms nearly cancel, so use
//   G = c tau^{1-alpha} (1-s) sum_m (-X)^m / (m! (s+m) (m+1)).
double candidate_mass(double tau, double c, double alpha) {
  const double s = 1.0 - 1.0 / alpha;
  const double x = c * std::pow(tau, -alpha);
  if (x < 2.0) {
    double term = 1.0, sum = 0.0;
    for (int m = 0; m < 60; ++m) {
      const double add = term / ((s + m) * (m + 1));
      sum += add;
      if (std::abs(add) < 1e-17 * std::abs(sum)) break;
      term *= -x / (m + 1);
    }
    return c * std::pow(tau, 1.0 - alpha) * (1.0 - s) * sum;
  }
  return std::pow(c, 1.0 / alpha) * boost::math::tgamma_lower(s, x) +
         tau * std::expm1(-x);
}

// Smallest t > tau with G(t) = target, for 0 < target < G(tau). G is
// decreasing and convex, so Newton steps from the left never overshoot.
double candidate_time(double tau, double target, double c, double alpha) {
  double t = tau;
  for (int it = 0; it < 400; ++it) {
    const double g = candidate_mass(t, c, alpha) - target;
    const double lam = -std::expm1(-c * std::pow(t, -alpha));
    if (!(g > 0.0) || !(lam > 0.0)) break;
    const double step = g / lam;
    t += step;
    if (step <= 1e-15 * t) break;
  }
  return t;
}

struct StreamBits {
  SeededStream& s;
  using result_type = uint64_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() { return s.next_u64(); }
};

EncodeResult encode_thinned_impl(const PprParams& params, const Proposal& proposal,
                                 const DensityRatio& ratio, const SharedSeed& shared,
                                 SeededStream& local) {
  const double alpha = params.alpha();
  const AlphaPow apow{alpha, alpha == 2.0};
  const double rstar_pow = apow.pow(ratio.r_star);
  EncodeResult res;
  SharedDraws draws(proposal, shared);
  std::vector<double> z(proposal.dim);
  res.z.resize(proposal.dim);
  StreamBits bits{local};

  double tau = 0.0;
  uint64_t k = 0;
  auto evaluate = [&](double t, double v) {
    ++res.points_examined;
    ++res.points_generated;
    draws.draw(k, z);
    const double r = checked_ratio(ratio, z);
    const double w = r > 0.0 ? apow.pow(t / r) * v : std::numeric_limits<double>::infinity();
    if (w < res.w_star) {
      res.w_star = w;
      res.k = k;
      res.z = z;
    }
  };

  // Until some point has a positive ratio every point is a candidate.
  while (std::isinf(res.w_star)) {
    tau += local.exp();
    ++k;
    evaluate(tau, local.exp());
  }
  for (;;) {
    const double c = res.w_star * rstar_pow;
    const double mass = candidate_mass(tau, c, alpha);
    const double e = local.exp();
    if (e >= mass) break;
    const double t = candidate_time(tau, mass - e, c, alpha);
    // Points in (tau, t) that are not candidates: Poisson with mean
    // (t - tau) - (G(tau) - G(t)) = (t - tau) - e.
    const double skipped_mean = (t - tau) - e;
    if (skipped_mean > 0.0)
      k += std::poisson_distribution<uint64_t>(skipped_mean)(bits);
    ++k;
    // V ~ Exp(1) conditioned on V <= c t^-alpha.
    const double y = c * std::pow(t, -alpha);
    const double v = -std::log1p(local.uniform() * std::expm1(-y));
    evaluate(t, v);
    tau = t;
  }
  return res;
}

}  // namespace

EncodeResult encode_thinned(const PprParams& params, const Proposal& proposal,
                            const DensityRatio& ratio, const SharedSeed& shared,
                            SeededStream& local) {
  check_inputs(proposal, ratio);
  const auto start = std::chrono::steady_clock::now();
  EncodeResult res = params.is_infinite()
                         ? encode_infinite(proposal, ratio, shared, local)
                         : encode_thinned_impl(params, proposal, ratio, shared, local);
  res.wall_time = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - start).count();
  return res;
}

EncodeResult encode(const PprParams& params, const Proposal& proposal,
                    const DensityRatio& ratio, const SharedSeed& shared,
                    SeededStream& local) {
  check_inputs(proposal, ratio);
  const auto start = std::chrono::steady_clock::now();
  EncodeResult res = params.is_infinite()
                         ? encode_infinite(proposal, ratio, shared, local)
                         : encode_impl(params, proposal, ratio, shared, local, 0,
                                       AlphaPow{params.alpha(), params.alpha() == 2.0});
  res.wall_time = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - start).count();
  return res;
}

EncodeResult encode_truncated(const PprParams& params, const Proposal& proposal,
                              const DensityRatio& ratio,
                              const SharedSeed& shared, SeededStream& local,
                              uint64_t n_points) {
  check_inputs(proposal, ratio);
  if (n_points == 0)
    throw std::invalid_argument("encode_truncated: n_points must be >= 1");
  if (params.is_infinite())
    throw std::invalid_argument("encode_truncated: alpha must be finite");
  const auto start = std::chrono::steady_clock::now();
  EncodeResult res = encode_impl(params, proposal, ratio, shared, local, n_points,
                                AlphaPow{params.alpha(), params.alpha() == 2.0});
  res.wall_time = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - start).count();
  return res;
}

void decode_into(const Proposal& proposal, uint64_t k, const SharedSeed& shared,
                 std::span<double> out) {
  if (k == 0) throw std::invalid_argument("decode: k must be >= 1");
  SeededStream s(shared.seed, shared.substream);
  s.jump_to((k - 1) << kSharedDrawShift);
  proposal.sample(s, out);
}

std::vector<double> decode(const Proposal& proposal, uint64_t k,
                           const SharedSeed& shared) {
  std::vector<double> z(proposal.dim);
  decode_into(proposal, k, shared, z);
  return z;
}

Pmf conditional_index_pmf(std::span<const double> tilde_t, double alpha) {
  if (tilde_t.empty())
    throw std::invalid_argument("conditional_index_pmf: empty list");
  if (!(alpha > 1.0))
    throw std::invalid_argument("conditional_index_pmf: alpha must be > 1");
  double log_min = std::numeric_limits<double>::infinity();
  for (double t : tilde_t) {
    if (!(t > 0.0))
      throw std::invalid_argument("conditional_index_pmf: entries must be > 0");
    log_min = std::min(log_min, std::log(t));
  }
  std::vector<double> w(tilde_t.size());
  for (std::size_t i = 0; i < w.size(); ++i)
    w[i] = std::exp(-alpha * (std::log(tilde_t[i]) - log_min));
  return Pmf::normalized(std::move(w));
}

namespace {

double eta_alpha(double alpha) {
  return std::log2(3.56) / std::min((alpha - 1.0) / 2.0, 1.0);
}

// (1/eta) log2(Gamma(1-(eta+1)/alpha) Gamma(eta+1) / Gamma(1-1/alpha)^{eta+1} + 1)
double refined_term(double alpha, double eta) {
  using std::lgamma;
  const double lg = lgamma(1.0 - (eta + 1.0) / alpha) + lgamma(eta + 1.0) -
                    (eta + 1.0) * lgamma(1.0 - 1.0 / alpha);
  // log2(e^lg + 1) without overflow.
  const double l2 = lg > 30.0 ? lg / std::log(2.0) + std::log2(1.0 + std::exp(-lg))
                              : std::log2(std::exp(lg) + 1.0);
  return l2 / eta;
}

}  // namespace

double logk_bound_simple(double alpha, double kl_bits) {
  if (!(alpha > 1.0)) throw std::invalid_argument("logk bound: alpha must be > 1");
  if (!(kl_bits >= 0.0)) throw std::invalid_argument("logk bound: KL must be >= 0");
  if (std::isinf(alpha)) return kl_bits + std::log2(3.56);
  return kl_bits + eta_alpha(alpha);
}

double logk_bound_refined(double alpha, double kl_bits) {
  if (!(alpha > 1.0)) throw std::invalid_argument("logk bound: alpha must be > 1");
  if (!(kl_bits >= 0.0)) throw std::invalid_argument("logk bound: KL must be >= 0");
  if (std::isinf(alpha)) return kl_bits + 1.0;
  // eta ranges over (0,1] intersected with (0, alpha-1).
  const bool closed = alpha - 1.0 > 1.0;
  const double hi = closed ? 1.0 : (alpha - 1.0) * (1.0 - 1e-9);
  const int grid = 400;
  double best_eta = hi;
  double best = refined_term(alpha, hi);
  for (int i = 1; i < grid; ++i) {
    const double eta = hi * static_cast<double>(i) / grid;
    const double val = refined_term(alpha, eta);
    if (val < best) {
      best = val;
      best_eta = eta;
    }
  }
  const double lo_b = std::max(best_eta - hi / grid, hi * 1e-6);
  const double hi_b = std::min(best_eta + hi / grid, hi);
  const auto r = boost::math::tools::brent_find_minima(
      [alpha](double e) { return refined_term(alpha, e); }, lo_b, hi_b, 50);
  return kl_bits + std::min(best, r.second);
}

double expected_logk_bound(double alpha, double kl_bits) {
  return std::min(logk_bound_simple(alpha, kl_bits),
                  logk_bound_refined(alpha, kl_bits));
}

PrivacyPair privacy_inflation(double eps, double delta, double alpha) {
  if (!(eps >= 0.0) || !(delta >= 0.0 && delta <= 1.0) || !(alpha > 1.0))
    throw std::invalid_argument("privacy_inflation: parameter out of range");
  return {2.0 * alpha * eps, 2.0 * delta};
}

double metric_coefficient(double alpha) {
  if (!(alpha > 1.0))
    throw std::invalid_argument("metric_coefficient: alpha must be > 1");
  return 2.0 * alpha;
}

double alpha_for_tight_dp(double eps_tilde, double delta_tilde) {
  if (!(eps_tilde > 0.0 && eps_tilde <= 1.0) ||
      !(delta_tilde > 0.0 && delta_tilde <= 1.0 / 3.0))
    throw std::invalid_argument("alpha_for_tight_dp: parameter out of range");
  return std::exp(-4.2) * delta_tilde * eps_tilde * eps_tilde /
             (-std::log(delta_tilde)) +
         1.0;
}

}  // namespace oneshot
