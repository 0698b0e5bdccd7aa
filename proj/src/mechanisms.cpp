#include "oneshot/mechanisms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <boost/math/tools/minima.hpp>

namespace oneshot {

namespace {

constexpr double kLn2 = std::numbers::ln2;

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

double log_sum_exp(double a, double b) {
  if (a == -INFINITY) return b;
  if (b == -INFINITY) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

void check_spec_center(std::span<const double> x, double C) {
  if (x.empty()) throw std::invalid_argument("mechanism: dimension must be > 0");
  if (!(C > 0.0)) throw std::invalid_argument("mechanism: C must be > 0");
  if (std::sqrt(norm2(x)) > C * (1.0 + 1e-12))
    throw std::invalid_argument("mechanism: ||x|| exceeds C");
}

// Minimizes f over gamma in (1, inf) by a log-spaced grid on gamma - 1
// followed by Brent refinement. Returns (argmin, min).
template <class F>
std::pair<double, double> minimize_order(F f) {
  const double lo = std::log(1e-6), hi = std::log(1e8);
  const int grid = 200;
  double best_t = lo, best = INFINITY;
  for (int i = 0; i <= grid; ++i) {
    const double t = lo + (hi - lo) * i / grid;
    const double v = f(1.0 + std::exp(t));
    if (v < best) {
      best = v;
      best_t = t;
    }
  }
  const double step = (hi - lo) / grid;
  const auto r = boost::math::tools::brent_find_minima(
      [&](double t) { return f(1.0 + std::exp(t)); },
      std::max(lo, best_t - step), std::min(hi, best_t + step), 52);
  if (r.second < best) return {1.0 + std::exp(r.first), r.second};
  return {1.0 + std::exp(best_t), best};
}

}  // namespace

double gaussian_sigma_for_dp(double C, double eps, double delta) {
  if (!(C > 0.0) || !(eps > 0.0 && eps <= 1.0) || !(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("gaussian_sigma_for_dp: parameter out of range");
  return C * std::sqrt(2.0 * std::log(1.25 / delta)) / eps;
}

double gaussian_log_ratio(std::span<const double> z, std::span<const double> x,
                          double a, double b) {
  double dz = 0.0, zz = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double e = z[i] - x[i];
    dz += e * e;
    zz += z[i] * z[i];
  }
  return 0.5 * static_cast<double>(z.size()) * std::log(b / a) - dz / (2.0 * a) +
         zz / (2.0 * b);
}

double gaussian_log_r_star(std::span<const double> x, double a, double b) {
  return 0.5 * static_cast<double>(x.size()) * std::log(b / a) +
         norm2(x) / (2.0 * (b - a));
}

double gaussian_kl_nats(std::span<const double> x, double a, double b) {
  const double d = static_cast<double>(x.size());
  return 0.5 * d * (a / b - 1.0 + std::log(b / a)) + norm2(x) / (2.0 * b);
}

MechanismModel gaussian_ratio(const GaussianMechSpec& spec) {
  check_spec_center(spec.x, spec.C);
  if (!(spec.sigma > 0.0) || spec.n == 0)
    throw std::invalid_argument("gaussian_ratio: sigma and n must be positive");
  const std::size_t d = spec.x.size();
  const double a = spec.sigma * spec.sigma / static_cast<double>(spec.n);
  const double b = a + spec.C * spec.C / static_cast<double>(d);
  if (!(b > a)) throw std::invalid_argument("gaussian_ratio: degenerate variances");

  MechanismModel m;
  const double sd_q = std::sqrt(b);
  m.proposal.dim = d;
  m.proposal.sample = [sd_q](SeededStream& s, std::span<double> out) {
    for (double& v : out) v = sd_q * s.normal();
  };
  m.ratio.ratio_fn = [x = spec.x, a, b](std::span<const double> z) {
    return std::exp(gaussian_log_ratio(z, x, a, b));
  };
  // The closed-form sup can be hit exactly; allow for rounding in exp().
  m.ratio.r_star = std::exp(gaussian_log_r_star(spec.x, a, b)) * (1.0 + 1e-12);
  m.kl_bits = gaussian_kl_nats(spec.x, a, b) / kLn2;
  m.kl_bound_bits = 0.5 * static_cast<double>(d) * std::log2(b / a);
  return m;
}

double laplace_log_normalizer(std::size_t d, double eps) {
  const double dd = static_cast<double>(d);
  // S_d = 2 pi^{d/2} / Gamma(d/2)
  const double log_sd = std::log(2.0) + 0.5 * dd * std::log(std::numbers::pi) -
                        std::lgamma(0.5 * dd);
  return dd * std::log(eps) - log_sd - std::lgamma(dd);
}

namespace {

struct LaplaceMixture {
  std::size_t d;
  double eps, eps_t, w, s2;
  double log_p_norm, log_lap_t_norm, log_gauss_norm;

  // log p(z) - log q(z) from ||z||^2 and ||z - x||^2.
  double log_ratio(double zz, double dz) const {
    const double log_p = log_p_norm - eps * std::sqrt(dz);
    const double lg = std::log1p(-w) + log_gauss_norm - zz / (2.0 * s2);
    const double ll = std::log(w) + log_lap_t_norm - eps_t * std::sqrt(zz);
    return log_p - log_sum_exp(lg, ll);
  }
};

}  // namespace

MechanismModel laplace_ratio(const LaplaceMechSpec& spec) {
  check_spec_center(spec.x, spec.C);
  if (!(spec.eps > 0.0)) throw std::invalid_argument("laplace_ratio: eps must be > 0");
  if (!(spec.mixture_weight > 0.0 && spec.mixture_weight < 1.0))
    throw std::runtime_error(
        "laplace_ratio: r_star certification failure (the ratio against a "
        "Gaussian proposal is unbounded; use a mixture weight in (0,1))");
  const std::size_t d = spec.x.size();
  const double dd = static_cast<double>(d);
  LaplaceMixture mix;
  mix.d = d;
  mix.eps = spec.eps;
  mix.eps_t = spec.eps / 2.0;
  mix.w = spec.mixture_weight;
  mix.s2 = spec.C * spec.C / dd + (dd + 1.0) / (spec.eps * spec.eps);
  mix.log_p_norm = laplace_log_normalizer(d, mix.eps);
  mix.log_lap_t_norm = laplace_log_normalizer(d, mix.eps_t);
  mix.log_gauss_norm = -0.5 * dd * std::log(2.0 * std::numbers::pi * mix.s2);

  const double m = std::sqrt(norm2(spec.x));
  // Rigorous: q >= w * Lap_t, and eps_t ||z|| <= eps_t ||z-x|| + eps_t ||x||.
  const double log_rigorous = -std::log(mix.w) + dd * std::log(mix.eps / mix.eps_t) +
                              mix.eps_t * m;

  // The ratio depends on z only through (||z||, ||z-x||), so search the plane
  // spanned by x and one orthogonal direction.
  auto f = [&](double sp, double pp) {
    const double zz = sp * sp + pp * pp;
    const double dz = (sp - m) * (sp - m) + pp * pp;
    return mix.log_ratio(zz, dz);
  };
  const double R = m + 4.0 * std::sqrt(mix.s2) + 20.0 * dd / spec.eps;
  const int gs = 400, gp = (d == 1 ? 0 : 200);
  double best = -INFINITY, bs = 0.0, bp = 0.0;
  for (int i = 0; i <= gs; ++i) {
    const double sp = -R + 2.0 * R * i / gs;
    for (int j = 0; j <= gp; ++j) {
      const double pp = gp == 0 ? 0.0 : R * j / gp;
      const double v = f(sp, pp);
      if (v > best) {
        best = v;
        bs = sp;
        bp = pp;
      }
    }
  }
  // Pattern search refinement around the best grid cell.
  double step = 2.0 * R / gs;
  while (step > 1e-10 * (1.0 + R)) {
    bool moved = false;
    const double cand[4][2] = {{bs + step, bp}, {bs - step, bp},
                               {bs, bp + step}, {bs, std::max(0.0, bp - step)}};
    for (int c = 0; c < (d == 1 ? 2 : 4); ++c) {
      const double v = f(cand[c][0], cand[c][1]);
      if (v > best) {
        best = v;
        bs = cand[c][0];
        bp = cand[c][1];
        moved = true;
      }
    }
    if (!moved) step *= 0.5;
  }
  const double log_r_star = std::min(best + std::log(1.01), log_rigorous);
  if (!std::isfinite(log_r_star))
    throw std::runtime_error("laplace_ratio: r_star certification failure");

  MechanismModel out;
  out.proposal.dim = d;
  out.proposal.sample = [mix](SeededStream& s, std::span<double> z) {
    if (s.uniform() < mix.w) {
      const double r = s.gamma(static_cast<double>(mix.d)) / mix.eps_t;
      s.sphere_uniform(z);
      for (double& v : z) v *= r;
    } else {
      const double sd = std::sqrt(mix.s2);
      for (double& v : z) v = sd * s.normal();
    }
  };
  out.ratio.ratio_fn = [mix, x = spec.x](std::span<const double> z) {
    double zz = 0.0, dz = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      zz += z[i] * z[i];
      dz += (z[i] - x[i]) * (z[i] - x[i]);
    }
    return std::exp(mix.log_ratio(zz, dz));
  };
  out.ratio.r_star = std::exp(log_r_star);
  // D(P || N(0, s^2 I)) in closed form, then the mixture costs at most
  // ln(1/(1-w)) more.
  const double kl_gauss = mix.log_p_norm - dd + 0.5 * dd * std::log(2.0 * std::numbers::pi * mix.s2) +
                          (m * m + dd * (dd + 1.0) / (spec.eps * spec.eps)) / (2.0 * mix.s2);
  out.kl_bits = (kl_gauss - std::log1p(-mix.w)) / kLn2;
  out.kl_bound_bits = laplace_ppr_ell(spec.C, spec.eps, d, 3.0) - eta_alpha(3.0) -
                      std::log2(1.0 - mix.w);
  return out;
}

std::vector<double> laplace_sample_direct(const LaplaceMechSpec& spec,
                                          SeededStream& stream) {
  if (spec.x.empty()) throw std::invalid_argument("laplace: dimension must be > 0");
  if (!(spec.eps > 0.0)) throw std::invalid_argument("laplace: eps must be > 0");
  const std::size_t d = spec.x.size();
  const double r = stream.gamma(static_cast<double>(d)) / spec.eps;
  std::vector<double> z = stream.sphere_uniform(d);
  for (std::size_t i = 0; i < d; ++i) z[i] = spec.x[i] + r * z[i];
  return z;
}

double eta_alpha(double alpha) {
  if (!(alpha > 1.0)) throw std::invalid_argument("eta_alpha: alpha must be > 1");
  return std::log2(3.56) / std::min((alpha - 1.0) / 2.0, 1.0);
}

double total_budget_bits(double ell) {
  if (!(ell >= 0.0)) throw std::invalid_argument("total_budget_bits: ell < 0");
  return ell + std::log2(ell + 1.0) + 2.0;
}

double gaussian_ppr_ell(double C, std::size_t n, std::size_t d, double sigma,
                        double alpha) {
  if (!(C > 0.0) || n == 0 || d == 0 || !(sigma > 0.0))
    throw std::invalid_argument("gaussian_ppr_ell: parameters must be positive");
  const double dd = static_cast<double>(d);
  return 0.5 * dd * std::log2(C * C * static_cast<double>(n) / (dd * sigma * sigma) + 1.0) +
         eta_alpha(alpha);
}

double laplace_ppr_ell(double C, double eps, std::size_t d, double alpha) {
  if (!(C > 0.0) || !(eps > 0.0) || d == 0)
    throw std::invalid_argument("laplace_ppr_ell: parameters must be positive");
  const double dd = static_cast<double>(d);
  return 0.5 * dd * std::log2(2.0 / std::numbers::e * (C * C * eps * eps / dd + dd + 1.0)) -
         (std::lgamma(dd + 1.0) - std::lgamma(dd / 2.0 + 1.0)) / kLn2 + eta_alpha(alpha);
}

double generic_compression_bound(double eps, double alpha) {
  if (!(eps >= 0.0)) throw std::invalid_argument("generic bound: eps must be >= 0");
  return total_budget_bits(eps * std::numbers::log2e + eta_alpha(alpha));
}

double rdp_to_dp(double gamma, double eps, double delta) {
  if (!(gamma > 1.0) || !(eps >= 0.0) || !(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("rdp_to_dp: parameter out of range");
  return eps + std::log(1.0 / (gamma * delta)) / (gamma - 1.0) +
         std::log1p(-1.0 / gamma);
}

RdpGaussian gaussian_rdp_eps(double C, double sigma, double delta) {
  if (!(C > 0.0) || !(sigma > 0.0))
    throw std::invalid_argument("gaussian_rdp_eps: parameters must be positive");
  const double c = C * C / (2.0 * sigma * sigma);
  const auto [g, v] = minimize_order(
      [&](double gamma) { return rdp_to_dp(gamma, gamma * c, delta); });
  return {sigma, g, v};
}

RdpGaussian gaussian_sigma_rdp(double C, double eps, double delta) {
  if (!(C > 0.0) || !(eps > 0.0) || !(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("gaussian_sigma_rdp: parameter out of range");
  double lo = std::log(C * 1e-6), hi = std::log(C * 1e9);
  for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (gaussian_rdp_eps(C, std::exp(mid), delta).eps_dp <= eps)
      hi = mid;
    else
      lo = mid;
  }
  return gaussian_rdp_eps(C, std::exp(hi), delta);
}

PrivacyReport gaussian_ppr_privacy(double C, std::size_t n, double sigma,
                                   double eps, double delta, double alpha) {
  if (n == 0) throw std::invalid_argument("privacy report: n must be > 0");
  PrivacyReport rep;
  rep.central = {eps, delta};
  const double rn = std::sqrt(static_cast<double>(n));
  if (eps < 1.0 / rn) {
    rep.local = privacy_inflation(rn * eps, delta, alpha);
    rep.local_route = "approx-dp";
  } else {
    // One client's mechanism has variance sigma^2/n, so its Renyi level at
    // order gamma is n gamma C^2 / (2 sigma^2).
    const RdpGaussian loc =
        gaussian_rdp_eps(C, sigma / rn, delta);
    rep.local = privacy_inflation(loc.eps_dp, delta, alpha);
    rep.local_route = "renyi";
  }
  return rep;
}

double csgm_rdp_eps(double q, double sigma, double coord_bound, std::size_t d,
                    int order) {
  if (!(q > 0.0 && q <= 1.0) || !(sigma > 0.0) || !(coord_bound > 0.0) || order < 2)
    throw std::invalid_argument("csgm_rdp_eps: parameter out of range");
  const double mult2 = (sigma / coord_bound) * (sigma / coord_bound);
  const double lam = order;
  double log_a = -INFINITY;
  if (q == 1.0) {
    log_a = (lam * lam - lam) / (2.0 * mult2);
  } else {
    const double lq = std::log(q), l1q = std::log1p(-q);
    for (int k = 0; k <= order; ++k) {
      const double kk = k;
      const double term = std::lgamma(lam + 1.0) - std::lgamma(kk + 1.0) -
                          std::lgamma(lam - kk + 1.0) + (lam - kk) * l1q + kk * lq +
                          (kk * kk - kk) / (2.0 * mult2);
      log_a = log_sum_exp(log_a, term);
    }
  }
  return static_cast<double>(d) * log_a / (lam - 1.0);
}

double csgm_dp_eps(double q, double sigma, double coord_bound, std::size_t d,
                   double delta, int* best_order) {
  double best = INFINITY;
  int arg = 2;
  for (int lam = 2; lam < 400; ++lam) {
    const double v = rdp_to_dp(lam, csgm_rdp_eps(q, sigma, coord_bound, d, lam), delta);
    if (v < best) {
      best = v;
      arg = lam;
    }
  }
  if (best_order) *best_order = arg;
  return best;
}

CsgmCalibration csgm_calibrate(const CsgmParams& p) {
  if (p.n == 0 || p.d == 0 || !(p.eps > 0.0) || !(p.delta > 0.0 && p.delta < 1.0) ||
      !(p.coord_bound > 0.0))
    throw std::invalid_argument("csgm: parameter out of range");
  if (!(p.bits >= 1.0))
    throw std::invalid_argument("csgm: bit budget below one coordinate");
  CsgmCalibration cal;
  cal.params = p;
  cal.q = std::min(1.0, p.bits / static_cast<double>(p.d));
  double lo = std::log(p.coord_bound * 1e-6), hi = std::log(p.coord_bound * 1e9);
  for (int it = 0; it < 100 && hi - lo > 1e-10; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (csgm_dp_eps(cal.q, std::exp(mid), p.coord_bound, p.d, p.delta) <= p.eps)
      hi = mid;
    else
      lo = mid;
  }
  cal.sigma = std::exp(hi);
  cal.eps_dp = csgm_dp_eps(cal.q, cal.sigma, p.coord_bound, p.d, p.delta, &cal.order);
  return cal;
}

double csgm_mse_formula(const CsgmCalibration& cal) {
  const double n = static_cast<double>(cal.params.n);
  const double d = static_cast<double>(cal.params.d);
  const double b2 = cal.params.coord_bound * cal.params.coord_bound;
  return d * b2 * (1.0 - cal.q) / (n * cal.q) +
         d * cal.sigma * cal.sigma / (n * n * cal.q * cal.q);
}

CsgmMessage csgm_encode(std::span<const double> x, const CsgmCalibration& cal,
                        SeededStream& stream) {
  if (x.size() != cal.params.d)
    throw std::invalid_argument("csgm_encode: dimension mismatch");
  const double B = cal.params.coord_bound;
  CsgmMessage msg;
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (std::abs(x[j]) > B * (1.0 + 1e-12))
      throw std::invalid_argument("csgm_encode: coordinate exceeds its bound");
    if (cal.q < 1.0 && !(stream.uniform() < cal.q)) continue;
    const double p_plus = 0.5 * (1.0 + x[j] / B);
    const bool plus = p_plus >= 1.0 || (p_plus > 0.0 && stream.uniform() < p_plus);
    msg.coords.push_back(static_cast<uint32_t>(j));
    msg.signs.push_back(plus ? 1 : -1);
  }
  return msg;
}

CsgmMessage csgm_encode(std::span<const double> x, double eps, double delta,
                        double bits, std::size_t n, std::size_t d,
                        SeededStream& stream) {
  double bound = 0.0;
  for (double v : x) bound = std::max(bound, std::abs(v));
  CsgmParams p{eps, delta, bits, n, d, bound > 0.0 ? bound : 1.0};
  return csgm_encode(x, csgm_calibrate(p), stream);
}

std::vector<double> csgm_estimate(std::span<const CsgmMessage> messages,
                                  const CsgmCalibration& cal,
                                  SeededStream& server_stream) {
  if (messages.empty()) throw std::invalid_argument("csgm_estimate: no messages");
  const std::size_t d = cal.params.d;
  std::vector<double> sum(d, 0.0);
  for (const auto& m : messages)
    for (std::size_t i = 0; i < m.coords.size(); ++i)
      sum.at(m.coords[i]) += m.signs[i] * cal.params.coord_bound;
  const double scale = 1.0 / (static_cast<double>(cal.params.n) * cal.q);
  for (double& s : sum) s = (s + cal.sigma * server_stream.normal()) * scale;
  return sum;
}

double ball_log_volume(std::size_t d, double C) {
  const double dd = static_cast<double>(d);
  return 0.5 * dd * std::log(std::numbers::pi) + dd * std::log(C) -
         std::lgamma(0.5 * dd + 1.0);
}

double discrete_laplace_step(double C, std::size_t d, double bits) {
  if (d == 0 || !(C > 0.0)) throw std::invalid_argument("discrete laplace: bad geometry");
  if (!(bits >= 1.0)) throw std::invalid_argument("discrete laplace: infeasible bit budget");
  return std::exp((ball_log_volume(d, C) - bits * kLn2) / static_cast<double>(d));
}

std::size_t discrete_laplace_bits(double C, std::size_t d, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("discrete laplace: step must be > 0");
  const double cells = (ball_log_volume(d, C) - static_cast<double>(d) * std::log(step)) / kLn2;
  return static_cast<std::size_t>(std::max(0.0, std::ceil(cells - 1e-9)));
}

DiscreteLaplaceResult discrete_laplace_baseline(std::span<const double> x,
                                                double eps, double C,
                                                double bits,
                                                SeededStream& stream) {
  check_spec_center(x, C);
  if (!(eps > 0.0)) throw std::invalid_argument("discrete laplace: eps must be > 0");
  const std::size_t d = x.size();
  DiscreteLaplaceResult res;
  res.step = discrete_laplace_step(C, d, bits);
  res.bits = discrete_laplace_bits(C, d, res.step);
  const double r = stream.gamma(static_cast<double>(d)) / eps;
  res.z = stream.sphere_uniform(d);
  for (std::size_t i = 0; i < d; ++i) res.z[i] = x[i] + r * res.z[i];
  const double nz = std::sqrt(norm2(res.z));
  if (nz > C)
    for (double& v : res.z) v *= C / nz;
  for (double& v : res.z) v = res.step * std::round(v / res.step);
  return res;
}

}  // namespace oneshot
