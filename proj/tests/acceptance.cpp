// End-to-end acceptance run. Each criterion prints its measurements indented
// and then one PASS or FAIL line. The exit status is nonzero if any criterion
// fails. Arguments, if given, select criteria whose name contains them.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <exception>
#include <functional>
#include <string>
#include <vector>

#include "oneshot/adn.hpp"
#include "oneshot/dme.hpp"
#include "oneshot/intcodes.hpp"
#include "oneshot/mechanisms.hpp"
#include "oneshot/ppr.hpp"
#include "oneshot/rng.hpp"
#include "oneshot/secrecy.hpp"
#include "oneshot/stats.hpp"

using namespace oneshot;

namespace {

constexpr double kSignificance = 1e-3;

double norm_diff(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

__attribute__((format(printf, 2, 3))) bool check(bool ok, const char* fmt_line, ...) {
  std::printf("  %s ", ok ? "ok  " : "BAD ");
  va_list args;
  va_start(args, fmt_line);
  std::vprintf(fmt_line, args);
  va_end(args);
  std::printf("\n");
  std::fflush(stdout);
  return ok;
}

// ---- PPR exactness ----

// Encodes n samples of the Gaussian mechanism, decodes each index from the
// shared seed, and returns the decoded points.
std::vector<std::vector<double>> ppr_samples(const MechanismModel& m, double alpha, bool heap,
                                             uint64_t n, uint64_t seed, bool* decode_ok) {
  std::vector<std::vector<double>> out;
  out.reserve(n);
  *decode_ok = true;
  const PprParams params(alpha);
  for (uint64_t i = 0; i < n; ++i) {
    SeededStream local(seed, derive(1, i));
    const SharedSeed shared{seed, derive(2, i)};
    const auto r = heap ? encode(params, m.proposal, m.ratio, shared, local)
                        : encode_thinned(params, m.proposal, m.ratio, shared, local);
    auto z = decode(m.proposal, r.k, shared);
    if (z != r.z) *decode_ok = false;
    out.push_back(std::move(z));
  }
  return out;
}

bool ppr_exactness() {
  bool ok = true;
  const uint64_t n = 100000;

  // d = 1: P = N(x, a), checked by KS on the sample itself.
  {
    const GaussianMechSpec spec{{0.7}, 1.0, 1.0, 2};
    const auto m = gaussian_ratio(spec);
    const double sd = std::sqrt(spec.sigma * spec.sigma / spec.n);
    for (auto [alpha, heap] : {std::pair{2.0, false}, std::pair{3.0, true}}) {
      bool dec = false;
      const auto zs = ppr_samples(m, alpha, heap, n, 101 + heap, &dec);
      std::vector<double> v;
      for (const auto& z : zs) v.push_back(z[0]);
      const auto ks = ks_one_sample(v, [&](double t) { return normal_cdf(t, 0.7, sd); });
      ok &= check(dec, "d=1 alpha=%g %s: decoded index reproduces the encoder output", alpha,
                  heap ? "heap" : "thinned");
      ok &= check(ks.p_value > kSignificance, "d=1 alpha=%g KS D=%.5f p=%.4f", alpha,
                  ks.statistic, ks.p_value);
    }
  }

  // d = 4: KS on the first coordinate and on ||z - x||^2 / a, which is
  // chi-square with 4 degrees of freedom.
  {
    const GaussianMechSpec spec{{0.3, -0.4, 0.2, 0.1}, 1.0, 1.0, 2};
    const auto m = gaussian_ratio(spec);
    const double a = spec.sigma * spec.sigma / spec.n;
    bool dec = false;
    const auto zs = ppr_samples(m, 2.0, false, n, 103, &dec);
    std::vector<double> first, q;
    for (const auto& z : zs) {
      first.push_back(z[0]);
      const double r = norm_diff(z, spec.x);
      q.push_back(r * r / a);
    }
    const auto k1 = ks_one_sample(first, [&](double t) { return normal_cdf(t, 0.3, std::sqrt(a)); });
    const auto k2 = ks_one_sample(q, [](double t) {
      return t <= 0.0 ? 0.0 : 1.0 - std::exp(-0.5 * t) * (1.0 + 0.5 * t);
    });
    ok &= check(dec, "d=4: decoded index reproduces the encoder output");
    ok &= check(k1.p_value > kSignificance, "d=4 first coordinate KS D=%.5f p=%.4f",
                k1.statistic, k1.p_value);
    ok &= check(k2.p_value > kSignificance, "d=4 chi-square(4) radius KS D=%.5f p=%.4f",
                k2.statistic, k2.p_value);
  }
  return ok;
}

// ---- compression bound ----

// 1-D Gaussian mechanism whose exact KL is target bits, found by bisection
// on sigma (the KL decreases in sigma).
MechanismModel gaussian_with_kl(double target_bits) {
  double lo = 1e-6, hi = 1e6;
  for (int i = 0; i < 200; ++i) {
    const double mid = std::sqrt(lo * hi);
    (gaussian_ratio({{0.8}, mid, 1.0, 1}).kl_bits > target_bits ? lo : hi) = mid;
  }
  return gaussian_ratio({{0.8}, std::sqrt(lo * hi), 1.0, 1});
}

bool compression_bound() {
  bool ok = true;
  const uint64_t samples = 4000;
  const std::vector<double> targets = {0.01, 0.5, 1, 2, 3, 4, 5, 6, 7, 8};
  for (std::size_t j = 0; j < targets.size(); ++j) {
    const auto m = gaussian_with_kl(targets[j]);
    for (double alpha : {1.5, 2.0, 3.0}) {
      const PprParams params(alpha);
      RunningStats lk;
      for (uint64_t i = 0; i < samples; ++i) {
        SeededStream local(200 + j, derive(alpha * 10, i));
        const SharedSeed shared{300 + j, derive(alpha * 10, i)};
        const auto r = alpha == 3.0 ? encode(params, m.proposal, m.ratio, shared, local)
                                    : encode_thinned(params, m.proposal, m.ratio, shared, local);
        lk.add(std::log2(static_cast<double>(r.k)));
      }
      const double bound = m.kl_bits + eta_alpha(alpha);
      ok &= check(lk.mean() <= bound + 3.0 * lk.stderr_(),
                  "KL=%.3f bits alpha=%g: E[log2 K]=%.4f (se %.4f) bound %.4f", m.kl_bits,
                  alpha, lk.mean(), lk.stderr_(), bound);
    }
  }
  return ok;
}

// ---- conditional ratio ----

bool conditional_ratio() {
  SeededStream s(400, 0);
  const std::size_t m = 6;
  double worst = 0.0;
  bool ok = true;
  for (int proc = 0; proc < 1000; ++proc) {
    const double eps = 0.05 + 2.0 * s.uniform();
    const double alpha = std::vector<double>{1.5, 2.0, 3.0, 5.0}[proc % 4];
    // P1 arbitrary, P2 = P1 e^{eps u} / Z with u in [-1/2, 1/2], so the
    // pointwise ratio lies in [e^{-eps}, e^{eps}]. Q is uniform.
    std::vector<double> p1(m), p2(m);
    double s1 = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < m; ++i) s1 += (p1[i] = s.exp());
    for (std::size_t i = 0; i < m; ++i) {
      p1[i] /= s1;
      s2 += (p2[i] = p1[i] * std::exp(eps * (s.uniform() - 0.5)));
    }
    for (double& v : p2) v /= s2;
    const std::size_t n = 2 + s.below(200);
    std::vector<double> t1(n), t2(n);
    double t = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      t += s.exp();
      const std::size_t z = s.below(m);
      t1[i] = t / (p1[z] * m);
      t2[i] = t / (p2[z] * m);
    }
    const auto a = conditional_index_pmf(t1, alpha);
    const auto b = conditional_index_pmf(t2, alpha);
    const double cap = std::exp(2.0 * alpha * eps);
    for (std::size_t i = 0; i < n; ++i) {
      const double r = std::max(a[i] / b[i], b[i] / a[i]) / cap;
      worst = std::max(worst, r);
      if (r > 1.0 + 1e-12) ok = false;
    }
  }
  check(ok, "1000 processes: max ratio / e^{2 alpha eps} = %.6f", worst);
  return ok;
}

// ---- prefix codes ----

bool prefix_codes() {
  bool ok = true;
  double kraft = 0.0;
  bool roundtrip = true;
  BitString stream;
  for (uint64_t k = 1; k <= (uint64_t{1} << 16); ++k) {
    const auto c = elias_delta_encode(k);
    if (c.size() != elias_delta_length(k) || elias_delta_decode(c) != k) roundtrip = false;
    kraft += std::ldexp(1.0, -static_cast<int>(c.size()));
    elias_delta_append(k, stream);
  }
  std::size_t pos = 0;
  for (uint64_t k = 1; k <= (uint64_t{1} << 16); ++k)
    if (elias_delta_decode(stream, &pos) != k) roundtrip = false;
  roundtrip = roundtrip && pos == stream.size();
  ok &= check(roundtrip, "Elias delta roundtrip for k <= 2^16, single and concatenated");
  ok &= check(kraft <= 1.0, "Elias delta Kraft sum %.9f", kraft);

  for (double kl : {0.5, 3.0, 6.0}) {
    const auto m = gaussian_with_kl(kl);
    std::vector<uint64_t> ks;
    RunningStats lk;
    for (uint64_t i = 0; i < 5000; ++i) {
      SeededStream local(500, i);
      const auto r = encode_thinned(PprParams(2.0), m.proposal, m.ratio, {501, i}, local);
      ks.push_back(r.k);
      lk.add(std::log2(static_cast<double>(r.k)));
    }
    const double e = lk.mean();
    const double lambda = choose_lambda(e);
    double zipf = 0.0, elias = 0.0, zkraft = 0.0;
    for (uint64_t k : ks) {
      zipf += zipf_shannon_length(k, lambda);
      elias += elias_delta_length(k);
    }
    zipf /= ks.size();
    elias /= ks.size();
    for (uint64_t k = 1; k <= (uint64_t{1} << 16); ++k)
      zkraft += std::ldexp(1.0, -static_cast<int>(zipf_shannon_length(k, lambda)));
    const auto b = expected_size_bounds(e);
    ok &= check(zipf <= b.zipf, "KL=%.1f: E[log2 K]=%.4f Zipf(lambda=%.3f) mean length %.4f <= %.4f",
                kl, e, lambda, zipf, b.zipf);
    ok &= check(elias <= b.elias, "KL=%.1f: Elias mean length %.4f <= %.4f", kl, elias, b.elias);
    ok &= check(zkraft <= 1.0, "KL=%.1f: Zipf Kraft sum over k <= 2^16 %.9f", kl, zkraft);
  }
  return ok;
}

// ---- DME anchors ----

DmeConfig full_scale_dme(double eps, double bits, DmeMechanism mech) {
  DmeConfig c;
  c.n = 500;
  c.d = 1000;
  c.C = 1.0;
  c.delta = 1e-6;
  c.alpha = 2.0;
  c.eps = eps;
  c.bit_budget = bits;
  c.trials = 200;
  c.seed = 600;
  c.mechanism = mech;
  return c;
}

bool dme_anchors() {
  bool ok = true;
  struct Anchor {
    double eps, bits;
    DmeMechanism mech;
    double target;
  };
  const std::vector<Anchor> anchors = {{1.0, 50, DmeMechanism::ppr_gaussian, 0.08173},
                                       {0.5, 25, DmeMechanism::ppr_gaussian, 0.3011},
                                       {1.0, 50, DmeMechanism::csgm, 0.1231},
                                       {0.5, 25, DmeMechanism::csgm, 0.3877}};
  for (const auto& a : anchors) {
    const auto cfg = full_scale_dme(a.eps, a.bits, a.mech);
    const auto r = run_dme(cfg);
    ok &= check(std::abs(r.mse - a.target) <= 0.1 * a.target,
                "%s eps=%g bits=%g: MSE %.5f (se %.5f) target %.5f, %.1fs", r.mechanism.c_str(),
                a.eps, a.bits, r.mse, r.mse_stderr, a.target, r.wall_time);
    if (a.mech != DmeMechanism::ppr_gaussian || a.eps != 1.0) continue;

    // Full budget: the 50-bit budget does not bind at eps = 1, so the run
    // above is the unlimited-budget simulation.
    auto full = cfg;
    full.bit_budget = INFINITY;
    const double eps_full = largest_feasible_eps(full);
    const double sigma = gaussian_sigma_rdp(cfg.C, cfg.eps, cfg.delta).sigma;
    const double theory = sigma * sigma * cfg.d / (double(cfg.n) * cfg.n);
    ok &= check(r.eps_used == eps_full, "eps'=%g equals the unlimited-budget eps'=%g",
                r.eps_used, eps_full);
    ok &= check(std::abs(r.mse - theory) <= 3.0 * r.mse_stderr,
                "full budget: MSE %.5f vs sigma^2 d/n^2 = %.5f (3 se = %.5f)", r.mse, theory,
                3.0 * r.mse_stderr);
  }
  return ok;
}

// ---- Laplace ----

bool laplace() {
  bool ok = true;
  for (auto [d, eps] : {std::pair<std::size_t, double>{2, 1.0}, {10, 2.0}, {50, 1.0}}) {
    LaplaceMechSpec spec{std::vector<double>(d, 0.0), eps, 1.0};
    spec.x[0] = 0.5;
    SeededStream s(700, d);
    RunningStats se;
    for (int i = 0; i < 100000; ++i) {
      const auto z = laplace_sample_direct(spec, s);
      const double r = norm_diff(z, spec.x);
      se.add(r * r);
    }
    const double theory = d * (d + 1.0) / (eps * eps);
    ok &= check(std::abs(se.mean() - theory) <= 3.0 * se.stderr_(),
                "d=%zu eps=%g: direct MSE %.4f (se %.4f) closed form %.4f", d, eps, se.mean(),
                se.stderr_(), theory);
  }
  for (auto [d, eps] : {std::pair<std::size_t, double>{2, 1.0}, {10, 2.0}}) {
    LaplaceMechSpec spec{std::vector<double>(d, 0.0), eps, 1.0};
    spec.x[0] = 0.6;
    spec.x[1] = -0.2;
    const auto m = laplace_ratio(spec);
    std::vector<double> r_ppr, r_dir;
    SeededStream direct(701, d);
    for (uint64_t i = 0; i < 20000; ++i) {
      SeededStream local(702, derive(d, i));
      const auto r = encode_thinned(PprParams(2.0), m.proposal, m.ratio, {703, derive(d, i)}, local);
      r_ppr.push_back(norm_diff(r.z, spec.x));
      r_dir.push_back(norm_diff(laplace_sample_direct(spec, direct), spec.x));
    }
    const auto ks = ks_two_sample(r_ppr, r_dir);
    ok &= check(ks.p_value > kSignificance, "d=%zu eps=%g: PPR vs direct radii KS D=%.5f p=%.4f",
                d, eps, ks.statistic, ks.p_value);
  }
  return ok;
}

// ---- ADN ----

bool adn_dominance() {
  bool ok = true;
  const uint64_t trials = 100000;
  for (std::size_t L : {1, 2}) {
    for (const auto& name : adn_preset_names()) {
      const auto preset = adn_preset(name, 0.05, L);
      const AdnScheme scheme(preset.problem);
      const auto run = scheme.run(trials, 800 + L);
      const auto exact = scheme.bound_total();
      const auto mc = scheme.bound_total(100000, 900 + L);
      const double f = run.failure.mean, sf = run.failure.stderr_;
      ok &= check(f <= mc.value + 3.0 * std::hypot(sf, mc.stderr_) && f <= exact.value + 3.0 * sf,
                  "%-15s L=%zu: failure %.5f (se %.5f) <= bound MC %.5f (se %.5f), exact %.5f",
                  name.c_str(), L, f, sf, mc.value, mc.stderr_, exact.value);
    }
  }
  for (std::size_t L : {1, 2}) {
    const auto relay = adn_preset("relay", 0.05, L);
    const AdnScheme scheme(relay.problem);
    const auto mc = scheme.bound_total(200000, 950 + L);
    ok &= check(std::abs(mc.value - relay.corollary) <= 3.0 * mc.stderr_ + 1e-12,
                "relay L=%zu: generic bound MC %.5f (se %.5f) vs closed form %.5f", L, mc.value,
                mc.stderr_, relay.corollary);
  }
  return ok;
}

// ---- covering ----

bool covering() {
  const double eps = 0.25;
  const auto set = random_channels(100, 2, 2, 1000);
  const auto cover = greedy_cover(set, eps);
  const double bound = covering_bound(2, 2, eps);
  // Independent check of the cover property.
  bool covered = true;
  for (const auto& ch : set) {
    double best = INFINITY;
    for (std::size_t c : cover) best = std::min(best, channel_distance(ch, set[c]));
    covered = covered && best <= eps;
  }
  bool ok = check(cover.size() <= bound, "cover size %zu <= %.4f", cover.size(), bound);
  ok &= check(covered && is_cover(set, cover, eps), "every channel is within %.2f of the cover",
              eps);
  return ok;
}

// ---- secrecy ----

bool secrecy() {
  bool ok = true;
  int hid = 0, wt = 0;
  for (uint64_t i = 0; i < 20; ++i) {
    const auto h = random_hiding_instance(1100 + i);
    const double bound = hiding_bound(h, 0.05);
    const auto r = hiding_run_worst(h, 3000, 1200 + i);
    if (r.failure.mean <= bound + 3.0 * r.failure.stderr_) {
      ++hid;
    } else {
      ok = false;
      check(false, "hiding instance %llu: failure %.5f (se %.5f) bound %.5f",
            static_cast<unsigned long long>(i), r.failure.mean, r.failure.stderr_, bound);
    }
  }
  for (uint64_t i = 0; i < 20; ++i) {
    const auto w = random_wiretap_instance(1300 + i);
    const auto b = wiretap_bound(w);
    const auto r = wiretap_run_worst(w, 2000, 1400 + i);
    const bool good = r.error.mean <= b.error_term + 3.0 * r.error.stderr_ &&
                      r.tv.mean <= b.secrecy_term + 5.0 * r.tv.stderr_ &&
                      r.combined.mean <= b.total + 3.0 * r.combined.stderr_;
    if (good) {
      ++wt;
    } else {
      ok = false;
      check(false, "wiretap instance %llu: error %.5f/%.5f tv %.5f/%.5f total %.5f/%.5f",
            static_cast<unsigned long long>(i), r.error.mean, b.error_term, r.tv.mean,
            b.secrecy_term, r.combined.mean, b.total);
    }
  }
  check(hid == 20, "hiding: %d/20 instances dominated", hid);
  check(wt == 20, "wiretap: %d/20 instances dominated (error, TV, combined)", wt);
  return ok;
}

struct Criterion {
  const char* name;
  double limit_s;
  std::function<bool()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {"ppr_exactness", 120, ppr_exactness},
      {"compression_bound", 300, compression_bound},
      {"conditional_ratio", 60, conditional_ratio},
      {"prefix_codes", 60, prefix_codes},
      {"dme_anchors", 1800, dme_anchors},
      {"laplace", 300, laplace},
      {"adn_dominance", 1200, adn_dominance},
      {"covering", 60, covering},
      {"secrecy_dominance", 900, secrecy},
  };
  int failed = 0;
  for (const auto& c : all) {
    if (argc > 1 && std::none_of(argv + 1, argv + argc, [&](const char* a) {
          return std::string(c.name).find(a) != std::string::npos;
        }))
      continue;
    std::printf("[%s]\n", c.name);
    std::fflush(stdout);
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = false;
    std::string err;
    try {
      ok = c.run();
    } catch (const std::exception& e) {
      err = e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.limit_s;
    if (!in_time) std::printf("  BAD  runtime %.1fs over the %.0fs limit\n", secs, c.limit_s);
    if (!err.empty()) std::printf("  BAD  exception: %s\n", err.c_str());
    ok = ok && in_time;
    failed += !ok;
    std::printf("%s %s (%.1fs)\n", ok ? "PASS" : "FAIL", c.name, secs);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
