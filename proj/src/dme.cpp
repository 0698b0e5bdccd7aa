#include "oneshot/dme.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>

#include <boost/math/special_functions/zeta.hpp>

#include "oneshot/intcodes.hpp"
#include "oneshot/mechanisms.hpp"
#include "oneshot/parallel.hpp"
#include "oneshot/rng.hpp"
#include "oneshot/stats.hpp"

namespace oneshot {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr uint64_t kDataTag = 0xDA7A'0000'0000'0001ull;
constexpr uint64_t kLocalTag = 0x10CA'1000'0000'0001ull;
constexpr uint64_t kServerTag = 0x5E7F'0000'0000'0001ull;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Largest x in (0, hi] with ok(x), assuming ok is monotone (true below some
// threshold). Throws when even tiny x fails.
template <class F>
double largest_ok(double hi, F ok, const char* what) {
  if (ok(hi)) return hi;
  double lo = hi;
  for (int i = 0; i < 60; ++i) {
    lo *= 0.5;
    if (ok(lo)) break;
    if (i == 59) throw std::invalid_argument(std::string(what) + ": infeasible bit budget");
  }
  double top = lo * 2.0;
  for (int i = 0; i < 100 && top - lo > 1e-12 * top; ++i) {
    const double mid = 0.5 * (lo + top);
    (ok(mid) ? lo : top) = mid;
  }
  return lo;
}

// One chunk dimension of the sliced Gaussian mechanism. The ratio reads the
// current chunk through x, so the same objects serve every chunk.
struct ChunkModel {
  std::size_t dim;
  double a, b;
  std::vector<double> x;
  Proposal proposal;
  DensityRatio ratio;

  ChunkModel(std::size_t k, double a_, double b_) : dim(k), a(a_), b(b_), x(k) {
    const double sd_q = std::sqrt(b);
    proposal.dim = k;
    proposal.sample = [sd_q](SeededStream& s, std::span<double> out) {
      for (double& v : out) v = sd_q * s.normal();
    };
    ratio.ratio_fn = [this](std::span<const double> z) {
      return std::exp(gaussian_log_ratio(z, x, a, b));
    };
  }
  ChunkModel(const ChunkModel&) = delete;
  ChunkModel& operator=(const ChunkModel&) = delete;

  void set(std::span<const double> chunk) {
    std::copy(chunk.begin(), chunk.end(), x.begin());
    ratio.r_star = std::exp(gaussian_log_r_star(x, a, b)) * (1.0 + 1e-12);
  }
};

// Zipf-Shannon length with log2 zeta(lambda) cached for the last lambda.
class ZipfCoster {
 public:
  std::size_t length(uint64_t k, double lambda) {
    if (lambda != lambda_) {
      lambda_ = lambda;
      log2_zeta_ = std::log2(boost::math::zeta(lambda));
    }
    return static_cast<std::size_t>(
        std::ceil(lambda * std::log2(static_cast<double>(k)) + log2_zeta_ - 1e-12));
  }

 private:
  double lambda_ = 0.0;
  double log2_zeta_ = 0.0;
};

struct ClientResult {
  std::vector<double> z;
  double bits = 0.0;
  double points = 0.0;
  double points_max = 0.0;
};

double sigma_for(const DmeConfig& cfg, double eps) {
  return gaussian_sigma_rdp(cfg.C, eps, cfg.delta).sigma;
}

double ppr_bound_bits(const DmeConfig& cfg, double sigma) {
  return total_budget_bits(gaussian_ppr_ell(cfg.C, cfg.n, cfg.d, sigma, cfg.alpha));
}

std::vector<double> column_mean(const std::vector<std::vector<double>>& rows) {
  std::vector<double> m(rows[0].size(), 0.0);
  for (const auto& r : rows)
    for (std::size_t j = 0; j < r.size(); ++j) m[j] += r[j];
  for (double& v : m) v /= static_cast<double>(rows.size());
  return m;
}

double sq_dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
  return s;
}

}  // namespace

std::string to_string(DmeMechanism m) {
  switch (m) {
    case DmeMechanism::ppr_gaussian: return "ppr_gaussian";
    case DmeMechanism::csgm: return "csgm";
    case DmeMechanism::discrete_laplace: return "discrete_laplace";
    case DmeMechanism::ppr_laplace: return "ppr_laplace";
  }
  return "unknown";
}

DmeMechanism parse_mechanism(const std::string& name) {
  if (name == "ppr_gaussian") return DmeMechanism::ppr_gaussian;
  if (name == "csgm") return DmeMechanism::csgm;
  if (name == "discrete_laplace") return DmeMechanism::discrete_laplace;
  if (name == "ppr_laplace") return DmeMechanism::ppr_laplace;
  throw std::invalid_argument("unknown mechanism: " + name);
}

void validate(const DmeConfig& c) {
  if (c.n == 0 || c.d == 0) throw std::invalid_argument("dme: n and d must be >= 1");
  if (!(c.C > 0.0)) throw std::invalid_argument("dme: C must be > 0");
  if (!(c.eps > 0.0)) throw std::invalid_argument("dme: eps must be > 0");
  if (!(c.delta > 0.0 && c.delta < 1.0)) throw std::invalid_argument("dme: delta must lie in (0,1)");
  if (!(c.alpha > 1.0)) throw std::invalid_argument("dme: alpha must be > 1");
  if (c.chunk_dim < 1 || c.chunk_dim > c.d)
    throw std::invalid_argument("dme: chunk_dim must lie in [1, d]");
  if (!(c.bit_budget >= 1.0)) throw std::invalid_argument("dme: bit_budget must be >= 1");
  if (c.trials == 0) throw std::invalid_argument("dme: trials must be >= 1");
}

std::vector<std::vector<double>> gen_clients(std::size_t n, std::size_t d, uint64_t seed) {
  std::vector<std::vector<double>> x(n, std::vector<double>(d));
  for (std::size_t i = 0; i < n; ++i) {
    SeededStream s(seed, derive(kDataTag, i));
    for (double& v : x[i]) v = s.uniform() < 0.8 ? 1.0 : -1.0;
  }
  return x;
}

double largest_feasible_eps(const DmeConfig& cfg) {
  validate(cfg);
  if (std::isinf(cfg.bit_budget)) return cfg.eps;
  return largest_ok(
      cfg.eps,
      [&](double e) { return ppr_bound_bits(cfg, sigma_for(cfg, e)) <= cfg.bit_budget; },
      "dme");
}

TrialReport run_ppr_dme(const DmeConfig& cfg) {
  validate(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  TrialReport rep;
  rep.mechanism = to_string(DmeMechanism::ppr_gaussian);
  rep.trials = cfg.trials;
  rep.eps_used = largest_feasible_eps(cfg);
  rep.sigma = sigma_for(cfg, rep.eps_used);
  rep.bits_bound = ppr_bound_bits(cfg, rep.sigma);
  const PrivacyReport priv =
      gaussian_ppr_privacy(cfg.C, cfg.n, rep.sigma, rep.eps_used, cfg.delta, cfg.alpha);
  rep.central = priv.central;
  rep.local = priv.local;
  rep.local_route = priv.local_route;
  const double n = static_cast<double>(cfg.n), d = static_cast<double>(cfg.d);
  rep.mse_theory = rep.sigma * rep.sigma * d / (n * n);

  const double a = rep.sigma * rep.sigma / n;
  const double b = a + cfg.C * cfg.C / d;
  const double scale = cfg.C / std::sqrt(d);
  const PprParams params(cfg.alpha);
  const std::size_t chunks = (cfg.d + cfg.chunk_dim - 1) / cfg.chunk_dim;
  const uint64_t local_seed = mix64(cfg.seed ^ kLocalTag);
  // Both log K bounds are D + const(alpha); the refined constant needs a
  // numeric minimization, so evaluate it once.
  const double logk_offset = expected_logk_bound(cfg.alpha, 0.0);

  RunningStats mse, bits, points;
  double points_max = 0.0;
  std::vector<ClientResult> clients(cfg.n);
  for (uint64_t t = 0; t < cfg.trials; ++t) {
    auto data = gen_clients(cfg.n, cfg.d, derive(cfg.seed, t));
    for (auto& row : data)
      for (double& v : row) v *= scale;
    const auto truth = column_mean(data);

    constexpr std::size_t kClientsPerBlock = 16;
    const std::size_t blocks = (cfg.n + kClientsPerBlock - 1) / kClientsPerBlock;
    parallel_blocks(blocks, [&](std::size_t blk) {
      ChunkModel full(cfg.chunk_dim, a, b);
      std::unique_ptr<ChunkModel> tail;
      if (cfg.d % cfg.chunk_dim != 0)
        tail = std::make_unique<ChunkModel>(cfg.d % cfg.chunk_dim, a, b);
      ZipfCoster coster;
      const std::size_t lo = blk * kClientsPerBlock;
      const std::size_t hi = std::min(cfg.n, lo + kClientsPerBlock);
      for (std::size_t i = lo; i < hi; ++i) {
        ClientResult& res = clients[i];
        res = ClientResult{};
        res.z.assign(cfg.d, 0.0);
        for (std::size_t c = 0; c < chunks; ++c) {
          const std::size_t off = c * cfg.chunk_dim;
          const std::size_t k = std::min(cfg.chunk_dim, cfg.d - off);
          ChunkModel& m = k == cfg.chunk_dim ? full : *tail;
          m.set(std::span<const double>(data[i].data() + off, k));
          const SharedSeed shared{cfg.seed, derive(t, i, c)};
          SeededStream local(local_seed, derive(t, i, c));
          const EncodeResult enc = encode_thinned(params, m.proposal, m.ratio, shared, local);
          // The server only sees k; rebuild the sample from the shared stream.
          decode_into(m.proposal, enc.k, shared,
                      std::span<double>(res.z.data() + off, k));
          const double kl_bits = gaussian_kl_nats(m.x, a, b) / std::numbers::ln2;
          const double e_log = kl_bits + logk_offset;
          res.bits += static_cast<double>(coster.length(enc.k, choose_lambda(e_log)));
          const double pts = static_cast<double>(enc.points_examined);
          res.points += pts;
          res.points_max = std::max(res.points_max, pts);
        }
      }
    });

    std::vector<double> est(cfg.d, 0.0);
    for (const auto& cr : clients) {
      for (std::size_t j = 0; j < cfg.d; ++j) est[j] += cr.z[j];
      bits.add(cr.bits);
      points.add(cr.points / static_cast<double>(chunks));
      points_max = std::max(points_max, cr.points_max);
    }
    for (double& v : est) v /= n;
    mse.add(sq_dist(est, truth));
  }
  rep.mse = mse.mean();
  rep.mse_stderr = mse.stderr_();
  rep.bits_mean = bits.mean();
  rep.points_mean = points.mean();
  rep.points_max = points_max;
  rep.wall_time = seconds_since(t0);
  return rep;
}

TrialReport run_csgm_dme(const DmeConfig& cfg) {
  validate(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  const double d = static_cast<double>(cfg.d);
  CsgmParams p;
  p.eps = cfg.eps;
  p.delta = cfg.delta;
  p.bits = std::isinf(cfg.bit_budget) ? d : std::min(cfg.bit_budget, d);
  p.n = cfg.n;
  p.d = cfg.d;
  p.coord_bound = cfg.C / std::sqrt(d);
  const CsgmCalibration cal = csgm_calibrate(p);

  TrialReport rep;
  rep.mechanism = to_string(DmeMechanism::csgm);
  rep.trials = cfg.trials;
  rep.eps_used = cfg.eps;
  rep.sigma = cal.sigma;
  rep.central = {cal.eps_dp, cfg.delta};
  rep.local = {kNaN, kNaN};
  rep.local_route = "none";
  rep.mse_theory = csgm_mse_formula(cal);
  rep.bits_bound = p.bits;

  RunningStats mse, bits;
  std::vector<CsgmMessage> msgs(cfg.n);
  for (uint64_t t = 0; t < cfg.trials; ++t) {
    auto data = gen_clients(cfg.n, cfg.d, derive(cfg.seed, t));
    for (auto& row : data)
      for (double& v : row) v *= p.coord_bound;
    const auto truth = column_mean(data);
    for (std::size_t i = 0; i < cfg.n; ++i) {
      SeededStream s(cfg.seed, derive(t, i, kLocalTag));
      msgs[i] = csgm_encode(data[i], cal, s);
      bits.add(static_cast<double>(msgs[i].bits()));
    }
    SeededStream server(cfg.seed, derive(t, kServerTag));
    const auto est = csgm_estimate(msgs, cal, server);
    mse.add(sq_dist(est, truth));
  }
  rep.mse = mse.mean();
  rep.mse_stderr = mse.stderr_();
  rep.bits_mean = bits.mean();
  rep.wall_time = seconds_since(t0);
  return rep;
}

TrialReport run_dme(const DmeConfig& cfg) {
  switch (cfg.mechanism) {
    case DmeMechanism::ppr_gaussian: return run_ppr_dme(cfg);
    case DmeMechanism::csgm: return run_csgm_dme(cfg);
    default:
      throw std::invalid_argument("dme: mechanism must be ppr_gaussian or csgm");
  }
}

void validate(const MetricConfig& c) {
  if (c.d == 0) throw std::invalid_argument("metric: d must be >= 1");
  if (!(c.C > 0.0)) throw std::invalid_argument("metric: C must be > 0");
  if (!(c.eps > 0.0)) throw std::invalid_argument("metric: eps must be > 0");
  if (!(c.alpha > 1.0)) throw std::invalid_argument("metric: alpha must be > 1");
  if (!(c.bits >= 1.0)) throw std::invalid_argument("metric: bits must be >= 1");
  if (!(c.x_radius >= 0.0 && c.x_radius <= 1.0))
    throw std::invalid_argument("metric: x_radius must lie in [0,1]");
  if (c.trials == 0) throw std::invalid_argument("metric: trials must be >= 1");
}

std::pair<TrialReport, TrialReport> run_metric_experiment(const MetricConfig& cfg) {
  validate(cfg);
  const double d = static_cast<double>(cfg.d);

  auto t0 = std::chrono::steady_clock::now();
  TrialReport ppr;
  ppr.mechanism = to_string(DmeMechanism::ppr_laplace);
  ppr.trials = 0;
  ppr.eps_used = largest_ok(
      cfg.eps,
      [&](double e) {
        return total_budget_bits(laplace_ppr_ell(cfg.C, e, cfg.d, cfg.alpha)) <= cfg.bits;
      },
      "metric");
  ppr.bits_bound = total_budget_bits(laplace_ppr_ell(cfg.C, ppr.eps_used, cfg.d, cfg.alpha));
  ppr.bits_mean = ppr.bits_bound;
  ppr.mse = ppr.mse_theory = d * (d + 1.0) / (ppr.eps_used * ppr.eps_used);
  ppr.metric_coefficient = metric_coefficient(cfg.alpha) * ppr.eps_used;
  ppr.central = {kNaN, kNaN};
  ppr.local = {kNaN, kNaN};
  ppr.local_route = "metric";
  ppr.wall_time = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  TrialReport disc;
  disc.mechanism = to_string(DmeMechanism::discrete_laplace);
  disc.trials = cfg.trials;
  disc.eps_used = cfg.eps;
  disc.metric_coefficient = cfg.eps;
  disc.central = {kNaN, kNaN};
  disc.local = {kNaN, kNaN};
  disc.local_route = "metric";
  disc.mse_theory = kNaN;

  SeededStream xs(cfg.seed, derive(kDataTag, 0));
  auto x = xs.sphere_uniform(cfg.d);
  for (double& v : x) v *= cfg.x_radius * cfg.C;
  std::vector<double> dir(cfg.d, 0.0);
  if (cfg.x_radius > 0.0)
    for (std::size_t j = 0; j < cfg.d; ++j) dir[j] = x[j] / (cfg.x_radius * cfg.C);

  RunningStats mse, bias, bits;
  for (uint64_t t = 0; t < cfg.trials; ++t) {
    SeededStream s(cfg.seed, derive(t, kLocalTag));
    const auto r = discrete_laplace_baseline(x, cfg.eps, cfg.C, cfg.bits, s);
    mse.add(sq_dist(r.z, x));
    double proj = 0.0;
    for (std::size_t j = 0; j < cfg.d; ++j) proj += (r.z[j] - x[j]) * dir[j];
    bias.add(proj);
    bits.add(static_cast<double>(r.bits));
  }
  disc.mse = mse.mean();
  disc.mse_stderr = mse.stderr_();
  disc.bias = bias.mean();
  disc.bits_mean = bits.mean();
  disc.bits_bound = cfg.bits;
  disc.wall_time = seconds_since(t0);
  return {ppr, disc};
}

PprBenchRow ppr_bench(const DmeConfig& cfg, uint64_t reps) {
  validate(cfg);
  if (reps == 0) throw std::invalid_argument("ppr_bench: reps must be >= 1");
  const double n = static_cast<double>(cfg.n), d = static_cast<double>(cfg.d);
  const double sigma = sigma_for(cfg, cfg.eps);
  const double a = sigma * sigma / n;
  const double b = a + cfg.C * cfg.C / d;
  ChunkModel m(cfg.chunk_dim, a, b);
  std::vector<double> chunk(cfg.chunk_dim, cfg.C / std::sqrt(d));
  m.set(chunk);
  const PprParams params(cfg.alpha);
  RunningStats time, pts;
  const uint64_t local_seed = mix64(cfg.seed ^ kLocalTag);
  for (uint64_t r = 0; r < reps; ++r) {
    const SharedSeed shared{cfg.seed, derive(kDataTag, r)};
    SeededStream local(local_seed, r);
    const EncodeResult e = encode(params, m.proposal, m.ratio, shared, local);
    time.add(e.wall_time);
    pts.add(static_cast<double>(e.points_examined));
  }
  PprBenchRow row;
  row.eps = cfg.eps;
  row.chunk_dim = cfg.chunk_dim;
  row.alpha = cfg.alpha;
  row.reps = reps;
  row.time_mean = time.mean();
  row.time_stderr = time.stderr_();
  row.points_mean = pts.mean();
  row.log2_r_star = gaussian_log_r_star(m.x, a, b) / std::numbers::ln2;
  return row;
}

}  // namespace oneshot
