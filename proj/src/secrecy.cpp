#include "oneshot/secrecy.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

#include "oneshot/parallel.hpp"
#include "oneshot/pfr.hpp"
#include "oneshot/rng.hpp"

namespace oneshot {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

void check_row(const std::vector<double>& r, std::size_t n, const std::string& what) {
  require(r.size() == n, what + ": wrong row length");
  double s = 0.0;
  for (double v : r) {
    require(v >= 0.0 && std::isfinite(v), what + ": bad entry");
    s += v;
  }
  require(std::abs(s - 1.0) <= 1e-12 * static_cast<double>(n) + 1e-12,
          what + ": row does not sum to 1");
}

void check_channel(const Channel& c, std::size_t nx, std::size_t ny, const std::string& what) {
  require(c.size() == nx, what + ": wrong number of inputs");
  for (const auto& r : c) check_row(r, ny, what);
}

std::size_t out_size(const Channel& c, const std::string& what) {
  require(!c.empty() && !c[0].empty(), what + ": empty channel");
  return c[0].size();
}

std::vector<double> dirichlet1(SeededStream& s, std::size_t n) {
  std::vector<double> r(n);
  double t = 0.0;
  for (double& v : r) t += (v = s.exp());
  for (double& v : r) v /= t;
  return r;
}

Channel bsc(double p) { return {{1.0 - p, p}, {p, 1.0 - p}}; }

std::size_t sample(const std::vector<double>& p, double u) {
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    acc += p[i];
    if (u < acc) return i;
  }
  for (std::size_t i = p.size(); i-- > 0;)
    if (p[i] > 0.0) return i;
  return 0;
}

template <class F>
MeanStderr over_codebooks(uint64_t trials, F&& per_trial) {
  if (trials == 0) throw std::invalid_argument("trials must be > 0");
  constexpr uint64_t kBlock = 256;
  const std::size_t blocks = (trials + kBlock - 1) / kBlock;
  std::vector<RunningStats> acc(blocks);
  parallel_blocks(blocks, [&](std::size_t b) {
    const uint64_t lo = b * kBlock, hi = std::min(trials, lo + kBlock);
    for (uint64_t t = lo; t < hi; ++t) acc[b].add(per_trial(t));
  });
  RunningStats all;
  for (const auto& a : acc) all.merge(a);
  return {all.mean(), all.stderr_()};
}

constexpr uint64_t kHidingTag = 0x41D1'0000'0000'0001ull;
constexpr uint64_t kWiretapTag = 0x3171'0000'0000'0001ull;

}  // namespace

double covering_bound(std::size_t size_x, std::size_t size_y, double eps) {
  require(size_x >= 1 && size_y >= 1, "covering_bound: alphabets must be nonempty");
  require(eps > 0.0, "covering_bound: eps must be > 0");
  const double base = 1.0 / (2.0 * eps) + (static_cast<double>(size_y) + 1.0) / 2.0;
  return std::pow(base, static_cast<double>(size_x * size_y));
}

double channel_distance(const Channel& a, const Channel& b) {
  require(a.size() == b.size(), "channel_distance: input alphabets differ");
  double worst = 0.0;
  for (std::size_t x = 0; x < a.size(); ++x) {
    require(a[x].size() == b[x].size(), "channel_distance: output alphabets differ");
    double tv = 0.0;
    for (std::size_t y = 0; y < a[x].size(); ++y) tv += std::abs(a[x][y] - b[x][y]);
    worst = std::max(worst, 0.5 * tv);
  }
  return worst;
}

std::vector<std::size_t> greedy_cover(const ChannelSet& set, double eps) {
  require(!set.empty(), "greedy_cover: empty set");
  require(eps >= 0.0, "greedy_cover: eps must be >= 0");
  std::vector<std::size_t> chosen;
  for (std::size_t i = 0; i < set.size(); ++i) {
    bool covered = false;
    for (std::size_t c : chosen)
      if (channel_distance(set[i], set[c]) <= eps) {
        covered = true;
        break;
      }
    if (!covered) chosen.push_back(i);
  }
  return chosen;
}

bool is_cover(const ChannelSet& set, const std::vector<std::size_t>& chosen, double eps) {
  for (const auto& a : set) {
    bool ok = false;
    for (std::size_t c : chosen)
      if (c < set.size() && channel_distance(a, set[c]) <= eps) {
        ok = true;
        break;
      }
    if (!ok) return false;
  }
  return true;
}

ChannelSet random_channels(std::size_t n, std::size_t size_x, std::size_t size_y,
                           uint64_t seed) {
  require(size_x >= 1 && size_y >= 1, "random_channels: alphabets must be nonempty");
  SeededStream s(seed, derive(0xC4A7ull, n));
  ChannelSet out(n);
  for (auto& ch : out) {
    ch.resize(size_x);
    for (auto& row : ch) row = dirichlet1(s, size_y);
  }
  return out;
}

// ---------------- hiding ----------------

void validate(const HidingSpec& h) {
  require(!h.p_s.empty() && !h.p_s[0].empty(), "hiding: P_{Se,Sd} empty");
  const std::size_t nse = h.p_s.size(), nsd = h.p_s[0].size();
  double tot = 0.0;
  for (const auto& r : h.p_s) {
    require(r.size() == nsd, "hiding: ragged P_{Se,Sd}");
    for (double v : r) {
      require(v >= 0.0, "hiding: negative mass");
      tot += v;
    }
  }
  require(std::abs(tot - 1.0) <= 1e-12, "hiding: P_{Se,Sd} does not sum to 1");
  require(h.u_size >= 1 && h.x_size >= 1, "hiding: empty U or X");
  require(h.p_ux_given_se.size() == nse, "hiding: P_{U,X|Se} rows must be |Se|");
  for (const auto& r : h.p_ux_given_se) check_row(r, h.u_size * h.x_size, "hiding: P_{U,X|Se}");
  const std::size_t ny = out_size(h.a_hat, "hiding: reference channel");
  check_channel(h.a_hat, h.x_size, ny, "hiding: reference channel");
  require(!h.attacks.empty(), "hiding: empty attack set");
  for (const auto& a : h.attacks) check_channel(a, h.x_size, ny, "hiding: attack channel");
  require(h.L >= 1, "hiding: L must be >= 1");
  require(h.d1.size() == nse, "hiding: d1 rows must be |Se|");
  for (const auto& r : h.d1) require(r.size() == h.x_size, "hiding: d1 width must be |X|");
  require(h.d2.size() == h.x_size, "hiding: d2 rows must be |X|");
  for (const auto& r : h.d2) require(r.size() == h.x_size, "hiding: d2 width must be |X|");
  require(h.xhat.size() == h.L, "hiding: xhat rows must be L");
  for (const auto& r : h.xhat) {
    require(r.size() == ny, "hiding: xhat width must be |Y|");
    for (std::size_t v : r) require(v < h.x_size, "hiding: xhat value out of range");
  }
}

namespace {

struct HidingModel {
  const HidingSpec& h;
  std::size_t nse, nsd, nu, nx, ny, L;
  std::vector<double> p_u;                 // marginal of U
  std::vector<double> p_u_given_se;        // [se * nu + u]
  std::vector<double> post;                // Phat(u | y, sd), [(y * nsd + sd) * nu + u]
  std::vector<char> post_zero;             // (y, sd) with no reference mass

  explicit HidingModel(const HidingSpec& spec) : h(spec) {
    validate(spec);
    nse = h.p_s.size();
    nsd = h.p_s[0].size();
    nu = h.u_size;
    nx = h.x_size;
    ny = h.a_hat[0].size();
    L = h.L;
    p_u_given_se.assign(nse * nu, 0.0);
    p_u.assign(nu, 0.0);
    for (std::size_t se = 0; se < nse; ++se) {
      double pse = 0.0;
      for (double v : h.p_s[se]) pse += v;
      for (std::size_t u = 0; u < nu; ++u) {
        double s = 0.0;
        for (std::size_t x = 0; x < nx; ++x) s += h.p_ux_given_se[se][u * nx + x];
        p_u_given_se[se * nu + u] = s;
        p_u[u] += pse * s;
      }
    }
    post.assign(ny * nsd * nu, 0.0);
    post_zero.assign(ny * nsd, 0);
    for (std::size_t se = 0; se < nse; ++se)
      for (std::size_t sd = 0; sd < nsd; ++sd)
        for (std::size_t u = 0; u < nu; ++u)
          for (std::size_t x = 0; x < nx; ++x)
            for (std::size_t y = 0; y < ny; ++y)
              post[(y * nsd + sd) * nu + u] +=
                  h.p_s[se][sd] * h.p_ux_given_se[se][u * nx + x] * h.a_hat[x][y];
    for (std::size_t k = 0; k < ny * nsd; ++k) {
      double s = 0.0;
      for (std::size_t u = 0; u < nu; ++u) s += post[k * nu + u];
      if (s > 0.0) {
        for (std::size_t u = 0; u < nu; ++u) post[k * nu + u] /= s;
      } else {
        post_zero[k] = 1;
        for (std::size_t u = 0; u < nu; ++u) post[k * nu + u] = 1.0 / static_cast<double>(nu);
      }
    }
  }

  // One codebook: exponential marks over U x [L]. Returns the encoder map
  // u(se, m) and decoder map m(y, sd).
  void codebook(uint64_t seed, uint64_t trial, std::vector<std::size_t>& enc,
                std::vector<std::size_t>& dec) const {
    SeededStream s(seed, derive(trial, kHidingTag));
    std::vector<double> marks(nu * L);
    for (double& z : marks) z = s.exp();
    std::vector<double> col(nu), w(nu * L);
    std::vector<double> mk(nu);
    enc.assign(nse * L, 0);
    for (std::size_t se = 0; se < nse; ++se)
      for (std::size_t m = 0; m < L; ++m) {
        for (std::size_t u = 0; u < nu; ++u) {
          mk[u] = marks[u * L + m];
          col[u] = p_u_given_se[se * nu + u];
        }
        enc[se * L + m] = efr_argmin(mk, col);
      }
    dec.assign(ny * nsd, 0);
    for (std::size_t k = 0; k < ny * nsd; ++k) {
      for (std::size_t u = 0; u < nu; ++u)
        for (std::size_t m = 0; m < L; ++m) w[u * L + m] = post[k * nu + u];
      dec[k] = efr_argmin(marks, w) % L;
    }
  }

  double failure(const std::vector<std::size_t>& enc, const std::vector<std::size_t>& dec,
                 const Channel& a) const {
    double fail = 0.0;
    const double inv_l = 1.0 / static_cast<double>(L);
    for (std::size_t se = 0; se < nse; ++se)
      for (std::size_t sd = 0; sd < nsd; ++sd) {
        const double ps = h.p_s[se][sd];
        if (ps <= 0.0) continue;
        for (std::size_t m = 0; m < L; ++m) {
          const std::size_t u = enc[se * L + m];
          const double pu = p_u_given_se[se * nu + u];
          for (std::size_t x = 0; x < nx; ++x) {
            const double px = h.p_ux_given_se[se][u * nx + x] / pu;
            if (px <= 0.0) continue;
            const bool bad1 = h.d1[se][x] > h.D1;
            for (std::size_t y = 0; y < ny; ++y) {
              const double p = ps * inv_l * px * a[x][y];
              if (p <= 0.0) continue;
              const std::size_t mh = dec[y * nsd + sd];
              const bool bad = bad1 || mh != m || h.d2[x][h.xhat[mh][y]] > h.D2;
              if (bad) fail += p;
            }
          }
        }
      }
    return fail;
  }

  uint64_t zero_inputs() const {
    uint64_t n = 0;
    for (char z : post_zero) n += z;
    return n;
  }
};

}  // namespace

HidingRun hiding_run(const HidingSpec& spec, std::size_t attack_index, uint64_t trials,
                     uint64_t seed) {
  HidingModel M(spec);
  require(attack_index < spec.attacks.size(), "hiding_run: attack index out of range");
  HidingRun r;
  r.failure = over_codebooks(trials, [&](uint64_t t) {
    std::vector<std::size_t> enc, dec;
    M.codebook(seed, t, enc, dec);
    return M.failure(enc, dec, spec.attacks[attack_index]);
  });
  r.zero_mass_inputs = M.zero_inputs();
  return r;
}

HidingRun hiding_run_worst(const HidingSpec& spec, uint64_t trials, uint64_t seed) {
  HidingModel M(spec);
  HidingRun r;
  r.failure = over_codebooks(trials, [&](uint64_t t) {
    std::vector<std::size_t> enc, dec;
    M.codebook(seed, t, enc, dec);
    double worst = 0.0;
    for (const auto& a : spec.attacks) worst = std::max(worst, M.failure(enc, dec, a));
    return worst;
  });
  r.zero_mass_inputs = M.zero_inputs();
  return r;
}

double hiding_expectation(const HidingSpec& spec, const Channel& attack) {
  HidingModel M(spec);
  check_channel(attack, M.nx, M.ny, "hiding: attack channel");
  const auto& h = spec;
  double total = 0.0;
  for (std::size_t se = 0; se < M.nse; ++se)
    for (std::size_t sd = 0; sd < M.nsd; ++sd) {
      const double ps = h.p_s[se][sd];
      if (ps <= 0.0) continue;
      for (std::size_t u = 0; u < M.nu; ++u)
        for (std::size_t x = 0; x < M.nx; ++x) {
          const double pux = h.p_ux_given_se[se][u * M.nx + x];
          if (pux <= 0.0) continue;
          for (std::size_t y = 0; y < M.ny; ++y) {
            const double p = ps * pux * attack[x][y];
            if (p <= 0.0) continue;
            double keep = 0.0;
            if (h.d1[se][x] <= h.D1) {
              double ok2 = 0.0;
              for (std::size_t m = 0; m < M.L; ++m) ok2 += h.d2[x][h.xhat[m][y]] <= h.D2;
              ok2 /= static_cast<double>(M.L);
              const std::size_t k = y * M.nsd + sd;
              const double ph = M.post_zero[k] ? 0.0 : M.post[k * M.nu + u];
              if (ph > 0.0) {
                const double ratio =
                    static_cast<double>(M.L) * M.p_u_given_se[se * M.nu + u] / ph;
                keep = ok2 / (1.0 + ratio);
              }
            }
            total += p * (1.0 - keep);
          }
        }
    }
  return total;
}

double hiding_bound(const HidingSpec& spec, double eps) {
  validate(spec);
  const auto cover = greedy_cover(spec.attacks, eps);
  double worst = 0.0;
  for (const auto& a : spec.attacks) worst = std::max(worst, hiding_expectation(spec, a));
  return static_cast<double>(cover.size()) * worst + eps;
}

// ---------------- wiretap ----------------

void validate(const WiretapSpec& w) {
  require(!w.p_ux.empty() && !w.p_ux[0].empty(), "wiretap: P_{U,X} empty");
  const std::size_t nx = w.p_ux[0].size();
  double tot = 0.0;
  for (const auto& r : w.p_ux) {
    require(r.size() == nx, "wiretap: ragged P_{U,X}");
    for (double v : r) {
      require(v >= 0.0, "wiretap: negative mass");
      tot += v;
    }
  }
  require(std::abs(tot - 1.0) <= 1e-12, "wiretap: P_{U,X} does not sum to 1");
  for (const auto& r : w.p_ux) {
    double s = 0.0;
    for (double v : r) s += v;
    require(s > 0.0, "wiretap: U symbol with zero mass");
  }
  const std::size_t ny = out_size(w.y_hat, "wiretap: reference legit channel");
  const std::size_t nz = out_size(w.z_hat, "wiretap: reference eavesdropper channel");
  check_channel(w.y_hat, nx, ny, "wiretap: reference legit channel");
  check_channel(w.z_hat, nx, nz, "wiretap: reference eavesdropper channel");
  require(!w.legit.empty() && !w.eaves.empty(), "wiretap: empty channel set");
  for (const auto& c : w.legit) check_channel(c, nx, ny, "wiretap: legit channel");
  for (const auto& c : w.eaves) check_channel(c, nx, nz, "wiretap: eavesdropper channel");
  require(w.L >= 1, "wiretap: L must be >= 1");
  require(w.A >= 1 && w.B >= 1, "wiretap: A and B must be >= 1");
  require(w.nu >= 0.0, "wiretap: nu must be >= 0");
  require(w.eps1 >= 0.0 && w.eps2 >= 0.0, "wiretap: cover radii must be >= 0");
  require(w.L * nz <= kWiretapTableCap, "wiretap: L * |Z| exceeds the table cap");
}

namespace {

struct WiretapModel {
  const WiretapSpec& w;
  std::size_t nu, nx, ny, nz, L, A;
  std::vector<double> p_u;
  std::vector<double> p_x_given_u;  // [u * nx + x]
  std::vector<double> post_y;       // Phat(u | y), [y * nu + u]

  explicit WiretapModel(const WiretapSpec& spec) : w(spec) {
    validate(spec);
    nu = w.p_ux.size();
    nx = w.p_ux[0].size();
    ny = w.y_hat[0].size();
    nz = w.z_hat[0].size();
    L = w.L;
    A = w.A;
    p_u.assign(nu, 0.0);
    p_x_given_u.assign(nu * nx, 0.0);
    for (std::size_t u = 0; u < nu; ++u) {
      for (double v : w.p_ux[u]) p_u[u] += v;
      for (std::size_t x = 0; x < nx; ++x) p_x_given_u[u * nx + x] = w.p_ux[u][x] / p_u[u];
    }
    post_y = posterior(w.y_hat, ny);
  }

  std::vector<double> posterior(const Channel& ref, std::size_t n) const {
    std::vector<double> post(n * nu, 0.0);
    for (std::size_t u = 0; u < nu; ++u)
      for (std::size_t x = 0; x < nx; ++x)
        for (std::size_t y = 0; y < n; ++y) post[y * nu + u] += w.p_ux[u][x] * ref[x][y];
    for (std::size_t y = 0; y < n; ++y) {
      double s = 0.0;
      for (std::size_t u = 0; u < nu; ++u) s += post[y * nu + u];
      for (std::size_t u = 0; u < nu; ++u)
        post[y * nu + u] = s > 0.0 ? post[y * nu + u] / s : 0.0;
    }
    return post;
  }

  // The codebook restricted to what the scheme reads: for every message m
  // the first A points of its class (their U values, in time order) and the
  // first arrival time of every (u, m) type.
  struct Book {
    std::vector<std::size_t> cand;  // [m * A + a]
    std::vector<double> first;      // [u * L + m]
  };

  Book codebook(uint64_t seed, uint64_t trial) const {
    SeededStream s(seed, derive(trial, kWiretapTag));
    Book b;
    b.cand.assign(L * A, 0);
    b.first.assign(nu * L, INFINITY);
    std::size_t support = 0;
    for (double p : p_u) support += p > 0.0;
    constexpr uint64_t kMaxPoints = uint64_t{1} << 24;
    for (std::size_t m = 0; m < L; ++m) {
      double t = 0.0;
      std::size_t seen = 0;
      for (uint64_t k = 0; k < A || seen < support; ++k) {
        if (k >= kMaxPoints) throw std::runtime_error("wiretap: codebook generation ran away");
        // Class m is a Poisson process of rate 1/L.
        t += s.exp() * static_cast<double>(L);
        const std::size_t u = sample(p_u, s.uniform());
        if (k < A) b.cand[m * A + k] = u;
        if (std::isinf(b.first[u * L + m])) {
          b.first[u * L + m] = t;
          ++seen;
        }
      }
    }
    return b;
  }

  // argmin over (u, m) of T_first(u, m) * P_U(u) / Phat(u | y); returns m.
  std::size_t decode(const Book& b, std::size_t y) const {
    double best = INFINITY;
    std::size_t arg_m = 0, arg_u = 0;
    bool any = false;
    for (std::size_t u = 0; u < nu; ++u) {
      const double ph = post_y[y * nu + u];
      if (ph <= 0.0) continue;
      for (std::size_t m = 0; m < L; ++m) {
        const double v = b.first[u * L + m] * p_u[u] / ph;
        if (!any || v < best || (v == best && u * L + m < arg_u * L + arg_m)) {
          best = v;
          arg_m = m;
          arg_u = u;
          any = true;
        }
      }
    }
    if (!any) {
      // No reference mass at y: fall back to the first point in time.
      for (std::size_t u = 0; u < nu; ++u)
        for (std::size_t m = 0; m < L; ++m)
          if (!any || b.first[u * L + m] < best) {
            best = b.first[u * L + m];
            arg_m = m;
            any = true;
          }
    }
    return arg_m;
  }

  double error(const Book& b, const Channel& ch) const {
    std::vector<std::size_t> dec(ny);
    for (std::size_t y = 0; y < ny; ++y) dec[y] = decode(b, y);
    const double scale = 1.0 / static_cast<double>(L * A);
    double e = 0.0;
    for (std::size_t m = 0; m < L; ++m)
      for (std::size_t a = 0; a < A; ++a) {
        const std::size_t u = b.cand[m * A + a];
        for (std::size_t x = 0; x < nx; ++x) {
          const double px = p_x_given_u[u * nx + x];
          if (px <= 0.0) continue;
          for (std::size_t y = 0; y < ny; ++y)
            if (dec[y] != m) e += scale * px * ch[x][y];
        }
      }
    return e;
  }

  double tv(const Book& b, const Channel& ch) const {
    std::vector<double> pz_m(L * nz, 0.0), pz(nz, 0.0);
    const double inv_a = 1.0 / static_cast<double>(A);
    for (std::size_t m = 0; m < L; ++m)
      for (std::size_t a = 0; a < A; ++a) {
        const std::size_t u = b.cand[m * A + a];
        for (std::size_t x = 0; x < nx; ++x) {
          const double px = p_x_given_u[u * nx + x];
          if (px <= 0.0) continue;
          for (std::size_t z = 0; z < nz; ++z) pz_m[m * nz + z] += inv_a * px * ch[x][z];
        }
      }
    for (std::size_t m = 0; m < L; ++m)
      for (std::size_t z = 0; z < nz; ++z) pz[z] += pz_m[m * nz + z] / static_cast<double>(L);
    double d = 0.0;
    for (std::size_t m = 0; m < L; ++m)
      for (std::size_t z = 0; z < nz; ++z) d += std::abs(pz_m[m * nz + z] - pz[z]);
    return 0.5 * d / static_cast<double>(L);
  }
};

WiretapRun wiretap_collect(const WiretapSpec& spec, uint64_t trials, uint64_t seed,
                           const std::function<std::pair<double, double>(
                               const WiretapModel&, const WiretapModel::Book&)>& f) {
  WiretapModel M(spec);
  if (trials == 0) throw std::invalid_argument("trials must be > 0");
  std::vector<double> err(trials), tvs(trials);
  constexpr uint64_t kBlock = 256;
  const std::size_t blocks = (trials + kBlock - 1) / kBlock;
  parallel_blocks(blocks, [&](std::size_t blk) {
    const uint64_t lo = blk * kBlock, hi = std::min(trials, lo + kBlock);
    for (uint64_t t = lo; t < hi; ++t) {
      const auto book = M.codebook(seed, t);
      const auto [e, v] = f(M, book);
      err[t] = e;
      tvs[t] = v;
    }
  });
  std::vector<double> comb(trials);
  for (uint64_t t = 0; t < trials; ++t) comb[t] = err[t] + spec.nu * tvs[t];
  return {mean_stderr(err), mean_stderr(tvs), mean_stderr(comb)};
}

}  // namespace

WiretapRun wiretap_run(const WiretapSpec& spec, std::size_t d_index, std::size_t e_index,
                       uint64_t trials, uint64_t seed) {
  require(d_index < spec.legit.size() && e_index < spec.eaves.size(),
          "wiretap_run: channel index out of range");
  return wiretap_collect(spec, trials, seed, [&](const WiretapModel& M, const auto& b) {
    return std::make_pair(M.error(b, spec.legit[d_index]), M.tv(b, spec.eaves[e_index]));
  });
}

WiretapRun wiretap_run_worst(const WiretapSpec& spec, uint64_t trials, uint64_t seed) {
  return wiretap_collect(spec, trials, seed, [&](const WiretapModel& M, const auto& b) {
    double e = 0.0, v = 0.0;
    for (const auto& c : spec.legit) e = std::max(e, M.error(b, c));
    for (const auto& c : spec.eaves) v = std::max(v, M.tv(b, c));
    return std::make_pair(e, v);
  });
}

double wiretap_error_expectation(const WiretapSpec& spec, const Channel& legit) {
  WiretapModel M(spec);
  check_channel(legit, M.nx, M.ny, "wiretap: legit channel");
  const double la = static_cast<double>(M.L) * static_cast<double>(M.A);
  double total = 0.0;
  for (std::size_t u = 0; u < M.nu; ++u)
    for (std::size_t x = 0; x < M.nx; ++x)
      for (std::size_t y = 0; y < M.ny; ++y) {
        const double p = spec.p_ux[u][x] * legit[x][y];
        if (p <= 0.0) continue;
        const double ph = M.post_y[y * M.nu + u];
        // 2^{-ihat(U;Y)} = P_U(u) / Phat(u|y)
        const double term = ph > 0.0 ? la * M.p_u[u] / ph : INFINITY;
        total += p * std::min(term, 1.0);
      }
  return total;
}

double wiretap_secrecy_expectation(const WiretapSpec& spec, const Channel& eaves) {
  WiretapModel M(spec);
  check_channel(eaves, M.nx, M.nz, "wiretap: eavesdropper channel");
  const auto post_z = M.posterior(spec.z_hat, M.nz);
  double total = 0.0;
  for (std::size_t u = 0; u < M.nu; ++u)
    for (std::size_t x = 0; x < M.nx; ++x)
      for (std::size_t z = 0; z < M.nz; ++z) {
        const double p = spec.p_ux[u][x] * eaves[x][z];
        if (p <= 0.0) continue;
        const double ph = post_z[z * M.nu + u];
        const double inv_density = ph > 0.0 ? M.p_u[u] / ph : INFINITY;
        total += p * std::pow(1.0 + inv_density, -static_cast<double>(spec.B));
      }
  return 2.0 * total +
         std::sqrt(static_cast<double>(spec.B) / static_cast<double>(spec.A));
}

WiretapBound wiretap_bound(const WiretapSpec& spec) {
  validate(spec);
  WiretapBound b;
  b.cover_legit = greedy_cover(spec.legit, spec.eps1).size();
  b.cover_eaves = greedy_cover(spec.eaves, spec.eps2).size();
  double we = 0.0, ws = 0.0;
  for (const auto& c : spec.legit) we = std::max(we, wiretap_error_expectation(spec, c));
  for (const auto& c : spec.eaves) ws = std::max(ws, wiretap_secrecy_expectation(spec, c));
  b.error_term = static_cast<double>(b.cover_legit) * we + spec.eps1;
  b.secrecy_term = static_cast<double>(b.cover_eaves) * ws + spec.eps2;
  b.total = b.error_term + spec.nu * b.secrecy_term;
  return b;
}

// ---------------- random instances ----------------

HidingSpec random_hiding_instance(uint64_t seed) {
  SeededStream s(seed, derive(0x41D1ull, 7));
  HidingSpec h;
  const std::size_t nse = 2, nx = 2, ny = 2;
  h.u_size = 2 + s.below(2);
  h.x_size = nx;
  h.L = 2;
  // Correlated state pair.
  const double rho = 0.6 + 0.35 * s.uniform();
  const double pse = 0.3 + 0.4 * s.uniform();
  h.p_s = {{pse * rho, pse * (1 - rho)}, {(1 - pse) * (1 - rho), (1 - pse) * rho}};
  h.p_ux_given_se.resize(nse);
  for (std::size_t se = 0; se < nse; ++se) {
    const auto pu = dirichlet1(s, h.u_size);
    auto& row = h.p_ux_given_se[se];
    row.assign(h.u_size * nx, 0.0);
    const double flip = 0.02 + 0.1 * s.uniform();
    for (std::size_t u = 0; u < h.u_size; ++u) {
      const std::size_t x0 = (u + se) % nx;
      row[u * nx + x0] += pu[u] * (1.0 - flip);
      row[u * nx + (x0 + 1) % nx] += pu[u] * flip;
    }
  }
  const double p_hat = 0.02 + 0.15 * s.uniform();
  h.a_hat = bsc(p_hat);
  h.attacks = {h.a_hat};
  for (int k = 0; k < 2; ++k) h.attacks.push_back(bsc(std::min(0.45, p_hat + 0.2 * s.uniform())));
  h.d1.assign(nse, std::vector<double>(nx));
  for (std::size_t se = 0; se < nse; ++se)
    for (std::size_t x = 0; x < nx; ++x) h.d1[se][x] = se == x ? 0.0 : 1.0;
  h.D1 = s.uniform() < 0.5 ? 1.0 : 0.0;
  h.d2 = {{0.0, 1.0}, {1.0, 0.0}};
  h.D2 = s.uniform() < 0.5 ? 1.0 : 0.0;
  h.xhat.assign(h.L, std::vector<std::size_t>(ny));
  for (std::size_t m = 0; m < h.L; ++m)
    for (std::size_t y = 0; y < ny; ++y) h.xhat[m][y] = y;
  return h;
}

WiretapSpec random_wiretap_instance(uint64_t seed) {
  SeededStream s(seed, derive(0x3171ull, 7));
  WiretapSpec w;
  const double pu = 0.3 + 0.4 * s.uniform();
  const double flip = 0.02 + 0.1 * s.uniform();
  w.p_ux = {{pu * (1 - flip), pu * flip}, {(1 - pu) * flip, (1 - pu) * (1 - flip)}};
  const double py = 0.02 + 0.1 * s.uniform();
  const double pz = 0.25 + 0.2 * s.uniform();
  w.y_hat = bsc(py);
  w.z_hat = bsc(pz);
  w.legit = {w.y_hat};
  w.eaves = {w.z_hat};
  for (int k = 0; k < 2; ++k) {
    w.legit.push_back(bsc(std::min(0.45, py + 0.1 * s.uniform())));
    w.eaves.push_back(bsc(std::max(0.05, pz - 0.1 * s.uniform())));
  }
  w.L = 2;
  w.A = 16;
  w.B = 4;
  w.nu = 1.0;
  w.eps1 = 0.05;
  w.eps2 = 0.05;
  return w;
}

}  // namespace oneshot
