#include "oneshot/adn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "oneshot/parallel.hpp"

namespace oneshot {

namespace {

void check_row(std::span<const double> row, const char* what) {
  double s = 0.0;
  for (double p : row) {
    if (!(p >= 0.0) || !std::isfinite(p))
      throw std::invalid_argument(std::string(what) + ": negative or non-finite mass");
    s += p;
  }
  if (std::abs(s - 1.0) > 1e-9)
    throw std::invalid_argument(std::string(what) + ": row does not sum to 1");
}

Symbol sample_index(std::span<const double> pmf, double u) {
  double acc = 0.0;
  const double total = std::accumulate(pmf.begin(), pmf.end(), 0.0);
  if (!(total > 0.0)) throw std::runtime_error("adn: sampling from an all-zero pmf");
  u *= total;
  Symbol last = 0;
  for (std::size_t i = 0; i < pmf.size(); ++i) {
    if (pmf[i] <= 0.0) continue;
    acc += pmf[i];
    last = static_cast<Symbol>(i);
    if (u < acc) return last;
  }
  return last;
}

std::size_t checked_product(std::span<const std::size_t> dims, std::size_t cap) {
  std::size_t p = 1;
  for (std::size_t d : dims) {
    if (d == 0) throw std::invalid_argument("adn: empty alphabet");
    if (p > cap / d) throw std::invalid_argument("adn: dense table exceeds the entry cap");
    p *= d;
  }
  return p;
}

constexpr uint64_t kLocalLabel = 0xADA0'0000'0000'0001ull;

}  // namespace

void validate(const AdnProblem& pr) {
  const std::size_t n = pr.net.size();
  if (n == 0) throw std::invalid_argument("adn: network has no nodes");
  if (pr.spec.nodes.size() != n)
    throw std::invalid_argument("adn: coding spec and network sizes differ");
  if (!pr.error) throw std::invalid_argument("adn: error set missing");
  for (std::size_t i = 0; i < n; ++i) {
    const auto& node = pr.net.nodes[i];
    const auto& c = pr.spec.nodes[i];
    if (node.x_size == 0 || node.y_size == 0 || c.u_size == 0)
      throw std::invalid_argument("adn: empty alphabet at node " + std::to_string(i));
    if (!node.channel || !c.enc_u || !c.enc_x)
      throw std::invalid_argument("adn: missing conditional at node " + std::to_string(i));
    if (c.unique > c.decode.size())
      throw std::invalid_argument("adn: unique-decode count exceeds decode list");
    for (std::size_t j = 0; j < c.decode.size(); ++j) {
      if (c.decode[j] >= i)
        throw std::invalid_argument("adn: decode index must refer to an earlier node");
      for (std::size_t k = 0; k < j; ++k)
        if (c.decode[k] == c.decode[j])
          throw std::invalid_argument("adn: decode indices must be distinct");
    }
  }
}

IdealJoint ideal_joint(const AdnProblem& pr, std::size_t cap) {
  validate(pr);
  const std::size_t n = pr.net.size();
  IdealJoint J;
  J.nodes = n;
  std::vector<Symbol> ys(n), us(n), xs(n);
  std::vector<std::vector<double>> ybuf(n), ubuf(n), xbuf(n);
  std::vector<std::vector<Symbol>> ubar(n);
  for (std::size_t i = 0; i < n; ++i) {
    ybuf[i].resize(pr.net.nodes[i].y_size);
    ubuf[i].resize(pr.spec.nodes[i].u_size);
    xbuf[i].resize(pr.net.nodes[i].x_size);
    ubar[i].resize(pr.spec.nodes[i].unique);
  }

  std::function<void(std::size_t, double)> rec = [&](std::size_t i, double p) {
    if (i == n) {
      if (J.prob.size() >= cap)
        throw std::invalid_argument("adn: ideal joint exceeds the entry cap");
      J.prob.push_back(p);
      J.y.insert(J.y.end(), ys.begin(), ys.end());
      J.u.insert(J.u.end(), us.begin(), us.end());
      J.x.insert(J.x.end(), xs.begin(), xs.end());
      return;
    }
    const auto& node = pr.net.nodes[i];
    const auto& c = pr.spec.nodes[i];
    node.channel(std::span<const Symbol>(xs.data(), i),
                 std::span<const Symbol>(ys.data(), i), ybuf[i]);
    check_row(ybuf[i], "channel");
    const std::vector<double> py = ybuf[i];
    for (Symbol y = 0; y < py.size(); ++y) {
      if (py[y] <= 0.0) continue;
      ys[i] = y;
      for (std::size_t j = 0; j < c.unique; ++j) ubar[i][j] = us[c.decode[j]];
      c.enc_u(y, ubar[i], ubuf[i]);
      check_row(ubuf[i], "enc_u");
      const std::vector<double> pu = ubuf[i];
      for (Symbol u = 0; u < pu.size(); ++u) {
        if (pu[u] <= 0.0) continue;
        us[i] = u;
        c.enc_x(y, u, ubar[i], xbuf[i]);
        check_row(xbuf[i], "enc_x");
        const std::vector<double> px = xbuf[i];
        for (Symbol x = 0; x < px.size(); ++x) {
          if (px[x] <= 0.0) continue;
          xs[i] = x;
          rec(i + 1, p * py[y] * pu[u] * px[x]);
        }
      }
    }
  };
  rec(0, 1.0);
  return J;
}

AdnScheme::AdnScheme(AdnProblem problem, std::size_t cap)
    : problem_(std::move(problem)), joint_(ideal_joint(problem_, cap)) {
  const std::size_t n = problem_.net.size();
  tables_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& c = problem_.spec.nodes[i];
    if (c.decode.empty()) continue;
    auto& T = tables_[i];
    T.dims.push_back(problem_.net.nodes[i].y_size);
    for (std::size_t a : c.decode) T.dims.push_back(problem_.spec.nodes[a].u_size);
    T.table.assign(checked_product(T.dims, cap), 0.0);
    for (std::size_t r = 0; r < joint_.size(); ++r) {
      std::size_t idx = joint_.ys(r)[i];
      for (std::size_t k = 0; k < c.decode.size(); ++k)
        idx = idx * T.dims[k + 1] + joint_.us(r)[c.decode[k]];
      T.table[idx] += joint_.prob[r];
    }
  }
}

void AdnScheme::decode(std::size_t node, Symbol y,
                       const std::vector<std::vector<double>>& marks,
                       std::span<Symbol> out) const {
  const auto& c = problem_.spec.nodes[node];
  const auto& T = tables_[node];
  const std::size_t d = c.decode.size();
  // rest[k] = |U_{a_k}| * ... * |U_{a_{d-1}}|
  std::vector<std::size_t> rest(d + 1, 1);
  for (std::size_t k = d; k-- > 0;) rest[k] = rest[k + 1] * T.dims[k + 1];

  std::vector<double> Q, Qn, M, col, marg;
  std::vector<std::size_t> ranks;
  for (std::size_t j = 0; j < c.unique; ++j) {
    std::size_t idx = y;
    for (std::size_t m = 0; m < j; ++m) idx = idx * T.dims[m + 1] + out[m];
    const double* S = T.table.data() + idx * rest[j];

    Q.assign(1, 1.0);
    std::size_t size_v = 1;
    for (std::size_t k = d - 1; k > j; --k) {
      const std::size_t uk = T.dims[k + 1];
      const std::size_t blk = uk * size_v;
      const std::size_t nprefix = rest[j] / rest[k];
      M.assign(blk, 0.0);
      for (std::size_t p = 0; p < nprefix; ++p)
        for (std::size_t e = 0; e < blk; ++e) M[e] += S[p * blk + e];
      Qn.assign(blk, 0.0);
      col.resize(uk);
      ranks.resize(uk);
      const double h = harmonic(uk);
      const auto& mk = marks[c.decode[k]];
      for (std::size_t v = 0; v < size_v; ++v) {
        double s = 0.0;
        for (std::size_t u = 0; u < uk; ++u) s += (col[u] = M[u * size_v + v]);
        if (s <= 0.0) std::fill(col.begin(), col.end(), 1.0);
        efr_ranks(mk, col, ranks);
        for (std::size_t u = 0; u < uk; ++u)
          Qn[u * size_v + v] = Q[v] / (static_cast<double>(ranks[u]) * h);
      }
      Q.swap(Qn);
      size_v = blk;
    }

    const std::size_t uj = T.dims[j + 1];
    marg.assign(uj, 0.0);
    col.resize(uj);
    for (std::size_t v = 0; v < size_v; ++v) {
      if (Q[v] <= 0.0) continue;
      double s = 0.0;
      for (std::size_t u = 0; u < uj; ++u) s += (col[u] = S[u * size_v + v]);
      if (s <= 0.0) {
        for (std::size_t u = 0; u < uj; ++u) marg[u] += Q[v] / static_cast<double>(uj);
      } else {
        for (std::size_t u = 0; u < uj; ++u) marg[u] += Q[v] * col[u] / s;
      }
    }
    out[j] = static_cast<Symbol>(efr_argmin(marks[c.decode[j]], marg));
  }
}

TrialOutcome AdnScheme::run_trial(uint64_t seed, uint64_t trial, bool genie) const {
  const std::size_t n = problem_.net.size();
  std::vector<std::vector<double>> marks(n);
  for (std::size_t i = 0; i < n; ++i) {
    SeededStream s(seed, derive(trial, i));
    marks[i].resize(problem_.spec.nodes[i].u_size);
    for (double& z : marks[i]) z = s.exp();
  }
  SeededStream local(seed, derive(trial, kLocalLabel));

  TrialOutcome out;
  out.y.assign(n, 0);
  out.u.assign(n, 0);
  out.x.assign(n, 0);
  std::vector<double> buf;
  std::vector<Symbol> dec;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& node = problem_.net.nodes[i];
    const auto& c = problem_.spec.nodes[i];
    buf.assign(node.y_size, 0.0);
    node.channel(std::span<const Symbol>(out.x.data(), i),
                 std::span<const Symbol>(out.y.data(), i), buf);
    const Symbol y = sample_index(buf, local.uniform());
    out.y[i] = y;

    dec.assign(c.unique, 0);
    if (genie) {
      for (std::size_t j = 0; j < c.unique; ++j) dec[j] = out.u[c.decode[j]];
    } else if (c.unique > 0) {
      decode(i, y, marks, dec);
      for (std::size_t j = 0; j < c.unique; ++j)
        if (dec[j] != out.u[c.decode[j]]) out.misdecode = true;
    }

    buf.assign(c.u_size, 0.0);
    c.enc_u(y, dec, buf);
    const Symbol u = static_cast<Symbol>(efr_argmin(marks[i], buf));
    out.u[i] = u;
    buf.assign(node.x_size, 0.0);
    c.enc_x(y, u, dec, buf);
    out.x[i] = sample_index(buf, local.uniform());
  }
  out.error_set = problem_.error(out.x, out.y);
  return out;
}

AdnRunResult AdnScheme::run(uint64_t trials, uint64_t seed) const {
  if (trials == 0) throw std::invalid_argument("adn: trials must be > 0");
  constexpr uint64_t kBlock = 1024;
  const std::size_t blocks = (trials + kBlock - 1) / kBlock;
  std::vector<uint64_t> fail(blocks), hits(blocks), mis(blocks);
  parallel_blocks(blocks, [&](std::size_t b) {
    const uint64_t lo = b * kBlock, hi = std::min(trials, lo + kBlock);
    for (uint64_t t = lo; t < hi; ++t) {
      const TrialOutcome o = run_trial(seed, t);
      fail[b] += o.failure();
      hits[b] += o.error_set;
      mis[b] += o.misdecode;
    }
  });
  AdnRunResult r;
  r.trials = trials;
  uint64_t f = 0;
  for (std::size_t b = 0; b < blocks; ++b) {
    f += fail[b];
    r.error_set_hits += hits[b];
    r.misdecodes += mis[b];
  }
  const double p = static_cast<double>(f) / static_cast<double>(trials);
  r.failure = {p, std::sqrt(p * (1.0 - p) / static_cast<double>(trials))};
  return r;
}

double AdnScheme::bound_B(std::size_t node, std::size_t j, std::size_t atom) const {
  const auto& c = problem_.spec.nodes.at(node);
  if (j >= c.unique) throw std::invalid_argument("bound_B: j must be < d'");
  if (atom >= joint_.size()) throw std::invalid_argument("bound_B: atom out of range");
  const auto& T = tables_[node];
  const std::size_t d = c.decode.size();
  const auto ys = joint_.ys(atom);
  const auto us = joint_.us(atom);

  double gamma = 1.0;
  for (std::size_t k = j + 1; k < d; ++k)
    gamma *= std::log(static_cast<double>(problem_.spec.nodes[c.decode[k]].u_size)) + 1.0;

  std::vector<Symbol> vals(d);
  for (std::size_t k = 0; k < d; ++k) vals[k] = us[c.decode[k]];
  auto index_of = [&](const std::vector<Symbol>& v) {
    std::size_t idx = ys[node];
    for (std::size_t k = 0; k < d; ++k) idx = idx * T.dims[k + 1] + v[k];
    return idx;
  };

  double prod = 1.0;
  std::vector<double> pmf;
  std::vector<Symbol> ubar;
  for (std::size_t k = j; k < d; ++k) {
    // Numerator: the encoder's conditional for U_{a_k} at the ideal values.
    const std::size_t a = c.decode[k];
    const auto& ca = problem_.spec.nodes[a];
    ubar.resize(ca.unique);
    for (std::size_t m = 0; m < ca.unique; ++m) ubar[m] = us[ca.decode[m]];
    pmf.assign(ca.u_size, 0.0);
    ca.enc_u(ys[a], ubar, pmf);
    const double num = pmf[us[a]];

    // Denominator: P(u_k | u_{<j}, u_{>k}, y_node) from the decoder table,
    // summing out positions j..k-1.
    std::vector<Symbol> v = vals;
    double hit = 0.0, total = 0.0;
    std::size_t combos = 1;
    for (std::size_t m = j; m < k; ++m) combos *= T.dims[m + 1];
    for (std::size_t cidx = 0; cidx < combos; ++cidx) {
      std::size_t r = cidx;
      for (std::size_t m = k; m-- > j;) {
        v[m] = static_cast<Symbol>(r % T.dims[m + 1]);
        r /= T.dims[m + 1];
      }
      for (Symbol w = 0; w < T.dims[k + 1]; ++w) {
        v[k] = w;
        const double t = T.table[index_of(v)];
        total += t;
        if (w == vals[k]) hit += t;
      }
    }
    if (!(hit > 0.0)) return INFINITY;
    prod *= num / (hit / total) + (k > j ? 1.0 : 0.0);
  }
  return gamma * prod;
}

double AdnScheme::atom_bound(std::size_t atom) const {
  double s = problem_.error(joint_.xs(atom), joint_.ys(atom)) ? 1.0 : 0.0;
  for (std::size_t i = 0; i < problem_.spec.nodes.size() && s < 1.0; ++i)
    for (std::size_t j = 0; j < problem_.spec.nodes[i].unique && s < 1.0; ++j)
      s += bound_B(i, j, atom);
  return std::min(s, 1.0);
}

BoundResult AdnScheme::bound_total(uint64_t mc_samples, uint64_t seed) const {
  if (mc_samples == 0) {
    double total = 0.0;
    for (std::size_t r = 0; r < joint_.size(); ++r)
      total += joint_.prob[r] * atom_bound(r);
    return {total, 0.0};
  }
  std::vector<double> cdf(joint_.size());
  std::partial_sum(joint_.prob.begin(), joint_.prob.end(), cdf.begin());
  SeededStream s(seed, derive(0xB0B0ull, 0));
  RunningStats st;
  for (uint64_t t = 0; t < mc_samples; ++t) {
    const double u = s.uniform() * cdf.back();
    const std::size_t r = std::min<std::size_t>(
        std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin(), cdf.size() - 1);
    st.add(atom_bound(r));
  }
  return {st.mean(), st.stderr_()};
}

MeanStderr run_scheme(const AdnProblem& problem, uint64_t trials, uint64_t seed) {
  return AdnScheme(problem).run(trials, seed).failure;
}

BoundResult bound_total(const AdnProblem& problem, uint64_t mc_samples, uint64_t seed) {
  return AdnScheme(problem).bound_total(mc_samples, seed);
}

}  // namespace oneshot
