#include "oneshot/pfr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace oneshot {

namespace {

void check_weights(std::span<const double> w) {
  for (double x : w)
    if (!(x >= 0.0) || !std::isfinite(x))
      throw std::invalid_argument("pmf entries must be finite and >= 0");
}

// Comparison of Z_a / w_a against Z_b / w_b without dividing, so that zero
// weights behave as +infinity. Returns true when a sorts strictly before b.
inline bool ratio_before(double za, double wa, std::size_t a, double zb,
                         double wb, std::size_t b) {
  if (wa == 0.0 && wb == 0.0) return a < b;
  if (wa == 0.0) return false;
  if (wb == 0.0) return true;
  const double ra = za / wa;
  const double rb = zb / wb;
  if (ra != rb) return ra < rb;
  return a < b;
}

}  // namespace

Pmf::Pmf(std::vector<double> probs) : p_(std::move(probs)) {
  if (p_.empty()) throw std::invalid_argument("Pmf: empty alphabet");
  check_weights(p_);
  const double s = std::accumulate(p_.begin(), p_.end(), 0.0);
  if (std::abs(s - 1.0) > 1e-12)
    throw std::invalid_argument("Pmf: probabilities must sum to 1");
}

Pmf Pmf::normalized(std::vector<double> weights) {
  if (weights.empty()) throw std::invalid_argument("Pmf: empty alphabet");
  check_weights(weights);
  const double s = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(s > 0.0)) throw std::invalid_argument("Pmf: all-zero weights");
  for (double& w : weights) w /= s;
  // Absorb rounding so the constructor's tolerance always holds.
  const double r = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (std::abs(r - 1.0) > 1e-12)
    for (double& w : weights) w /= r;
  return Pmf(std::move(weights));
}

Pmf Pmf::uniform(std::size_t n) {
  if (n == 0) throw std::invalid_argument("Pmf: empty alphabet");
  return Pmf::normalized(std::vector<double>(n, 1.0));
}

Pmf Pmf::delta(std::size_t n, std::size_t at) {
  if (at >= n) throw std::invalid_argument("Pmf::delta: index out of range");
  std::vector<double> p(n, 0.0);
  p[at] = 1.0;
  return Pmf(std::move(p));
}

double Pmf::log_prob(std::size_t u) const {
  return p_.at(u) > 0.0 ? std::log(p_[u])
                        : -std::numeric_limits<double>::infinity();
}

ExpProcess ExpProcess::generate(SeededStream& stream, std::size_t size) {
  ExpProcess proc;
  proc.marks.resize(size);
  for (double& z : proc.marks) z = stream.exp();
  return proc;
}

ExpProcess ExpProcess::generate(uint64_t seed, uint64_t substream,
                                std::size_t size) {
  SeededStream s(seed, substream);
  return generate(s, size);
}

std::size_t efr_argmin(std::span<const double> marks,
                       std::span<const double> weights) {
  if (weights.size() > marks.size())
    throw std::invalid_argument("efr_argmin: pmf larger than process");
  std::size_t best = weights.size();
  double best_ratio = std::numeric_limits<double>::infinity();
  for (std::size_t u = 0; u < weights.size(); ++u) {
    if (!(weights[u] > 0.0)) continue;
    const double r = marks[u] / weights[u];
    if (r < best_ratio) {
      best_ratio = r;
      best = u;
    }
  }
  if (best == weights.size())
    throw std::invalid_argument("efr_argmin: all-zero distribution");
  return best;
}

std::size_t efr_argmin(const ExpProcess& proc, const Pmf& p) {
  return efr_argmin(proc.marks, p.span());
}

std::size_t efr_rank(std::span<const double> marks,
                     std::span<const double> weights, std::size_t u) {
  if (u >= weights.size() || weights.size() > marks.size())
    throw std::invalid_argument("efr_rank: symbol out of range");
  std::size_t rank = 1;
  for (std::size_t v = 0; v < weights.size(); ++v)
    if (v != u &&
        ratio_before(marks[v], weights[v], v, marks[u], weights[u], u))
      ++rank;
  return rank;
}

std::size_t efr_rank(const ExpProcess& proc, const Pmf& p, std::size_t u) {
  return efr_rank(proc.marks, p.span(), u);
}

void efr_ranks(std::span<const double> marks, std::span<const double> weights,
               std::span<std::size_t> ranks) {
  const std::size_t n = weights.size();
  if (n > marks.size() || ranks.size() != n)
    throw std::invalid_argument("efr_ranks: size mismatch");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return ratio_before(marks[a], weights[a], a, marks[b], weights[b], b);
  });
  for (std::size_t i = 0; i < n; ++i) ranks[order[i]] = i + 1;
}

double harmonic(std::size_t n) {
  double h = 0.0;
  for (std::size_t i = n; i >= 1; --i) h += 1.0 / static_cast<double>(i);
  return h;
}

JointTable refine(const JointTable& q, const ExpProcess& proc) {
  if (q.size_u == 0) throw std::invalid_argument("refine: empty U alphabet");
  if (q.table.size() != q.size_v * q.size_u)
    throw std::invalid_argument("refine: table has wrong size");
  if (proc.size() < q.size_u)
    throw std::invalid_argument("refine: process smaller than U alphabet");
  check_weights(q.table);
  const double h = harmonic(q.size_u);
  JointTable out{q.size_v, q.size_u, std::vector<double>(q.table.size())};
  std::vector<std::size_t> ranks(q.size_u);
  for (std::size_t v = 0; v < q.size_v; ++v) {
    std::span<const double> row(q.table.data() + v * q.size_u, q.size_u);
    const double qv = std::accumulate(row.begin(), row.end(), 0.0);
    if (qv == 0.0) continue;
    efr_ranks(proc.marks, row, ranks);
    for (std::size_t u = 0; u < q.size_u; ++u)
      out.table[v * q.size_u + u] = qv / (static_cast<double>(ranks[u]) * h);
  }
  return out;
}

double pml_bound(double ratio) {
  if (!(ratio >= 0.0)) throw std::invalid_argument("pml_bound: ratio < 0");
  if (std::isinf(ratio)) return 1.0;
  return ratio / (1.0 + ratio);
}

MeanStderr estimate_mismatch(const Pmf& p1, const Pmf& p2, uint64_t trials,
                             uint64_t seed) {
  if (trials == 0) throw std::invalid_argument("estimate_mismatch: trials=0");
  if (p1.size() != p2.size())
    throw std::invalid_argument("estimate_mismatch: alphabet mismatch");
  SeededStream s(seed, 0);
  std::vector<double> marks(p1.size());
  uint64_t miss = 0;
  for (uint64_t t = 0; t < trials; ++t) {
    for (double& z : marks) z = s.exp();
    if (efr_argmin(marks, p1.span()) != efr_argmin(marks, p2.span())) ++miss;
  }
  const double p = static_cast<double>(miss) / static_cast<double>(trials);
  return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(trials))};
}

}  // namespace oneshot
