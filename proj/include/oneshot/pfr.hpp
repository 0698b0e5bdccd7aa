#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "oneshot/rng.hpp"
#include "oneshot/stats.hpp"

namespace oneshot {

// Probability mass function over the dense alphabet 0..size()-1.
class Pmf {
 public:
  Pmf() = default;
  // Throws std::invalid_argument unless probs are non-negative, finite and
  // sum to 1 within 1e-12.
  explicit Pmf(std::vector<double> probs);
  // Rescales non-negative weights to sum 1. Throws on all-zero input.
  static Pmf normalized(std::vector<double> weights);
  static Pmf uniform(std::size_t n);
  static Pmf delta(std::size_t n, std::size_t at);

  std::size_t size() const { return p_.size(); }
  double operator[](std::size_t u) const { return p_[u]; }
  // Natural log; -infinity for zero mass.
  double log_prob(std::size_t u) const;
  const std::vector<double>& probs() const { return p_; }
  std::span<const double> span() const { return p_; }

 private:
  std::vector<double> p_;
};

// I.i.d. Exp(1) marks, one per symbol.
struct ExpProcess {
  std::vector<double> marks;

  static ExpProcess generate(SeededStream& stream, std::size_t size);
  static ExpProcess generate(uint64_t seed, uint64_t substream,
                             std::size_t size);
  std::size_t size() const { return marks.size(); }
};

// argmin_u Z_u / p(u). Weights need not be normalized; zero weight means an
// infinite ratio. Ties go to the smallest symbol index.
std::size_t efr_argmin(std::span<const double> marks,
                       std::span<const double> weights);
std::size_t efr_argmin(const ExpProcess& proc, const Pmf& p);

// 1-based position of u when symbols are sorted by (Z_u / p(u), index).
std::size_t efr_rank(std::span<const double> marks,
                     std::span<const double> weights, std::size_t u);
std::size_t efr_rank(const ExpProcess& proc, const Pmf& p, std::size_t u);

// All ranks at once: ranks[u] = efr_rank(marks, weights, u).
void efr_ranks(std::span<const double> marks, std::span<const double> weights,
               std::span<std::size_t> ranks);

double harmonic(std::size_t n);

// Joint table over V x U, row-major with index v * size_u + u.
struct JointTable {
  std::size_t size_v = 1;
  std::size_t size_u = 0;
  std::vector<double> table;

  double at(std::size_t v, std::size_t u) const {
    return table[v * size_u + u];
  }
};

// Q(v,u) = Q_V(v) / (rank_{Q_{U|V}(.|v)}(u) * H_{|U|}).
JointTable refine(const JointTable& q_joint, const ExpProcess& proc);

// 1 - (1 + ratio)^{-1}.
double pml_bound(double ratio);

// Fraction of fresh processes on which the representations of p1 and p2
// select different symbols.
MeanStderr estimate_mismatch(const Pmf& p1, const Pmf& p2, uint64_t trials,
                             uint64_t seed);

}  // namespace oneshot
