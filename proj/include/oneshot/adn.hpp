#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "oneshot/pfr.hpp"
#include "oneshot/stats.hpp"

namespace oneshot {

using Symbol = uint32_t;

// Node i observes Y_i drawn from channel(x_0..x_{i-1}, y_0..y_{i-1}) and
// emits X_i. All alphabets are dense ranges 0..size-1.
struct AdnNode {
  std::size_t x_size = 1;
  std::size_t y_size = 1;
  std::function<void(std::span<const Symbol> xs, std::span<const Symbol> ys,
                     std::span<double> out)>
      channel;
};

struct Network {
  std::vector<AdnNode> nodes;
  std::size_t size() const { return nodes.size(); }
};

// Coding structure of one node. `decode` lists the nodes whose auxiliaries
// are decoded, in decoding order; the first `unique` of them are decoded
// uniquely and passed to enc_u / enc_x as ubar, the rest only refine the
// soft decoding.
struct NodeCoding {
  std::vector<std::size_t> decode;
  std::size_t unique = 0;
  std::size_t u_size = 1;
  std::function<void(Symbol y, std::span<const Symbol> ubar,
                     std::span<double> out)>
      enc_u;
  std::function<void(Symbol y, Symbol u, std::span<const Symbol> ubar,
                     std::span<double> out)>
      enc_x;
};

struct CodingSpec {
  std::vector<NodeCoding> nodes;
};

using ErrorSet =
    std::function<bool(std::span<const Symbol> xs, std::span<const Symbol> ys)>;

struct AdnProblem {
  std::string name;
  Network net;
  CodingSpec spec;
  ErrorSet error;
};

// Throws std::invalid_argument on inconsistent dimensions or indices.
void validate(const AdnProblem& problem);

// Support of the ideal joint law of (Y^N, U^N, X^N), one row per atom.
struct IdealJoint {
  std::size_t nodes = 0;
  std::vector<double> prob;
  std::vector<Symbol> y, u, x;  // row r occupies [r*nodes, (r+1)*nodes)

  std::size_t size() const { return prob.size(); }
  std::span<const Symbol> ys(std::size_t r) const { return {y.data() + r * nodes, nodes}; }
  std::span<const Symbol> us(std::size_t r) const { return {u.data() + r * nodes, nodes}; }
  std::span<const Symbol> xs(std::size_t r) const { return {x.data() + r * nodes, nodes}; }
};

constexpr std::size_t kDefaultTableCap = std::size_t{1} << 20;

IdealJoint ideal_joint(const AdnProblem& problem,
                       std::size_t cap = kDefaultTableCap);

struct TrialOutcome {
  std::vector<Symbol> y, u, x;
  bool error_set = false;
  bool misdecode = false;
  bool failure() const { return error_set || misdecode; }
};

struct AdnRunResult {
  MeanStderr failure;
  uint64_t trials = 0;
  uint64_t error_set_hits = 0;
  uint64_t misdecodes = 0;
};

struct BoundResult {
  double value = 0.0;
  double stderr_ = 0.0;  // zero for the exact evaluation
};

// The one-shot scheme built from shared exponential processes. Each node i
// has a process of |U_i| marks drawn from (seed, trial, i).
class AdnScheme {
 public:
  explicit AdnScheme(AdnProblem problem, std::size_t cap = kDefaultTableCap);

  const AdnProblem& problem() const { return problem_; }
  const IdealJoint& joint() const { return joint_; }

  // One trial. In genie mode every node uses the true auxiliaries in place
  // of its decoded ones, so the output follows the ideal law.
  TrialOutcome run_trial(uint64_t seed, uint64_t trial, bool genie = false) const;
  AdnRunResult run(uint64_t trials, uint64_t seed) const;

  // B_{i,j} evaluated at one atom of the ideal joint.
  double bound_B(std::size_t node, std::size_t j, std::size_t atom) const;
  // E[min(1{E} + sum_i sum_{j < d'_i} B_{i,j}, 1)]. Exact over the support
  // when mc_samples == 0, otherwise a Monte Carlo average.
  BoundResult bound_total(uint64_t mc_samples = 0, uint64_t seed = 0) const;

 private:
  struct DecoderTable {
    std::vector<std::size_t> dims;  // |Y_i|, |U_{a_0}|, ..., |U_{a_{d-1}}|
    std::vector<double> table;
  };

  void decode(std::size_t node, Symbol y,
              const std::vector<std::vector<double>>& marks,
              std::span<Symbol> out) const;
  double atom_bound(std::size_t atom) const;

  AdnProblem problem_;
  IdealJoint joint_;
  std::vector<DecoderTable> tables_;
};

MeanStderr run_scheme(const AdnProblem& problem, uint64_t trials, uint64_t seed);
BoundResult bound_total(const AdnProblem& problem, uint64_t mc_samples = 0,
                        uint64_t seed = 0);

// Presets. Tables are row-per-conditioning-value: channel[x][y] = P(y|x).
using Matrix = std::vector<std::vector<double>>;
using IndexMap = std::vector<std::vector<std::size_t>>;

AdnProblem build_p2p(const std::vector<double>& p_x, const Matrix& channel,
                     std::size_t L);
// channel[x * |S| + s][y] = P(y | x, s); x_of[u][s] = x(u, s).
AdnProblem build_gelfand_pinsker(const std::vector<double>& p_s,
                                 const Matrix& p_u_given_s,
                                 const IndexMap& x_of, const Matrix& channel,
                                 std::size_t L);
// z_of[u][t] = z(u, t); error when dist[x][z] > D.
AdnProblem build_wyner_ziv(const std::vector<double>& p_x,
                           const Matrix& p_t_given_x,
                           const Matrix& p_u_given_x, const IndexMap& z_of,
                           std::size_t L, const Matrix& dist, double D);
// As Wyner-Ziv, but the target is f[x][t] and the error is dist[f][z] > D.
AdnProblem build_coding_for_computing(const IndexMap& f,
                                      const std::vector<double>& p_x,
                                      const Matrix& p_t_given_x,
                                      const Matrix& p_u_given_x,
                                      const IndexMap& z_of, std::size_t L,
                                      const Matrix& dist, double D);
// channel[x1 * |X2| + x2][y].
AdnProblem build_mac(const std::vector<double>& p_x1,
                     const std::vector<double>& p_x2, const Matrix& channel,
                     std::size_t L1, std::size_t L2);
// p_u1u2[u1][u2]; x_of[u1][u2]; channel[x][y1 * |Y2| + y2].
AdnProblem build_broadcast(const Matrix& p_u1u2, const IndexMap& x_of,
                           const Matrix& channel, std::size_t y1_size,
                           std::size_t L1, std::size_t L2);
// p_yr_given_x[x][yr]; p_u_given_yr[yr][u]; xr_of[yr][u];
// channel[(x * |Yr| + yr) * |Xr| + xr][y].
AdnProblem build_relay(const std::vector<double>& p_x, const Matrix& p_yr_given_x,
                       const Matrix& p_u_given_yr, const IndexMap& xr_of,
                       std::size_t xr_size, const Matrix& channel, std::size_t L);
// p_uv_given_x[x][u * |V| + v]; p_z_given_yuv[(y * |U| + u) * |V| + v][z];
// dist[x * |Y| + y][z].
AdnProblem build_cascade(const std::vector<double>& p_x, const Matrix& p_y_given_x,
                         const Matrix& p_uv_given_x, std::size_t u_size,
                         const Matrix& p_z_given_yuv, std::size_t L1,
                         std::size_t L2, std::size_t L3, const Matrix& dist,
                         double D);

// Closed-form corollary bounds evaluated by direct enumeration of the
// single-letter joint laws (independent of the generic machinery).
double p2p_corollary_bound(const std::vector<double>& p_x, const Matrix& channel,
                           std::size_t L);
double gelfand_pinsker_corollary_bound(const std::vector<double>& p_s,
                                       const Matrix& p_u_given_s,
                                       const IndexMap& x_of,
                                       const Matrix& channel, std::size_t L);
double wyner_ziv_corollary_bound(const std::vector<double>& p_x,
                                 const Matrix& p_t_given_x,
                                 const Matrix& p_u_given_x, const IndexMap& z_of,
                                 std::size_t L, const Matrix& dist, double D);
double mac_corollary_bound(const std::vector<double>& p_x1,
                           const std::vector<double>& p_x2,
                           const Matrix& channel, std::size_t L1, std::size_t L2);
double broadcast_corollary_bound(const Matrix& p_u1u2, const IndexMap& x_of,
                                 const Matrix& channel, std::size_t y1_size,
                                 std::size_t L1, std::size_t L2);
double relay_corollary_bound(const std::vector<double>& p_x,
                             const Matrix& p_yr_given_x,
                             const Matrix& p_u_given_yr, const IndexMap& xr_of,
                             std::size_t xr_size, const Matrix& channel,
                             std::size_t L);

// Small named instances used by the CLI and the acceptance run. `noise` is
// the crossover probability of every binary/quaternary symmetric channel in
// the instance and L the message count of each encoder. `corollary` is the
// closed-form bound for the instance, NaN where none is implemented.
struct AdnPreset {
  AdnProblem problem;
  double corollary = 0.0;
};

// Names: p2p, gelfand_pinsker, wyner_ziv, mac, broadcast, relay, cascade.
const std::vector<std::string>& adn_preset_names();
AdnPreset adn_preset(const std::string& name, double noise = 0.1, std::size_t L = 1);

}  // namespace oneshot
