#pragma once

#include <cstdint>
#include <vector>

#include "oneshot/stats.hpp"

namespace oneshot {

// A channel is stored row-per-input: ch[x][y] = P(y | x).
using Channel = std::vector<std::vector<double>>;
using ChannelSet = std::vector<Channel>;

// (1/(2 eps) + (|Y|+1)/2)^{|X||Y|}; upper bound on the eps-covering number
// of any set of channels from X to Y.
double covering_bound(std::size_t size_x, std::size_t size_y, double eps);

// max_x TV(a(.|x), b(.|x)).
double channel_distance(const Channel& a, const Channel& b);

// Scans the set in order and keeps every member not yet within eps of a
// kept member. The result is an eps-cover drawn from the set itself.
std::vector<std::size_t> greedy_cover(const ChannelSet& set, double eps);
bool is_cover(const ChannelSet& set, const std::vector<std::size_t>& chosen,
              double eps);

// n channels with rows drawn uniformly from the simplex.
ChannelSet random_channels(std::size_t n, std::size_t size_x, std::size_t size_y,
                           uint64_t seed);

// ---- Information hiding over an unknown attack channel ----

struct HidingSpec {
  std::vector<std::vector<double>> p_s;       // p_s[se][sd]
  std::vector<std::vector<double>> p_ux_given_se;  // [se][u * |X| + x]
  std::size_t u_size = 0;
  std::size_t x_size = 0;
  Channel a_hat;        // reference attack channel used by the decoder
  ChannelSet attacks;   // the attack set
  std::size_t L = 1;
  std::vector<std::vector<double>> d1;  // d1[se][x]
  double D1 = 0.0;
  std::vector<std::vector<double>> d2;  // d2[x][xhat]
  double D2 = 0.0;
  std::vector<std::vector<std::size_t>> xhat;  // xhat[m][y]
};

// Throws std::invalid_argument on malformed instances.
void validate(const HidingSpec& spec);

struct HidingRun {
  MeanStderr failure;
  // Decoder inputs (y, sd) whose reference posterior has zero mass; the
  // decoder falls back to a uniform posterior there.
  uint64_t zero_mass_inputs = 0;
};

// Each trial draws one codebook and evaluates its failure probability under
// the chosen attack exactly. The mean estimates the failure of the scheme.
HidingRun hiding_run(const HidingSpec& spec, std::size_t attack_index,
                     uint64_t trials, uint64_t seed);
// Same, but each trial records the worst attack for that codebook.
HidingRun hiding_run_worst(const HidingSpec& spec, uint64_t trials, uint64_t seed);

// E[1 - 1{d1 <= D1} 1{d2 <= D2} (1 + L P(U|Se) / Phat(U|Y,Sd))^{-1}] under
// the given attack, with the reconstruction evaluated at the true message.
double hiding_expectation(const HidingSpec& spec, const Channel& attack);
// |greedy cover| * sup_A hiding_expectation + eps.
double hiding_bound(const HidingSpec& spec, double eps);

// ---- Compound wiretap channel ----

struct WiretapSpec {
  std::vector<std::vector<double>> p_ux;  // p_ux[u][x]
  Channel y_hat;       // reference legitimate channel
  Channel z_hat;       // reference eavesdropper channel
  ChannelSet legit;    // the set D
  ChannelSet eaves;    // the set E
  std::size_t L = 1;
  std::size_t A = 1;
  std::size_t B = 1;
  double nu = 1.0;
  double eps1 = 0.0;
  double eps2 = 0.0;
};

// Cap on L * |Z| for the dense P_{M,Z} tables.
constexpr std::size_t kWiretapTableCap = 4096;

void validate(const WiretapSpec& spec);

struct WiretapRun {
  MeanStderr error;
  MeanStderr tv;
  MeanStderr combined;  // error + nu * tv, per codebook
};

// Exact per-codebook error under legit[d_index] and exact per-codebook
// TV(P_{M,Z}, P_M x P_Z) under eaves[e_index], averaged over codebooks.
WiretapRun wiretap_run(const WiretapSpec& spec, std::size_t d_index,
                       std::size_t e_index, uint64_t trials, uint64_t seed);
// Per codebook: worst legit channel and worst eavesdropper channel.
WiretapRun wiretap_run_worst(const WiretapSpec& spec, uint64_t trials, uint64_t seed);

struct WiretapBound {
  double error_term = 0.0;    // N1 * sup_D E[min(L A 2^{-ihat(U;Y)}, 1)] + eps1
  double secrecy_term = 0.0;  // N2 * (sup_E 2 E[(1 + 2^{-ihat(U;Z)})^{-B}] + sqrt(B/A)) + eps2
  double total = 0.0;         // error_term + nu * secrecy_term
  std::size_t cover_legit = 0;
  std::size_t cover_eaves = 0;
};

// Single-channel pieces of the bound, without covering penalties.
double wiretap_error_expectation(const WiretapSpec& spec, const Channel& legit);
double wiretap_secrecy_expectation(const WiretapSpec& spec, const Channel& eaves);
WiretapBound wiretap_bound(const WiretapSpec& spec);

// Random small instances for property tests and the CLI.
HidingSpec random_hiding_instance(uint64_t seed);
WiretapSpec random_wiretap_instance(uint64_t seed);

}  // namespace oneshot
