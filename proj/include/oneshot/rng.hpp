#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace oneshot {

// Philox4x32-10 block function. Pure integer arithmetic, so outputs are
// identical on every platform.
std::array<uint32_t, 4> philox4x32(std::array<uint32_t, 4> ctr,
                                   std::array<uint32_t, 2> key);

// 64-bit mixer used to derive substream labels from structured ids
// (trial, client, chunk, ...).
uint64_t mix64(uint64_t x);
uint64_t derive(uint64_t a, uint64_t b);
uint64_t derive(uint64_t a, uint64_t b, uint64_t c);

// Counter-based stream. Draw i of the stream labelled (seed, substream) is a
// pure function of (seed, substream, i), which is what makes jump_to O(1).
//
// Counter accounting: uniform(), exp() and normal() each consume exactly one
// counter value (one 128-bit Philox block). gamma() and gamma_trunc01() are
// rejection samplers and consume a variable number.
class SeededStream {
 public:
  explicit SeededStream(uint64_t seed = 0, uint64_t substream = 0)
      : seed_(seed), substream_(substream) {}

  uint64_t seed() const { return seed_; }
  uint64_t substream() const { return substream_; }
  uint64_t counter() const { return counter_; }

  // Positions the stream so that the next draw is draw k (0-indexed).
  SeededStream& jump_to(uint64_t k) {
    counter_ = k;
    return *this;
  }

  // Child stream with an independent label; the parent is not advanced.
  SeededStream split(uint64_t label) const {
    return SeededStream(seed_, derive(substream_, label));
  }

  std::array<uint32_t, 4> next_block();
  uint64_t next_u64();

  // U = (m + 1/2) / 2^53 with m uniform on [0, 2^53), so U lies strictly
  // inside (0,1) and -ln U is finite and positive.
  double uniform();
  double exp();
  // Box-Muller, cosine branch only, so one block per variate.
  double normal();
  // Uniform integer in [0, n).
  uint64_t below(uint64_t n);

  // Gamma(shape, 1) via Marsaglia-Tsang (with the U^{1/a} boost for a < 1).
  double gamma(double shape);
  // Gamma(shape, 1) conditioned on being <= 1, by redrawing until v <= 1.
  // If attempts is non-null it receives the number of gamma draws used.
  double gamma_trunc01(double shape, uint64_t* attempts = nullptr);

  void gaussian_vec(std::span<const double> mean, double var,
                    std::span<double> out);
  std::vector<double> gaussian_vec(std::span<const double> mean, double var);
  void sphere_uniform(std::span<double> out);
  std::vector<double> sphere_uniform(std::size_t dim);

 private:
  uint64_t seed_;
  uint64_t substream_;
  uint64_t counter_ = 0;
};

// Free-function spellings of the stream operations.
inline double draw_exp(SeededStream& s) { return s.exp(); }
inline double draw_gamma_trunc01(SeededStream& s, double shape,
                                 uint64_t* attempts = nullptr) {
  return s.gamma_trunc01(shape, attempts);
}
std::vector<double> draw_gaussian_vec(SeededStream& s, std::size_t dim,
                                      std::span<const double> mean,
                                      double var);
std::vector<double> draw_sphere_uniform(SeededStream& s, std::size_t dim);
inline SeededStream& jump_to(SeededStream& s, uint64_t k) {
  return s.jump_to(k);
}

}  // namespace oneshot
