#include "oneshot/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace oneshot {

namespace {

constexpr uint32_t kM0 = 0xD2511F53u;
constexpr uint32_t kM1 = 0xCD9E8D57u;
constexpr uint32_t kW0 = 0x9E3779B9u;
constexpr uint32_t kW1 = 0xBB67AE85u;

inline void mulhilo(uint32_t a, uint32_t b, uint32_t& hi, uint32_t& lo) {
  const uint64_t p = static_cast<uint64_t>(a) * b;
  hi = static_cast<uint32_t>(p >> 32);
  lo = static_cast<uint32_t>(p);
}

inline double to_open01(uint64_t x) {
  return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

std::array<uint32_t, 4> philox4x32(std::array<uint32_t, 4> c,
                                   std::array<uint32_t, 2> k) {
  for (int r = 0; r < 10; ++r) {
    uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kM0, c[0], hi0, lo0);
    mulhilo(kM1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    k[0] += kW0;
    k[1] += kW1;
  }
  return c;
}

uint64_t mix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

uint64_t derive(uint64_t a, uint64_t b) { return mix64(mix64(a) ^ b); }

uint64_t derive(uint64_t a, uint64_t b, uint64_t c) {
  return derive(derive(a, b), c);
}

std::array<uint32_t, 4> SeededStream::next_block() {
  const std::array<uint32_t, 4> ctr = {
      static_cast<uint32_t>(counter_), static_cast<uint32_t>(counter_ >> 32),
      static_cast<uint32_t>(substream_),
      static_cast<uint32_t>(substream_ >> 32)};
  const std::array<uint32_t, 2> key = {static_cast<uint32_t>(seed_),
                                       static_cast<uint32_t>(seed_ >> 32)};
  ++counter_;
  return philox4x32(ctr, key);
}

uint64_t SeededStream::next_u64() {
  const auto b = next_block();
  return (static_cast<uint64_t>(b[1]) << 32) | b[0];
}

double SeededStream::uniform() { return to_open01(next_u64()); }

double SeededStream::exp() { return -std::log(uniform()); }

double SeededStream::normal() {
  const auto b = next_block();
  const double u1 = to_open01((static_cast<uint64_t>(b[1]) << 32) | b[0]);
  const double u2 = to_open01((static_cast<uint64_t>(b[3]) << 32) | b[2]);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

uint64_t SeededStream::below(uint64_t n) {
  if (n == 0) throw std::invalid_argument("below: n must be positive");
  // Lemire's multiply-shift with rejection of the biased low zone.
  const uint64_t threshold = (0 - n) % n;
  for (;;) {
    const uint64_t x = next_u64();
    const __uint128_t m = static_cast<__uint128_t>(x) * n;
    if (static_cast<uint64_t>(m) >= threshold)
      return static_cast<uint64_t>(m >> 64);
  }
}

double SeededStream::gamma(double shape) {
  if (!(shape > 0.0)) throw std::invalid_argument("gamma: shape must be > 0");
  // Gamma(1/2) is half a squared standard normal.
  if (shape == 0.5) {
    const double z = normal();
    return 0.5 * z * z;
  }
  if (shape < 1.0) {
    const double g = gamma(shape + 1.0);
    return g * std::pow(uniform(), 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double SeededStream::gamma_trunc01(double shape, uint64_t* attempts) {
  if (!(shape > 0.0 && shape < 1.0))
    throw std::invalid_argument("gamma_trunc01: shape must lie in (0,1)");
  uint64_t n = 0;
  double v;
  do {
    v = gamma(shape);
    ++n;
  } while (v > 1.0);
  if (attempts) *attempts = n;
  return v;
}

void SeededStream::gaussian_vec(std::span<const double> mean, double var,
                                std::span<double> out) {
  if (out.empty()) throw std::invalid_argument("gaussian_vec: dim must be > 0");
  if (mean.size() != out.size())
    throw std::invalid_argument("gaussian_vec: mean has wrong dimension");
  if (!(var > 0.0)) throw std::invalid_argument("gaussian_vec: var must be > 0");
  const double sd = std::sqrt(var);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = mean[i] + sd * normal();
}

std::vector<double> SeededStream::gaussian_vec(std::span<const double> mean,
                                               double var) {
  std::vector<double> out(mean.size());
  gaussian_vec(mean, var, out);
  return out;
}

void SeededStream::sphere_uniform(std::span<double> out) {
  if (out.empty()) throw std::invalid_argument("sphere_uniform: dim must be > 0");
  double norm2 = 0.0;
  do {
    norm2 = 0.0;
    for (double& v : out) {
      v = normal();
      norm2 += v * v;
    }
  } while (norm2 == 0.0);
  const double inv = 1.0 / std::sqrt(norm2);
  for (double& v : out) v *= inv;
}

std::vector<double> SeededStream::sphere_uniform(std::size_t dim) {
  std::vector<double> out(dim);
  sphere_uniform(out);
  return out;
}

std::vector<double> draw_gaussian_vec(SeededStream& s, std::size_t dim,
                                      std::span<const double> mean,
                                      double var) {
  if (dim == 0) throw std::invalid_argument("gaussian_vec: dim must be > 0");
  if (mean.size() != dim)
    throw std::invalid_argument("gaussian_vec: mean has wrong dimension");
  return s.gaussian_vec(mean, var);
}

std::vector<double> draw_sphere_uniform(SeededStream& s, std::size_t dim) {
  if (dim == 0) throw std::invalid_argument("sphere_uniform: dim must be > 0");
  return s.sphere_uniform(dim);
}

}  // namespace oneshot
