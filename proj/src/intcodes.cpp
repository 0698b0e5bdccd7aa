#include "oneshot/intcodes.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

#include <boost/math/special_functions/zeta.hpp>

namespace oneshot {

std::string BitString::to_string() const {
  std::string s;
  s.reserve(bits.size());
  for (bool b : bits) s.push_back(b ? '1' : '0');
  return s;
}

BitString BitString::from_string(const std::string& s) {
  BitString out;
  out.bits.reserve(s.size());
  for (char c : s) {
    if (c != '0' && c != '1')
      throw std::invalid_argument("BitString: characters must be 0 or 1");
    out.bits.push_back(c == '1');
  }
  return out;
}

namespace {

inline unsigned floor_log2(uint64_t x) { return 63u - std::countl_zero(x); }

void append_bits(uint64_t value, unsigned width, BitString& out) {
  for (unsigned i = width; i-- > 0;) out.bits.push_back((value >> i) & 1u);
}

}  // namespace

void elias_delta_append(uint64_t k, BitString& out) {
  if (k == 0) throw std::invalid_argument("elias_delta: k must be >= 1");
  const unsigned n = floor_log2(k) + 1;
  const unsigned l = floor_log2(n);
  out.bits.insert(out.bits.end(), l, false);
  append_bits(n, l + 1, out);
  append_bits(k, n - 1, out);
}

BitString elias_delta_encode(uint64_t k) {
  BitString out;
  elias_delta_append(k, out);
  return out;
}

uint64_t elias_delta_decode(const BitString& bits, std::size_t* pos) {
  std::size_t p = *pos;
  const std::size_t end = bits.size();
  unsigned l = 0;
  while (p < end && !bits.bits[p]) {
    ++l;
    ++p;
  }
  if (p == end || l > 6)
    throw std::invalid_argument("elias_delta: malformed codeword");
  uint64_t n = 0;
  for (unsigned i = 0; i <= l; ++i) {
    if (p == end) throw std::invalid_argument("elias_delta: truncated codeword");
    n = (n << 1) | bits.bits[p++];
  }
  if (n > 64) throw std::invalid_argument("elias_delta: value too large");
  uint64_t k = 1;
  for (uint64_t i = 1; i < n; ++i) {
    if (p == end) throw std::invalid_argument("elias_delta: truncated codeword");
    k = (k << 1) | bits.bits[p++];
  }
  *pos = p;
  return k;
}

uint64_t elias_delta_decode(const BitString& bits) {
  std::size_t pos = 0;
  const uint64_t k = elias_delta_decode(bits, &pos);
  if (pos != bits.size())
    throw std::invalid_argument("elias_delta: trailing bits after codeword");
  return k;
}

std::size_t elias_delta_length(uint64_t k) {
  if (k == 0) throw std::invalid_argument("elias_delta: k must be >= 1");
  const unsigned n = floor_log2(k) + 1;
  return (n - 1) + 2 * floor_log2(n) + 1;
}

std::size_t zipf_shannon_length(uint64_t k, double lambda) {
  if (k == 0) throw std::invalid_argument("zipf: k must be >= 1");
  if (!(lambda > 1.0)) throw std::invalid_argument("zipf: lambda must be > 1");
  const double bits = lambda * std::log2(static_cast<double>(k)) +
                      std::log2(boost::math::zeta(lambda));
  // Guard against values like 2.0000000000000004 from rounding.
  return static_cast<std::size_t>(std::ceil(bits - 1e-12));
}

double choose_lambda(double mean_log2_k) {
  if (!(mean_log2_k > 0.0))
    throw std::invalid_argument("choose_lambda: E[log2 K] must be > 0");
  return 1.0 + 1.0 / mean_log2_k;
}

SizeBounds expected_size_bounds(double mean_log2_k) {
  if (!(mean_log2_k >= 0.0))
    throw std::invalid_argument("expected_size_bounds: E must be >= 0");
  const double e = mean_log2_k;
  return {e + 2.0 * std::log2(e + 1.0) + 1.0, e + std::log2(e + 1.0) + 2.0};
}

}  // namespace oneshot
