#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace oneshot {

// Bits are stored most-significant-first: bits[0] is the first bit written.
struct BitString {
  std::vector<bool> bits;

  std::size_t size() const { return bits.size(); }
  std::string to_string() const;
  static BitString from_string(const std::string& s);
  bool operator==(const BitString&) const = default;
};

// Elias delta: with N = floor(log2 k) + 1 and L = floor(log2 N), write L
// zeros, then N in L+1 bits, then the low N-1 bits of k.
BitString elias_delta_encode(uint64_t k);
void elias_delta_append(uint64_t k, BitString& out);
// Decodes one codeword starting at *pos and advances *pos. Throws
// std::invalid_argument on truncated or malformed input.
uint64_t elias_delta_decode(const BitString& bits, std::size_t* pos);
// Decodes a string holding exactly one codeword.
uint64_t elias_delta_decode(const BitString& bits);
std::size_t elias_delta_length(uint64_t k);

// Shannon code length for the Zipf law p(k) = k^{-lambda} / zeta(lambda).
std::size_t zipf_shannon_length(uint64_t k, double lambda);
double choose_lambda(double mean_log2_k);

struct SizeBounds {
  double elias = 0.0;
  double zipf = 0.0;
};
// (E + 2 log2(E+1) + 1, E + log2(E+1) + 2).
SizeBounds expected_size_bounds(double mean_log2_k);

}  // namespace oneshot
