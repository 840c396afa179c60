#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sqka/rng.hpp"

namespace sqka {

/// A key, mask or measurement record: one entry per bit, values 0 or 1.
/// Serialized as a string of '0'/'1' characters, first bit leftmost.
using Bits = std::vector<uint8_t>;

inline Bits bits_from_string(std::string_view s) {
  Bits out;
  out.reserve(s.size());
  for (char c : s) {
    if (c != '0' && c != '1')
      throw std::invalid_argument("bit-string may contain only '0' and '1'");
    out.push_back(static_cast<uint8_t>(c - '0'));
  }
  return out;
}

inline std::string bits_to_string(const Bits& b) {
  std::string out;
  out.reserve(b.size());
  for (uint8_t v : b) out.push_back(v ? '1' : '0');
  return out;
}

inline Bits random_bits(size_t n, Rng& rng) {
  Bits out(n);
  for (auto& v : out) v = static_cast<uint8_t>(rng.bit());
  return out;
}

inline Bits xor_bits(const Bits& a, const Bits& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("xor_bits: length mismatch");
  Bits out(a.size());
  for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] ^ b[i];
  return out;
}

inline bool all_bits_equal(const Bits& b) {
  for (uint8_t v : b)
    if (v != b.front()) return false;
  return true;
}

}  // namespace sqka
