#include "sqka/hash.hpp"

#include <openssl/sha.h>

#include <array>
#include <stdexcept>

namespace sqka {

Bits commit_key(const Bits& key_bits, int digest_bits) {
  if (digest_bits <= 0 || digest_bits > 256 || digest_bits % 8 != 0)
    throw std::invalid_argument(
        "commit_key: digest length must be a positive multiple of 8, <= 256");

  const std::string ascii = bits_to_string(key_bits);
  std::array<unsigned char, SHA256_DIGEST_LENGTH> digest{};
  SHA256(reinterpret_cast<const unsigned char*>(ascii.data()), ascii.size(),
         digest.data());

  Bits out(static_cast<size_t>(digest_bits));
  for (int i = 0; i < digest_bits; ++i)
    out[static_cast<size_t>(i)] = (digest[static_cast<size_t>(i / 8)] >> (7 - i % 8)) & 1;
  return out;
}

std::string bits_to_hex(const Bits& bits) {
  if (bits.size() % 8 != 0)
    throw std::invalid_argument("bits_to_hex: length must be a multiple of 8");
  static const char* kHex = "0123456789abcdef";
  std::string out;
  out.reserve(bits.size() / 4);
  for (size_t i = 0; i < bits.size(); i += 4) {
    int nibble = (bits[i] << 3) | (bits[i + 1] << 2) | (bits[i + 2] << 1) | bits[i + 3];
    out.push_back(kHex[nibble]);
  }
  return out;
}

}  // namespace sqka
