#pragma once

#include <string>

#include "sqka/bits.hpp"

namespace sqka {

inline constexpr int kDefaultDigestBits = 256;

/// Commitment digest of a party's original key: SHA-256 over the ASCII
/// '0'/'1' rendering of the key bits, truncated to the leading `digest_bits`
/// bits. `digest_bits` must be a positive multiple of 8, at most 256.
Bits commit_key(const Bits& key_bits, int digest_bits = kDefaultDigestBits);

/// Lowercase hex of a bit-string whose length is a multiple of 8
/// (the wire format for commitments).
std::string bits_to_hex(const Bits& bits);

}  // namespace sqka
