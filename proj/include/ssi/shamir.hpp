#pragma once

#include <cstdint>
#include <vector>

#include "ssi/bytes.hpp"

namespace ssi::crypto {

// Byte-wise Shamir sharing over GF(2^8): every secret byte is the constant
// term of an independent degree-(t-1) polynomial, and share i holds the
// evaluations at x = i.
struct Share {
    std::uint8_t index = 0;  // 1..total, never 0 (x = 0 is the secret)
    Bytes value;             // one field element per secret byte
    std::uint8_t threshold = 0;
    std::uint8_t total = 0;
};

std::vector<Share> split_secret(BytesView secret, unsigned threshold, unsigned total);

Bytes reconstruct_secret(const std::vector<Share>& shares);

// GF(2^8) arithmetic with the AES reduction polynomial; exposed so tests can
// cross-check shares against independently evaluated polynomials.
namespace gf256 {
std::uint8_t add(std::uint8_t a, std::uint8_t b);
std::uint8_t mul(std::uint8_t a, std::uint8_t b);
std::uint8_t inverse(std::uint8_t a);
std::uint8_t eval_polynomial(BytesView coefficients, std::uint8_t x);
}  // namespace gf256

}  // namespace ssi::crypto
