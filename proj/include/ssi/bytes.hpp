#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ssi {

using Bytes = std::vector<std::uint8_t>;
using BytesView = std::span<const std::uint8_t>;

Bytes to_bytes(std::string_view text);
std::string to_text(BytesView data);

// Canonical encodings used throughout the JSON surfaces: keys and digests
// travel as lowercase hex, signatures as unpadded-free standard base64.
std::string hex_encode(BytesView data);
Bytes hex_decode(std::string_view hex);  // throws Error(MalformedKey) on bad input

std::string base64_encode(BytesView data);
Bytes base64_decode(std::string_view text);  // throws Error(MalformedSignature) on bad input

Bytes random_bytes(std::size_t count);

void secure_zero(Bytes& data);

}  // namespace ssi
