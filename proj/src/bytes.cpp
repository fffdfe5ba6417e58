#include "ssi/bytes.hpp"

#include <sodium.h>

#include "ssi/errors.hpp"

namespace ssi {

Bytes to_bytes(std::string_view text) {
    return Bytes(text.begin(), text.end());
}

std::string to_text(BytesView data) {
    return std::string(data.begin(), data.end());
}

std::string hex_encode(BytesView data) {
    std::string out(data.size() * 2 + 1, '\0');
    sodium_bin2hex(out.data(), out.size(), data.data(), data.size());
    out.resize(data.size() * 2);
    return out;
}

Bytes hex_decode(std::string_view hex) {
    Bytes out(hex.size() / 2 + 1);
    std::size_t written = 0;
    if (sodium_hex2bin(out.data(), out.size(), hex.data(), hex.size(), nullptr, &written,
                       nullptr) != 0) {
        raise(ErrorCode::MalformedKey, "invalid hex encoding");
    }
    out.resize(written);
    return out;
}

std::string base64_encode(BytesView data) {
    const std::size_t capacity = sodium_base64_encoded_len(data.size(), sodium_base64_VARIANT_ORIGINAL);
    std::string out(capacity, '\0');
    sodium_bin2base64(out.data(), out.size(), data.data(), data.size(),
                      sodium_base64_VARIANT_ORIGINAL);
    out.resize(out.find('\0'));
    return out;
}

Bytes base64_decode(std::string_view text) {
    Bytes out(text.size());
    std::size_t written = 0;
    if (sodium_base642bin(out.data(), out.size(), text.data(), text.size(), nullptr, &written,
                          nullptr, sodium_base64_VARIANT_ORIGINAL) != 0) {
        raise(ErrorCode::MalformedSignature, "invalid base64 encoding");
    }
    out.resize(written);
    return out;
}

Bytes random_bytes(std::size_t count) {
    Bytes out(count);
    randombytes_buf(out.data(), out.size());
    return out;
}

void secure_zero(Bytes& data) {
    if (!data.empty()) {
        sodium_memzero(data.data(), data.size());
    }
}

}  // namespace ssi
