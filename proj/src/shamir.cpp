#include "ssi/shamir.hpp"

#include <algorithm>
#include <set>

#include "ssi/errors.hpp"

namespace ssi::crypto {

namespace gf256 {

std::uint8_t add(std::uint8_t a, std::uint8_t b) {
    return a ^ b;
}

std::uint8_t mul(std::uint8_t a, std::uint8_t b) {
    // carry-less multiplication reduced by x^8 + x^4 + x^3 + x + 1
    std::uint8_t product = 0;
    while (b != 0) {
        if (b & 1) {
            product ^= a;
        }
        const bool carry = a & 0x80;
        a = static_cast<std::uint8_t>(a << 1);
        if (carry) {
            a ^= 0x1b;
        }
        b >>= 1;
    }
    return product;
}

std::uint8_t inverse(std::uint8_t a) {
    if (a == 0) {
        raise(ErrorCode::Internal, "zero has no inverse in GF(256)");
    }
    // a^254 = a^-1 by Fermat in GF(2^8)
    std::uint8_t result = 1;
    std::uint8_t base = a;
    unsigned exponent = 254;
    while (exponent != 0) {
        if (exponent & 1) {
            result = mul(result, base);
        }
        base = mul(base, base);
        exponent >>= 1;
    }
    return result;
}

std::uint8_t eval_polynomial(BytesView coefficients, std::uint8_t x) {
    // Horner, coefficients[0] is the constant term
    std::uint8_t acc = 0;
    for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) {
        acc = static_cast<std::uint8_t>(mul(acc, x) ^ *it);
    }
    return acc;
}

}  // namespace gf256

std::vector<Share> split_secret(BytesView secret, unsigned threshold, unsigned total) {
    if (threshold < 1 || threshold > total || total > 255) {
        raise(ErrorCode::InvalidThreshold, "need 1 <= t <= n <= 255");
    }
    if (secret.empty()) {
        raise(ErrorCode::InvalidThreshold, "secret must be non-empty");
    }

    std::vector<Share> shares(total);
    for (unsigned i = 0; i < total; ++i) {
        shares[i].index = static_cast<std::uint8_t>(i + 1);
        shares[i].threshold = static_cast<std::uint8_t>(threshold);
        shares[i].total = static_cast<std::uint8_t>(total);
        shares[i].value.resize(secret.size());
    }

    Bytes coefficients(threshold);
    for (std::size_t byte = 0; byte < secret.size(); ++byte) {
        coefficients[0] = secret[byte];
        if (threshold > 1) {
            const Bytes randoms = random_bytes(threshold - 1);
            std::copy(randoms.begin(), randoms.end(), coefficients.begin() + 1);
        }
        for (auto& share : shares) {
            share.value[byte] = gf256::eval_polynomial(coefficients, share.index);
        }
    }
    secure_zero(coefficients);
    return shares;
}

Bytes reconstruct_secret(const std::vector<Share>& shares) {
    if (shares.empty()) {
        raise(ErrorCode::InsufficientShares, "no shares supplied");
    }
    const std::uint8_t threshold = shares.front().threshold;
    const std::uint8_t total = shares.front().total;
    const std::size_t length = shares.front().value.size();

    std::set<std::uint8_t> indices;
    for (const auto& share : shares) {
        if (share.threshold != threshold || share.total != total ||
            share.value.size() != length) {
            raise(ErrorCode::InconsistentShares, "shares come from different splits");
        }
        if (share.index == 0 || share.index > total) {
            raise(ErrorCode::InconsistentShares, "share index out of range");
        }
        if (!indices.insert(share.index).second) {
            raise(ErrorCode::InconsistentShares, "duplicate share index");
        }
    }
    if (shares.size() < threshold) {
        raise(ErrorCode::InsufficientShares, "fewer shares than the threshold");
    }

    // Lagrange interpolation at x = 0, byte column by byte column.
    Bytes secret(length, 0);
    for (std::size_t i = 0; i < shares.size(); ++i) {
        std::uint8_t weight = 1;
        for (std::size_t j = 0; j < shares.size(); ++j) {
            if (i == j) {
                continue;
            }
            const std::uint8_t xi = shares[i].index;
            const std::uint8_t xj = shares[j].index;
            weight = gf256::mul(weight, gf256::mul(xj, gf256::inverse(xi ^ xj)));
        }
        for (std::size_t byte = 0; byte < length; ++byte) {
            secret[byte] ^= gf256::mul(weight, shares[i].value[byte]);
        }
    }
    return secret;
}

}  // namespace ssi::crypto
