#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "ssi/bytes.hpp"

namespace ssi::crypto {

// Default scheme: Ed25519 signing with SHA-256 digests. Signatures are
// deterministic, which keeps the golden-file encodings stable; the same
// keypair also answers encrypted challenges through its X25519 twin.
enum class Algorithm {
    Ed25519,
};

std::string_view algorithm_tag(Algorithm algorithm);
std::optional<Algorithm> parse_algorithm(std::string_view tag);

struct PublicKey {
    Algorithm algorithm = Algorithm::Ed25519;
    Bytes bytes;

    bool operator==(const PublicKey&) const = default;
};

struct SecretKey {
    Algorithm algorithm = Algorithm::Ed25519;
    Bytes bytes;
};

struct KeyPair {
    PublicKey public_key;
    SecretKey secret_key;
};

struct Signature {
    Bytes bytes;
    std::string signer_hint;  // fingerprint of the signing public key

    bool operator==(const Signature&) const = default;
};

using Digest = std::array<std::uint8_t, 32>;

std::string to_hex(const Digest& digest);
Digest digest_from_hex(std::string_view hex);

// Short stable identifier for a public key; used as ledger submitter id
// and as the signer hint on signatures.
std::string fingerprint(const PublicKey& key);

KeyPair generate_keypair(Algorithm algorithm = Algorithm::Ed25519);
KeyPair generate_keypair(std::string_view algorithm_tag);

// Deterministic derivation from a 32-byte seed; test and fixture use only.
KeyPair keypair_from_seed(BytesView seed, Algorithm algorithm = Algorithm::Ed25519);

Signature sign(const SecretKey& key, BytesView message);
bool verify(const PublicKey& key, BytesView message, const Signature& signature);

Digest hash(BytesView data);
inline Digest hash(const std::string& text) { return hash(to_bytes(text)); }

// Challenge-response authentication: the verifier encrypts a fresh nonce to
// the subject's public key; only the matching secret key recovers it.
Bytes encode_challenge(BytesView message, const PublicKey& key);
Bytes respond_challenge(const SecretKey& key, BytesView encoded);  // throws DecryptionFailure

// Symmetric envelope (XSalsa20-Poly1305, random nonce prepended); used by
// the online wallet pattern and the secret-sharing controller.
inline constexpr std::size_t kSymmetricKeyBytes = 32;
Bytes symmetric_encrypt(BytesView key, BytesView plaintext);
Bytes symmetric_decrypt(BytesView key, BytesView sealed);  // throws DecryptionFailure

}  // namespace ssi::crypto
