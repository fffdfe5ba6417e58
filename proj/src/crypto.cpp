#include "ssi/crypto.hpp"

#include <sodium.h>

#include <mutex>

#include "ssi/errors.hpp"

namespace ssi::crypto {

namespace {

void ensure_sodium() {
    static std::once_flag flag;
    std::call_once(flag, [] {
        if (sodium_init() < 0) {
            raise(ErrorCode::Internal, "libsodium initialization failed");
        }
    });
}

void require_key(bool condition, const char* what) {
    if (!condition) {
        raise(ErrorCode::MalformedKey, what);
    }
}

// X25519 twin of an Ed25519 key, used for the challenge envelope.
std::array<std::uint8_t, crypto_box_PUBLICKEYBYTES> challenge_public(const PublicKey& key) {
    std::array<std::uint8_t, crypto_box_PUBLICKEYBYTES> out{};
    if (crypto_sign_ed25519_pk_to_curve25519(out.data(), key.bytes.data()) != 0) {
        raise(ErrorCode::MalformedKey, "public key has no encryption twin");
    }
    return out;
}

}  // namespace

std::string_view algorithm_tag(Algorithm algorithm) {
    switch (algorithm) {
        case Algorithm::Ed25519: return "ed25519";
    }
    return "ed25519";
}

std::optional<Algorithm> parse_algorithm(std::string_view tag) {
    if (tag == "ed25519" || tag.empty() || tag == "default") {
        return Algorithm::Ed25519;
    }
    return std::nullopt;
}

std::string to_hex(const Digest& digest) {
    return hex_encode(BytesView(digest.data(), digest.size()));
}

Digest digest_from_hex(std::string_view hex) {
    const Bytes raw = hex_decode(hex);
    if (raw.size() != std::tuple_size_v<Digest>) {
        raise(ErrorCode::MalformedKey, "digest must be 32 bytes");
    }
    Digest out{};
    std::copy(raw.begin(), raw.end(), out.begin());
    return out;
}

std::string fingerprint(const PublicKey& key) {
    Bytes material = to_bytes(algorithm_tag(key.algorithm));
    material.insert(material.end(), key.bytes.begin(), key.bytes.end());
    const Digest d = hash(material);
    return hex_encode(BytesView(d.data(), 8));
}

KeyPair generate_keypair(Algorithm algorithm) {
    ensure_sodium();
    switch (algorithm) {
        case Algorithm::Ed25519: {
            KeyPair kp;
            kp.public_key.algorithm = Algorithm::Ed25519;
            kp.secret_key.algorithm = Algorithm::Ed25519;
            kp.public_key.bytes.resize(crypto_sign_PUBLICKEYBYTES);
            kp.secret_key.bytes.resize(crypto_sign_SECRETKEYBYTES);
            crypto_sign_keypair(kp.public_key.bytes.data(), kp.secret_key.bytes.data());
            return kp;
        }
    }
    raise(ErrorCode::UnsupportedAlgorithm, "unknown signature scheme");
}

KeyPair generate_keypair(std::string_view tag) {
    const auto algorithm = parse_algorithm(tag);
    if (!algorithm) {
        raise(ErrorCode::UnsupportedAlgorithm, std::string(tag));
    }
    return generate_keypair(*algorithm);
}

KeyPair keypair_from_seed(BytesView seed, Algorithm algorithm) {
    ensure_sodium();
    if (algorithm != Algorithm::Ed25519) {
        raise(ErrorCode::UnsupportedAlgorithm, "seeded generation supports ed25519 only");
    }
    require_key(seed.size() == crypto_sign_SEEDBYTES, "seed must be 32 bytes");
    KeyPair kp;
    kp.public_key.bytes.resize(crypto_sign_PUBLICKEYBYTES);
    kp.secret_key.bytes.resize(crypto_sign_SECRETKEYBYTES);
    crypto_sign_seed_keypair(kp.public_key.bytes.data(), kp.secret_key.bytes.data(), seed.data());
    return kp;
}

Signature sign(const SecretKey& key, BytesView message) {
    ensure_sodium();
    require_key(key.bytes.size() == crypto_sign_SECRETKEYBYTES, "secret key must be 64 bytes");
    Signature sig;
    sig.bytes.resize(crypto_sign_BYTES);
    crypto_sign_detached(sig.bytes.data(), nullptr, message.data(), message.size(),
                         key.bytes.data());

    PublicKey pk;
    pk.algorithm = key.algorithm;
    pk.bytes.assign(key.bytes.begin() + crypto_sign_SEEDBYTES, key.bytes.end());
    sig.signer_hint = fingerprint(pk);
    return sig;
}

bool verify(const PublicKey& key, BytesView message, const Signature& signature) {
    ensure_sodium();
    require_key(key.bytes.size() == crypto_sign_PUBLICKEYBYTES, "public key must be 32 bytes");
    if (signature.bytes.size() != crypto_sign_BYTES) {
        raise(ErrorCode::MalformedSignature, "signature must be 64 bytes");
    }
    return crypto_sign_verify_detached(signature.bytes.data(), message.data(), message.size(),
                                       key.bytes.data()) == 0;
}

Digest hash(BytesView data) {
    ensure_sodium();
    Digest out{};
    crypto_hash_sha256(out.data(), data.data(), data.size());
    return out;
}

Bytes encode_challenge(BytesView message, const PublicKey& key) {
    ensure_sodium();
    require_key(key.bytes.size() == crypto_sign_PUBLICKEYBYTES, "public key must be 32 bytes");
    const auto box_pk = challenge_public(key);
    Bytes out(message.size() + crypto_box_SEALBYTES);
    crypto_box_seal(out.data(), message.data(), message.size(), box_pk.data());
    return out;
}

Bytes respond_challenge(const SecretKey& key, BytesView encoded) {
    ensure_sodium();
    require_key(key.bytes.size() == crypto_sign_SECRETKEYBYTES, "secret key must be 64 bytes");
    if (encoded.size() < crypto_box_SEALBYTES) {
        raise(ErrorCode::DecryptionFailure, "challenge ciphertext truncated");
    }

    PublicKey pk;
    pk.algorithm = key.algorithm;
    pk.bytes.assign(key.bytes.begin() + crypto_sign_SEEDBYTES, key.bytes.end());
    const auto box_pk = challenge_public(pk);
    std::array<std::uint8_t, crypto_box_SECRETKEYBYTES> box_sk{};
    if (crypto_sign_ed25519_sk_to_curve25519(box_sk.data(), key.bytes.data()) != 0) {
        sodium_memzero(box_sk.data(), box_sk.size());
        raise(ErrorCode::MalformedKey, "secret key has no encryption twin");
    }

    Bytes out(encoded.size() - crypto_box_SEALBYTES);
    const int rc = crypto_box_seal_open(out.data(), encoded.data(), encoded.size(), box_pk.data(),
                                        box_sk.data());
    sodium_memzero(box_sk.data(), box_sk.size());
    if (rc != 0) {
        raise(ErrorCode::DecryptionFailure, "challenge does not open under this key");
    }
    return out;
}

Bytes symmetric_encrypt(BytesView key, BytesView plaintext) {
    ensure_sodium();
    require_key(key.size() == crypto_secretbox_KEYBYTES, "symmetric key must be 32 bytes");
    Bytes out(crypto_secretbox_NONCEBYTES + plaintext.size() + crypto_secretbox_MACBYTES);
    randombytes_buf(out.data(), crypto_secretbox_NONCEBYTES);
    crypto_secretbox_easy(out.data() + crypto_secretbox_NONCEBYTES, plaintext.data(),
                          plaintext.size(), out.data(), key.data());
    return out;
}

Bytes symmetric_decrypt(BytesView key, BytesView sealed) {
    ensure_sodium();
    require_key(key.size() == crypto_secretbox_KEYBYTES, "symmetric key must be 32 bytes");
    if (sealed.size() < crypto_secretbox_NONCEBYTES + crypto_secretbox_MACBYTES) {
        raise(ErrorCode::DecryptionFailure, "ciphertext truncated");
    }
    Bytes out(sealed.size() - crypto_secretbox_NONCEBYTES - crypto_secretbox_MACBYTES);
    if (crypto_secretbox_open_easy(out.data(), sealed.data() + crypto_secretbox_NONCEBYTES,
                                   sealed.size() - crypto_secretbox_NONCEBYTES, sealed.data(),
                                   key.data()) != 0) {
        raise(ErrorCode::DecryptionFailure, "ciphertext does not open under this key");
    }
    return out;
}

}  // namespace ssi::crypto
