#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "ssi/bytes.hpp"
#include "ssi/crypto.hpp"
#include "ssi/multisig.hpp"

namespace ssi {

using Json = nlohmann::json;

// Carries an encrypted challenge to the holder and returns the recovered
// nonce; wallets vend these, tests script them.
using ChallengeTransport = std::function<Bytes(BytesView encoded)>;

// Key and signature JSON encodings are part of the wire contract: keys and
// digests travel as hex, signature bytes as base64. nlohmann::json orders
// object keys, so dump() of these representations is canonical.
Json key_to_json(const crypto::PublicKey& key);
crypto::PublicKey key_from_json(const Json& j);
Json signature_to_json(const crypto::Signature& signature);
crypto::Signature signature_from_json(const Json& j);

struct VerificationMethod {
    std::string id;
    std::string method_type;
    std::string public_key_hex;

    bool operator==(const VerificationMethod&) const = default;
};

struct DidDocument {
    std::string did;  // did:<method>:<unique-id>
    crypto::PublicKey subject_public_key;
    std::string controller;  // issuing service consumer
    std::vector<VerificationMethod> verification_methods;

    std::string method() const;
    std::string canonical_json() const;
    crypto::Digest digest() const;

    Json to_json() const;
    static DidDocument from_json(const Json& j);

    bool operator==(const DidDocument&) const = default;
};

std::string did_method_of(const std::string& did);

// Proof attached by the issuing consumer: one signature under PK_s, or a
// threshold aggregate whose key set verifiers resolve via the name service.
struct IssuerProof {
    std::optional<crypto::Signature> single;
    std::optional<crypto::SignatureSet> aggregate;

    bool is_aggregate() const { return aggregate.has_value(); }
    bool empty() const { return !single && !aggregate; }

    Json to_json() const;
    static IssuerProof from_json(const Json& j);
};

struct VerifiableCredential {
    std::string vc_id;  // hex of the content digest
    std::string subject_did;
    crypto::PublicKey subject_public_key;  // PK_u, carried for holder auth
    std::map<std::string, std::string> claims;
    std::string issuer_id;
    crypto::PublicKey issuer_public_key;  // PK_s as embedded by the issuer
    IssuerProof proof;

    // Canonical body without vc_id and proof; this is what the issuer signs
    // and what the ledger digests.
    std::string signing_payload() const;
    crypto::Digest content_digest() const;
    std::string derived_id() const;

    Json to_json() const;
    static VerifiableCredential from_json(const Json& j);
};

struct VerifiablePresentation {
    std::string holder_did;
    std::vector<VerifiableCredential> disclosed_credentials;
    Bytes verifier_nonce;
    crypto::Signature holder_signature;  // over digest of (credentials, holder, nonce)

    crypto::Digest binding_digest() const;

    Json to_json() const;
    static VerifiablePresentation from_json(const Json& j);
};

// What the name service certifies about a service consumer; the VDR and the
// verifiers use it as the authoritative source for PK_s.
struct ConsumerIdentity {
    std::string consumer_id;
    std::string did;
    crypto::PublicKey primary_public_key;  // PK_s
    std::vector<crypto::PublicKey> entity_public_keys;
    std::optional<std::size_t> entity_threshold;  // multisignature policy t
    // separate key for update/revoke credentials; a secret-sharing issuer
    // cannot sign management actions with its split PK_s
    std::optional<crypto::PublicKey> management_public_key;

    const crypto::PublicKey& effective_management_key() const {
        return management_public_key ? *management_public_key : primary_public_key;
    }
};

class ConsumerDirectory {
public:
    virtual ~ConsumerDirectory() = default;
    virtual std::optional<ConsumerIdentity> find_consumer(const std::string& consumer_id) const = 0;
};

// Issuer-proof integrity under the directory record, never under keys taken
// solely from the credential body.
bool proof_verifies(const VerifiableCredential& credential, const ConsumerIdentity& issuer);

}  // namespace ssi
