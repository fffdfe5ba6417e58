#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "ssi/clock.hpp"
#include "ssi/identity.hpp"
#include "ssi/ledger.hpp"

namespace ssi::vdr {

struct RegistrationReceipt {
    ledger::LedgerRecord record;
    bool finalized = false;

    Json to_json() const;
    static RegistrationReceipt from_json(const Json& j);
};

struct Challenge {
    std::string challenge_id;
    Bytes encoded;  // nonce sealed to the subject's public key
};

struct ChallengeAnswer {
    std::string challenge_id;
    Bytes response;
};

// Either an interactive challenge answer or, for delegated registration,
// the subject's signature over the DID string.
struct RegistrationAuth {
    std::optional<ChallengeAnswer> challenge;
    std::optional<crypto::Signature> delegated_signature;

    static RegistrationAuth answered(ChallengeAnswer answer) {
        return RegistrationAuth{std::move(answer), std::nullopt};
    }
    static RegistrationAuth delegated(crypto::Signature signature) {
        return RegistrationAuth{std::nullopt, std::move(signature)};
    }
};

// Service-consumer proof for update/revoke; the signature covers the
// canonical action payload and must verify under the name-service PK_s.
struct ConsumerCredentials {
    std::string consumer_id;
    crypto::Signature signature;

    static std::string action_payload(std::string_view action, const std::string& subject_id,
                                      const std::optional<crypto::Digest>& digest);
    static ConsumerCredentials sign(const std::string& consumer_id, const crypto::KeyPair& key,
                                    std::string_view action, const std::string& subject_id,
                                    const std::optional<crypto::Digest>& digest = std::nullopt);
};

struct Resolution {
    std::optional<ledger::SubjectStatus> status;
    std::optional<crypto::Digest> payload_digest;
    std::vector<ledger::LedgerRecord> history;  // newest first
};

// Client-facing registry surface; implemented by Vdr directly and by the
// gateway-routed JSON client, so holder agents and verifiers are agnostic
// to how they reach the service.
class RegistryApi {
public:
    virtual ~RegistryApi() = default;
    virtual Challenge request_challenge(const crypto::PublicKey& subject_key) = 0;
    virtual RegistrationReceipt did_registration(const std::string& did,
                                                 const DidDocument& document,
                                                 const RegistrationAuth& auth) = 0;
    virtual RegistrationReceipt vc_registration(const std::string& did,
                                                const VerifiableCredential& vc,
                                                const IssuerProof& issuer_proof,
                                                const crypto::Signature& holder_sig,
                                                const RegistrationAuth& auth) = 0;
    virtual Resolution resolve(const std::string& subject_id) const = 0;
};

// Verifiable data registry over one ledger backend: the server side of the
// DID/VC registration protocols plus update, revocation and resolution.
// Nothing but identifiers and digests ever reaches the ledger; documents and
// credentials stay in the registry store.
class Vdr : public RegistryApi {
public:
    static constexpr Tick kChallengeTtl = 60;
    static constexpr std::size_t kNonceBytes = 32;

    Vdr(std::shared_ptr<ledger::Ledger> ledger,
        std::shared_ptr<const ConsumerDirectory> directory, crypto::KeyPair service_key);

    const std::shared_ptr<ledger::Ledger>& backing_ledger() const { return ledger_; }
    std::string writer_fingerprint() const { return crypto::fingerprint(service_key_.public_key); }

    // Single-use nonce bound to the subject key; expires after kChallengeTtl.
    Challenge request_challenge(const crypto::PublicKey& subject_key) override;

    RegistrationReceipt did_registration(const std::string& did, const DidDocument& document,
                                         const RegistrationAuth& auth) override;

    RegistrationReceipt vc_registration(const std::string& did, const VerifiableCredential& vc,
                                        const IssuerProof& issuer_proof,
                                        const crypto::Signature& holder_sig,
                                        const RegistrationAuth& auth) override;

    RegistrationReceipt update_subject(const std::string& subject_id,
                                       const crypto::Digest& new_payload_digest,
                                       const ConsumerCredentials& credentials,
                                       const std::optional<Json>& new_content = std::nullopt);

    RegistrationReceipt revoke_subject(const std::string& subject_id,
                                       const ConsumerCredentials& credentials);

    Resolution resolve(const std::string& subject_id) const override;

    std::optional<DidDocument> find_document(const std::string& did) const;
    std::optional<VerifiableCredential> find_credential(const std::string& vc_id) const;

    // Trusted migration hooks: move stored bodies without re-running protocols.
    std::map<std::string, Json> export_store() const;
    void import_store(const std::map<std::string, Json>& store);

private:
    void authenticate(const crypto::PublicKey& subject_key, const RegistrationAuth& auth,
                      const std::optional<std::string>& delegated_payload);
    RegistrationReceipt submit(ledger::EventKind kind, const std::string& subject_id,
                               const crypto::Digest& digest);
    std::string controller_of(const std::string& subject_id) const;

    struct PendingChallenge {
        Bytes nonce;
        std::string key_fingerprint;
        Tick issued = 0;
    };

    std::shared_ptr<ledger::Ledger> ledger_;
    std::shared_ptr<const ConsumerDirectory> directory_;
    crypto::KeyPair service_key_;

    mutable std::mutex mutex_;
    std::map<std::string, PendingChallenge> challenges_;
    std::map<std::string, DidDocument> documents_;
    std::map<std::string, VerifiableCredential> credentials_;
    std::map<std::string, std::string> controllers_;  // subject -> consumer id
};

}  // namespace ssi::vdr
