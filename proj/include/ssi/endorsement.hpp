#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ssi/identity.hpp"
#include "ssi/shamir.hpp"
#include "ssi/vdr.hpp"

namespace ssi::endorsement {

enum class ControllerMode { Single, Multisignature, SecretSharing };

std::string_view mode_tag(ControllerMode mode);
std::optional<ControllerMode> parse_mode(std::string_view tag);

enum class RequestKind { DidIssue, VcIssue };
enum class Decision { Approve, Reject };
enum class ManageAction { Update, Revoke };

struct IssuerConfig {
    std::string consumer_id;
    ControllerMode mode = ControllerMode::Single;
    unsigned threshold = 1;  // t; multisignature accepts at t+1, shamir at t
    unsigned total = 1;      // n entities
    std::uint64_t reviewer_seed = 1;
    // the paper splits DID and VC issuing across agent types; here they are
    // capability flags on one profile
    bool issues_dids = true;
    bool issues_vcs = true;
};

// Per-entity material dispatched once at controller setup: a signing
// keypair under the multisignature pattern, a key share under secret
// sharing.
struct EntityCredential {
    std::string entity_id;
    std::optional<crypto::KeyPair> keys;
    std::optional<crypto::Share> share;
};

struct ApprovalMaterial {
    std::optional<crypto::Signature> partial;
    std::optional<crypto::Share> share;

    static ApprovalMaterial from_partial(crypto::Signature signature) {
        return ApprovalMaterial{std::move(signature), std::nullopt};
    }
    static ApprovalMaterial from_share(crypto::Share share) {
        return ApprovalMaterial{std::nullopt, std::move(share)};
    }
};

struct ApprovalState {
    std::size_t valid_approvals = 0;
    std::size_t required = 0;
    std::size_t rejections = 0;

    bool satisfied() const { return valid_approvals >= required; }
};

struct ReviewRequest {
    std::string request_id;
    RequestKind kind = RequestKind::DidIssue;
    Json payload;                        // reviewed content; approvers sign its digest
    crypto::Digest payload_digest{};
    std::vector<std::string> reviewers;  // seeded dispatch order
};

class ReviewPolicy {
public:
    virtual ~ReviewPolicy() = default;
    virtual bool approve(RequestKind kind, const Json& payload) const = 0;
};

class AutoApprove : public ReviewPolicy {
public:
    bool approve(RequestKind, const Json&) const override { return true; }
};

class ScriptedReview : public ReviewPolicy {
public:
    explicit ScriptedReview(std::function<bool(RequestKind, const Json&)> decide)
        : decide_(std::move(decide)) {}
    bool approve(RequestKind kind, const Json& payload) const override {
        return decide_(kind, payload);
    }

private:
    std::function<bool(RequestKind, const Json&)> decide_;
};

// Issuer agent: reviews identity and credential requests, mints DIDs and
// documents, signs credentials under one of the three controller modes, and
// manages issued subjects through the registry. Approval transitions are
// serialized per controller; a request can be issued at most once.
class Issuer {
public:
    Issuer(IssuerConfig config, std::shared_ptr<vdr::Vdr> registry,
           std::shared_ptr<const ReviewPolicy> policy = std::make_shared<AutoApprove>());

    const IssuerConfig& config() const { return config_; }
    crypto::PublicKey signing_public_key() const { return signing_public_; }
    const crypto::KeyPair& management_keys() const { return management_keys_; }
    const std::vector<EntityCredential>& entity_credentials() const { return entities_; }

    // the record the name service should publish for this consumer
    ConsumerIdentity identity() const;

    ReviewRequest open_did_request(const Json& proof_documents,
                                   const crypto::PublicKey& subject_public_key);

    // authenticates the subject against PK_u in its registered DID document
    // before the request becomes reviewable
    ReviewRequest open_vc_request(const std::string& subject_did,
                                  const std::map<std::string, std::string>& claims,
                                  const Json& proof_documents,
                                  const ChallengeTransport& holder);

    // two-step variant for wire use: begin hands out the encrypted nonce,
    // the answered form opens the request
    struct SubjectAuth {
        std::string auth_id;
        Bytes encoded;
    };
    SubjectAuth begin_subject_auth(const std::string& subject_did);
    ReviewRequest open_vc_request(const std::string& subject_did,
                                  const std::map<std::string, std::string>& claims,
                                  const Json& proof_documents, const std::string& auth_id,
                                  const Bytes& response);

    ApprovalState collect_approval(const std::string& request_id, const std::string& entity_id,
                                   Decision decision, const ApprovalMaterial& material);
    ApprovalState approval_state(const std::string& request_id) const;

    std::pair<std::string, DidDocument> issue_did(const ReviewRequest& request,
                                                  const crypto::PublicKey& subject_public_key);

    std::pair<VerifiableCredential, IssuerProof> issue_vc(
        const ReviewRequest& request, const std::string& subject_did,
        const std::map<std::string, std::string>& claims);

    vdr::RegistrationReceipt manage_subject(const std::string& subject_id, ManageAction action,
                                            const std::optional<Json>& new_payload = std::nullopt);

    // Migration keeps the consumer's keys; only the backing registry moves.
    void rebind_registry(std::shared_ptr<vdr::Vdr> registry);

private:
    struct Pending {
        ReviewRequest request;
        bool authenticated = false;
        std::map<std::string, Decision> decisions;
        std::vector<std::pair<crypto::PublicKey, crypto::Signature>> partials;
        std::vector<crypto::Share> shares;
        std::string subject_did;
        crypto::PublicKey subject_public_key;
        std::map<std::string, std::string> claims;
    };

    struct PendingAuth {
        std::string subject_did;
        Bytes nonce;
        Tick issued = 0;
    };

    std::size_t required_approvals() const;
    ReviewRequest register_request(Pending pending,
                                   std::optional<crypto::Digest> approval_digest = std::nullopt);
    ReviewRequest open_vc_request_authenticated(const std::string& subject_did,
                                                const std::map<std::string, std::string>& claims,
                                                const Json& proof_documents,
                                                const crypto::PublicKey& subject_key);
    Pending take_issuable(const std::string& request_id, RequestKind kind);
    IssuerProof make_proof(const crypto::Digest& digest, const Pending& pending);
    crypto::Signature sign_with_reconstructed_key(const crypto::Digest& digest,
                                                  const std::vector<crypto::Share>& shares);

    IssuerConfig config_;
    std::shared_ptr<vdr::Vdr> registry_;
    std::shared_ptr<const ReviewPolicy> policy_;

    crypto::PublicKey signing_public_;   // PK_s
    crypto::SecretKey signing_secret_;   // single mode only
    Bytes encrypted_signing_secret_;     // secret-sharing mode: sealed SK_s
    crypto::KeyPair management_keys_;
    std::vector<EntityCredential> entities_;
    std::vector<crypto::PublicKey> entity_public_keys_;

    mutable std::mutex mutex_;
    std::map<std::string, Pending> pending_;
    std::map<std::string, PendingAuth> pending_auth_;
    std::mt19937_64 reviewer_rng_;
    std::uint64_t request_counter_ = 0;
};

}  // namespace ssi::endorsement
