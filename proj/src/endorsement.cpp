#include "ssi/endorsement.hpp"

#include <algorithm>

#include "ssi/errors.hpp"

namespace ssi::endorsement {

namespace {

BytesView digest_view(const crypto::Digest& digest) {
    return BytesView(digest.data(), digest.size());
}

}  // namespace

std::string_view mode_tag(ControllerMode mode) {
    switch (mode) {
        case ControllerMode::Single: return "single";
        case ControllerMode::Multisignature: return "multisignature";
        case ControllerMode::SecretSharing: return "secret-sharing";
    }
    return "single";
}

std::optional<ControllerMode> parse_mode(std::string_view tag) {
    if (tag == "single") return ControllerMode::Single;
    if (tag == "multisignature") return ControllerMode::Multisignature;
    if (tag == "secret-sharing") return ControllerMode::SecretSharing;
    return std::nullopt;
}

Issuer::Issuer(IssuerConfig config, std::shared_ptr<vdr::Vdr> registry,
               std::shared_ptr<const ReviewPolicy> policy)
    : config_(std::move(config)), registry_(std::move(registry)), policy_(std::move(policy)),
      reviewer_rng_(config_.reviewer_seed) {
    if (!registry_ || !policy_) {
        raise(ErrorCode::Internal, "issuer requires a registry and a review policy");
    }
    if (config_.mode != ControllerMode::Single) {
        if (config_.threshold < 1 || config_.threshold > config_.total) {
            raise(ErrorCode::InvalidThreshold, "need 1 <= t <= n");
        }
        if (config_.mode == ControllerMode::Multisignature &&
            config_.threshold + 1 > config_.total) {
            raise(ErrorCode::InvalidThreshold, "multisignature needs t + 1 <= n");
        }
    }

    management_keys_ = crypto::generate_keypair();
    switch (config_.mode) {
        case ControllerMode::Single: {
            auto keys = crypto::generate_keypair();
            signing_public_ = keys.public_key;
            signing_secret_ = keys.secret_key;
            break;
        }
        case ControllerMode::Multisignature: {
            // every entity holds its own signing key; the controller itself
            // never signs credentials
            signing_public_ = management_keys_.public_key;
            for (unsigned i = 0; i < config_.total; ++i) {
                auto keys = crypto::generate_keypair();
                entity_public_keys_.push_back(keys.public_key);
                entities_.push_back(
                    EntityCredential{"entity-" + std::to_string(i + 1), std::move(keys),
                                     std::nullopt});
            }
            break;
        }
        case ControllerMode::SecretSharing: {
            // SK_s is sealed under a fresh symmetric key, and only the key
            // shares leave the controller
            auto keys = crypto::generate_keypair();
            signing_public_ = keys.public_key;
            Bytes wrapping_key = random_bytes(crypto::kSymmetricKeyBytes);
            encrypted_signing_secret_ =
                crypto::symmetric_encrypt(wrapping_key, keys.secret_key.bytes);
            auto shares =
                crypto::split_secret(wrapping_key, config_.threshold, config_.total);
            for (unsigned i = 0; i < config_.total; ++i) {
                entities_.push_back(EntityCredential{"entity-" + std::to_string(i + 1),
                                                     std::nullopt, std::move(shares[i])});
            }
            secure_zero(wrapping_key);
            secure_zero(keys.secret_key.bytes);
            break;
        }
    }
}

ConsumerIdentity Issuer::identity() const {
    ConsumerIdentity identity;
    identity.consumer_id = config_.consumer_id;
    identity.did = "did:consumer:" + config_.consumer_id;
    identity.primary_public_key = signing_public_;
    identity.entity_public_keys = entity_public_keys_;
    if (config_.mode == ControllerMode::Multisignature) {
        identity.entity_threshold = config_.threshold;
    }
    identity.management_public_key = management_keys_.public_key;
    return identity;
}

std::size_t Issuer::required_approvals() const {
    switch (config_.mode) {
        case ControllerMode::Single: return 0;
        case ControllerMode::Multisignature: return config_.threshold + 1;
        case ControllerMode::SecretSharing: return config_.threshold;
    }
    return 0;
}

ReviewRequest Issuer::register_request(Pending pending,
                                       std::optional<crypto::Digest> approval_digest) {
    std::lock_guard lock(mutex_);
    pending.request.request_id = "req-" + std::to_string(++request_counter_);
    // approvers co-sign exactly what the eventual proof must cover: for a
    // credential that is H(VC), for a DID request the payload digest
    pending.request.payload_digest =
        approval_digest ? *approval_digest : crypto::hash(to_bytes(pending.request.payload.dump()));

    // seeded random reviewer dispatch order
    for (const auto& entity : entities_) {
        pending.request.reviewers.push_back(entity.entity_id);
    }
    std::shuffle(pending.request.reviewers.begin(), pending.request.reviewers.end(),
                 reviewer_rng_);

    const ReviewRequest request = pending.request;
    pending_[request.request_id] = std::move(pending);
    return request;
}

ReviewRequest Issuer::open_did_request(const Json& proof_documents,
                                       const crypto::PublicKey& subject_public_key) {
    Pending pending;
    pending.request.kind = RequestKind::DidIssue;
    pending.request.payload = Json{{"proofs", proof_documents},
                                   {"subject_key", key_to_json(subject_public_key)}};
    pending.subject_public_key = subject_public_key;
    pending.authenticated = true;  // key possession is proven later, at the VDR
    return register_request(std::move(pending));
}

ReviewRequest Issuer::open_vc_request_authenticated(
    const std::string& subject_did, const std::map<std::string, std::string>& claims,
    const Json& proof_documents, const crypto::PublicKey& subject_key) {
    // the reviewed payload is the exact unsigned credential body
    VerifiableCredential vc;
    vc.subject_did = subject_did;
    vc.subject_public_key = subject_key;
    vc.claims = claims;
    vc.issuer_id = config_.consumer_id;
    vc.issuer_public_key = signing_public_;

    Pending pending;
    pending.request.kind = RequestKind::VcIssue;
    pending.request.payload = Json{{"credential", Json::parse(vc.signing_payload())},
                                   {"proofs", proof_documents}};
    pending.authenticated = true;
    pending.subject_did = subject_did;
    pending.subject_public_key = subject_key;
    pending.claims = claims;
    return register_request(std::move(pending), vc.content_digest());
}

ReviewRequest Issuer::open_vc_request(const std::string& subject_did,
                                      const std::map<std::string, std::string>& claims,
                                      const Json& proof_documents,
                                      const ChallengeTransport& holder) {
    const auto document = registry_->find_document(subject_did);
    if (!document) {
        raise(ErrorCode::SubjectNotFound, subject_did + " is not registered");
    }

    // authenticate U by PK_u in R(D_u)
    const Bytes nonce = random_bytes(vdr::Vdr::kNonceBytes);
    const Bytes encoded = crypto::encode_challenge(nonce, document->subject_public_key);
    Bytes response;
    try {
        response = holder(encoded);
    } catch (const Error&) {
        raise(ErrorCode::AuthenticationFailed, "holder could not answer the challenge");
    }
    if (response != nonce) {
        raise(ErrorCode::AuthenticationFailed, "challenge response mismatch");
    }
    return open_vc_request_authenticated(subject_did, claims, proof_documents,
                                         document->subject_public_key);
}

Issuer::SubjectAuth Issuer::begin_subject_auth(const std::string& subject_did) {
    const auto document = registry_->find_document(subject_did);
    if (!document) {
        raise(ErrorCode::SubjectNotFound, subject_did + " is not registered");
    }
    SubjectAuth auth;
    auth.auth_id = hex_encode(random_bytes(16));
    const Bytes nonce = random_bytes(vdr::Vdr::kNonceBytes);
    auth.encoded = crypto::encode_challenge(nonce, document->subject_public_key);

    std::lock_guard lock(mutex_);
    pending_auth_[auth.auth_id] =
        PendingAuth{subject_did, nonce, registry_->backing_ledger()->clock()->now()};
    return auth;
}

ReviewRequest Issuer::open_vc_request(const std::string& subject_did,
                                      const std::map<std::string, std::string>& claims,
                                      const Json& proof_documents, const std::string& auth_id,
                                      const Bytes& response) {
    {
        std::lock_guard lock(mutex_);
        const auto it = pending_auth_.find(auth_id);
        if (it == pending_auth_.end()) {
            raise(ErrorCode::AuthenticationFailed, "unknown or already consumed subject auth");
        }
        const PendingAuth auth = it->second;
        pending_auth_.erase(it);
        if (auth.subject_did != subject_did) {
            raise(ErrorCode::AuthenticationFailed, "auth was begun for a different subject");
        }
        if (registry_->backing_ledger()->clock()->now() > auth.issued + vdr::Vdr::kChallengeTtl) {
            raise(ErrorCode::AuthenticationFailed, "subject auth expired");
        }
        if (response != auth.nonce) {
            raise(ErrorCode::AuthenticationFailed, "challenge response mismatch");
        }
    }
    const auto document = registry_->find_document(subject_did);
    if (!document) {
        raise(ErrorCode::SubjectNotFound, subject_did + " is not registered");
    }
    return open_vc_request_authenticated(subject_did, claims, proof_documents,
                                         document->subject_public_key);
}

ApprovalState Issuer::collect_approval(const std::string& request_id,
                                       const std::string& entity_id, Decision decision,
                                       const ApprovalMaterial& material) {
    std::lock_guard lock(mutex_);
    const auto it = pending_.find(request_id);
    if (it == pending_.end()) {
        raise(ErrorCode::NotFound, "request " + request_id + " is not pending");
    }
    Pending& pending = it->second;

    const auto entity = std::find_if(entities_.begin(), entities_.end(),
                                     [&](const EntityCredential& e) {
                                         return e.entity_id == entity_id;
                                     });
    if (entity == entities_.end()) {
        raise(ErrorCode::UnknownEntity, entity_id + " does not belong to this issuer");
    }
    if (pending.decisions.contains(entity_id)) {
        raise(ErrorCode::DuplicateApproval, entity_id + " already decided on " + request_id);
    }

    if (decision == Decision::Approve) {
        if (config_.mode == ControllerMode::Multisignature) {
            if (!material.partial ||
                !crypto::verify(entity->keys->public_key, digest_view(pending.request.payload_digest),
                                *material.partial)) {
                raise(ErrorCode::InvalidMaterial,
                      "partial signature from " + entity_id + " does not verify");
            }
            pending.partials.emplace_back(entity->keys->public_key, *material.partial);
        } else if (config_.mode == ControllerMode::SecretSharing) {
            if (!material.share || material.share->threshold != config_.threshold ||
                material.share->total != config_.total) {
                raise(ErrorCode::InvalidMaterial,
                      "share metadata from " + entity_id + " does not match this split");
            }
            pending.shares.push_back(*material.share);
        }
    }
    pending.decisions[entity_id] = decision;

    ApprovalState state;
    state.required = required_approvals();
    state.valid_approvals = config_.mode == ControllerMode::SecretSharing
                                ? pending.shares.size()
                                : pending.partials.size();
    for (const auto& [id, d] : pending.decisions) {
        if (d == Decision::Reject) ++state.rejections;
    }
    return state;
}

ApprovalState Issuer::approval_state(const std::string& request_id) const {
    std::lock_guard lock(mutex_);
    const auto it = pending_.find(request_id);
    if (it == pending_.end()) {
        raise(ErrorCode::NotFound, "request " + request_id + " is not pending");
    }
    ApprovalState state;
    state.required = required_approvals();
    state.valid_approvals = config_.mode == ControllerMode::SecretSharing
                                ? it->second.shares.size()
                                : it->second.partials.size();
    for (const auto& [id, d] : it->second.decisions) {
        if (d == Decision::Reject) ++state.rejections;
    }
    return state;
}

Issuer::Pending Issuer::take_issuable(const std::string& request_id, RequestKind kind) {
    std::lock_guard lock(mutex_);
    const auto it = pending_.find(request_id);
    if (it == pending_.end()) {
        raise(ErrorCode::NotFound, "request " + request_id + " is not pending");
    }
    if (it->second.request.kind != kind) {
        raise(ErrorCode::NotFound, "request " + request_id + " has a different kind");
    }
    if (!policy_->approve(kind, it->second.request.payload)) {
        pending_.erase(it);
        raise(ErrorCode::ReviewRejected, "review policy rejected " + request_id);
    }
    const std::size_t approvals = config_.mode == ControllerMode::SecretSharing
                                      ? it->second.shares.size()
                                      : it->second.partials.size();
    if (approvals < required_approvals()) {
        raise(ErrorCode::PolicyNotSatisfied,
              "have " + std::to_string(approvals) + " approvals, need " +
                  std::to_string(required_approvals()));
    }
    // removing the request here makes double-issue impossible even under
    // racing final approvals
    Pending pending = std::move(it->second);
    pending_.erase(it);
    return pending;
}

crypto::Signature Issuer::sign_with_reconstructed_key(
    const crypto::Digest& digest, const std::vector<crypto::Share>& shares) {
    Bytes wrapping_key;
    Bytes secret_bytes;
    try {
        wrapping_key = crypto::reconstruct_secret(shares);
        secret_bytes = crypto::symmetric_decrypt(wrapping_key, encrypted_signing_secret_);
    } catch (const Error& error) {
        secure_zero(wrapping_key);
        raise(ErrorCode::SigningFailure,
              std::string("signing key reconstruction failed: ") + error.what());
    }
    crypto::SecretKey reconstructed{crypto::Algorithm::Ed25519, secret_bytes};
    const auto signature = crypto::sign(reconstructed, digest_view(digest));
    // the reconstructed key lives only for this one signing call
    secure_zero(reconstructed.bytes);
    secure_zero(secret_bytes);
    secure_zero(wrapping_key);
    return signature;
}

IssuerProof Issuer::make_proof(const crypto::Digest& digest, const Pending& pending) {
    IssuerProof proof;
    switch (config_.mode) {
        case ControllerMode::Single:
            proof.single = crypto::sign(signing_secret_, digest_view(digest));
            break;
        case ControllerMode::Multisignature:
            proof.aggregate = crypto::aggregate_signatures(digest_view(digest), pending.partials,
                                                           config_.threshold);
            break;
        case ControllerMode::SecretSharing:
            proof.single = sign_with_reconstructed_key(digest, pending.shares);
            break;
    }
    return proof;
}

std::pair<std::string, DidDocument> Issuer::issue_did(
    const ReviewRequest& request, const crypto::PublicKey& subject_public_key) {
    if (!config_.issues_dids) {
        raise(ErrorCode::Unauthorized, config_.consumer_id + " does not issue DIDs");
    }
    const Pending pending = take_issuable(request.request_id, RequestKind::DidIssue);
    if (!(pending.subject_public_key == subject_public_key)) {
        raise(ErrorCode::SubjectMismatch, "request was opened for a different subject key");
    }

    const std::string method = registry_->backing_ledger()->config().did_method;
    const std::string did = "did:" + method + ":" + hex_encode(random_bytes(16));

    DidDocument document;
    document.did = did;
    document.subject_public_key = subject_public_key;
    document.controller = config_.consumer_id;
    document.verification_methods.push_back(VerificationMethod{
        did + "#keys-1", std::string(crypto::algorithm_tag(subject_public_key.algorithm)),
        hex_encode(subject_public_key.bytes)});
    return {did, document};
}

std::pair<VerifiableCredential, IssuerProof> Issuer::issue_vc(
    const ReviewRequest& request, const std::string& subject_did,
    const std::map<std::string, std::string>& claims) {
    if (!config_.issues_vcs) {
        raise(ErrorCode::Unauthorized, config_.consumer_id + " does not issue VCs");
    }
    const Pending pending = take_issuable(request.request_id, RequestKind::VcIssue);
    if (!pending.authenticated) {
        raise(ErrorCode::AuthenticationFailed, "subject was never authenticated");
    }
    if (pending.subject_did != subject_did || pending.claims != claims) {
        raise(ErrorCode::SubjectMismatch, "issue arguments differ from the reviewed request");
    }

    VerifiableCredential vc;
    vc.subject_did = pending.subject_did;
    vc.subject_public_key = pending.subject_public_key;
    vc.claims = pending.claims;
    vc.issuer_id = config_.consumer_id;
    vc.issuer_public_key = signing_public_;
    vc.vc_id = vc.derived_id();

    const IssuerProof proof = make_proof(vc.content_digest(), pending);
    return {vc, proof};
}

void Issuer::rebind_registry(std::shared_ptr<vdr::Vdr> registry) {
    if (!registry) {
        raise(ErrorCode::Internal, "cannot rebind to a null registry");
    }
    std::lock_guard lock(mutex_);
    registry_ = std::move(registry);
}

vdr::RegistrationReceipt Issuer::manage_subject(const std::string& subject_id,
                                                ManageAction action,
                                                const std::optional<Json>& new_payload) {
    if (action == ManageAction::Revoke) {
        return registry_->revoke_subject(
            subject_id, vdr::ConsumerCredentials::sign(config_.consumer_id, management_keys_,
                                                       "revoke", subject_id));
    }
    if (!new_payload) {
        raise(ErrorCode::Internal, "update requires the new payload");
    }
    const crypto::Digest digest = crypto::hash(to_bytes(new_payload->dump()));
    return registry_->update_subject(
        subject_id, digest,
        vdr::ConsumerCredentials::sign(config_.consumer_id, management_keys_, "update",
                                       subject_id, digest),
        new_payload);
}

}  // namespace ssi::endorsement
