#include "ssi/vdr.hpp"

#include "ssi/errors.hpp"

namespace ssi::vdr {

Json RegistrationReceipt::to_json() const {
    return Json{{"finalized", finalized},
                {"record", Json::parse(record.to_json_line())}};
}

RegistrationReceipt RegistrationReceipt::from_json(const Json& j) {
    RegistrationReceipt receipt;
    receipt.finalized = j.at("finalized").get<bool>();
    receipt.record = ledger::LedgerRecord::from_json_line(j.at("record").dump());
    return receipt;
}

std::string ConsumerCredentials::action_payload(std::string_view action,
                                                const std::string& subject_id,
                                                const std::optional<crypto::Digest>& digest) {
    std::string payload(action);
    payload += '|';
    payload += subject_id;
    if (digest) {
        payload += '|';
        payload += crypto::to_hex(*digest);
    }
    return payload;
}

ConsumerCredentials ConsumerCredentials::sign(const std::string& consumer_id,
                                              const crypto::KeyPair& key, std::string_view action,
                                              const std::string& subject_id,
                                              const std::optional<crypto::Digest>& digest) {
    ConsumerCredentials credentials;
    credentials.consumer_id = consumer_id;
    credentials.signature =
        crypto::sign(key.secret_key, to_bytes(action_payload(action, subject_id, digest)));
    return credentials;
}

Vdr::Vdr(std::shared_ptr<ledger::Ledger> ledger,
         std::shared_ptr<const ConsumerDirectory> directory, crypto::KeyPair service_key)
    : ledger_(std::move(ledger)), directory_(std::move(directory)),
      service_key_(std::move(service_key)) {
    if (!ledger_ || !directory_) {
        raise(ErrorCode::Internal, "vdr requires a ledger and a consumer directory");
    }
}

Challenge Vdr::request_challenge(const crypto::PublicKey& subject_key) {
    Challenge challenge;
    challenge.challenge_id = hex_encode(random_bytes(16));
    const Bytes nonce = random_bytes(kNonceBytes);
    challenge.encoded = crypto::encode_challenge(nonce, subject_key);

    std::lock_guard lock(mutex_);
    challenges_[challenge.challenge_id] = PendingChallenge{
        nonce, crypto::fingerprint(subject_key), ledger_->clock()->now()};
    return challenge;
}

void Vdr::authenticate(const crypto::PublicKey& subject_key, const RegistrationAuth& auth,
                       const std::optional<std::string>& delegated_payload) {
    if (auth.challenge) {
        PendingChallenge pending;
        {
            std::lock_guard lock(mutex_);
            const auto it = challenges_.find(auth.challenge->challenge_id);
            if (it == challenges_.end()) {
                raise(ErrorCode::AuthenticationFailed, "unknown or already consumed challenge");
            }
            pending = it->second;
            challenges_.erase(it);  // single use, even on failure
        }
        if (pending.key_fingerprint != crypto::fingerprint(subject_key)) {
            raise(ErrorCode::AuthenticationFailed, "challenge was issued for a different key");
        }
        if (ledger_->clock()->now() > pending.issued + kChallengeTtl) {
            raise(ErrorCode::AuthenticationFailed, "challenge nonce expired");
        }
        if (auth.challenge->response != pending.nonce) {
            raise(ErrorCode::AuthenticationFailed, "challenge response does not match the nonce");
        }
        return;
    }
    if (auth.delegated_signature && delegated_payload) {
        if (!crypto::verify(subject_key, to_bytes(*delegated_payload),
                            *auth.delegated_signature)) {
            raise(ErrorCode::AuthenticationFailed, "delegated signature does not verify");
        }
        return;
    }
    raise(ErrorCode::AuthenticationFailed, "no authentication material supplied");
}

RegistrationReceipt Vdr::submit(ledger::EventKind kind, const std::string& subject_id,
                                const crypto::Digest& digest) {
    ledger::RecordDraft draft{kind, subject_id, digest};
    const auto record =
        ledger_->append(draft, ledger::SubmitterCredentials::for_draft(service_key_, draft));
    // simulate waiting out the consensus latency so the caller gets a
    // finalized transaction back
    ledger_->clock()->advance_until(record.timestamp);
    return RegistrationReceipt{record, true};
}

RegistrationReceipt Vdr::did_registration(const std::string& did, const DidDocument& document,
                                          const RegistrationAuth& auth) {
    if (document.did != did) {
        raise(ErrorCode::SubjectMismatch, "document does not describe " + did);
    }
    if (document.method() != ledger_->config().did_method) {
        raise(ErrorCode::SubjectMismatch, "did method '" + document.method() +
                                              "' does not belong to this registry");
    }
    if (!directory_->find_consumer(document.controller)) {
        raise(ErrorCode::UnrecognizedIssuer,
              "controller " + document.controller + " is not a registered consumer");
    }
    if (const auto latest = ledger_->query_latest(did);
        latest && latest->first == ledger::SubjectStatus::Active) {
        raise(ErrorCode::DuplicateDid, did + " already has an active registration");
    }

    authenticate(document.subject_public_key, auth, did);

    const auto receipt = submit(ledger::EventKind::DidRegistered, did, document.digest());
    std::lock_guard lock(mutex_);
    documents_[did] = document;
    controllers_[did] = document.controller;
    return receipt;
}

RegistrationReceipt Vdr::vc_registration(const std::string& did, const VerifiableCredential& vc,
                                         const IssuerProof& issuer_proof,
                                         const crypto::Signature& holder_sig,
                                         const RegistrationAuth& auth) {
    std::optional<DidDocument> document;
    {
        std::lock_guard lock(mutex_);
        if (const auto it = documents_.find(did); it != documents_.end()) {
            document = it->second;
        }
    }
    const auto did_status = ledger_->query_latest(did);
    if (!document || !did_status) {
        raise(ErrorCode::SubjectNotFound, did + " is not registered");
    }
    if (did_status->first == ledger::SubjectStatus::Revoked) {
        raise(ErrorCode::SubjectRevoked, did + " has been revoked");
    }

    // holder authentication: interactive challenge, or delegated through the
    // holder signature over H(VC) that is verified below either way
    if (auth.challenge) {
        authenticate(document->subject_public_key, auth, std::nullopt);
    }
    const crypto::Digest content = vc.content_digest();
    if (!crypto::verify(document->subject_public_key,
                        BytesView(content.data(), content.size()), holder_sig)) {
        raise(ErrorCode::AuthenticationFailed, "holder signature over H(VC) does not verify");
    }

    // the authenticated DID must be the credential subject
    if (vc.subject_did != did) {
        raise(ErrorCode::SubjectMismatch, "credential subject " + vc.subject_did +
                                              " differs from authenticated " + did);
    }
    if (vc.subject_public_key != document->subject_public_key) {
        raise(ErrorCode::SubjectMismatch, "credential embeds a foreign subject key");
    }

    const std::string vc_id = vc.derived_id();
    if (!vc.vc_id.empty() && vc.vc_id != vc_id) {
        raise(ErrorCode::SubjectMismatch, "vc_id does not match the content digest");
    }
    if (const auto latest = ledger_->query_latest(vc_id);
        latest && latest->first == ledger::SubjectStatus::Active) {
        raise(ErrorCode::DuplicateDid, "credential " + vc_id + " is already registered");
    }

    // issuer existence via the name service; the key embedded in the body
    // must match the directory record, which defeats proof forgery
    const auto issuer = directory_->find_consumer(vc.issuer_id);
    if (!issuer) {
        raise(ErrorCode::UnrecognizedIssuer,
              "issuer " + vc.issuer_id + " points to an unrecognized service consumer");
    }
    if (issuer->primary_public_key != vc.issuer_public_key) {
        raise(ErrorCode::UnrecognizedIssuer,
              "embedded issuer key does not match the name service record");
    }

    VerifiableCredential stored = vc;
    stored.vc_id = vc_id;
    stored.proof = issuer_proof;
    if (!proof_verifies(stored, *issuer)) {
        raise(ErrorCode::InvalidIssuerProof, "issuer proof fails under the registered key");
    }

    const auto receipt = submit(ledger::EventKind::VcRegistered, vc_id, content);
    std::lock_guard lock(mutex_);
    credentials_[vc_id] = std::move(stored);
    controllers_[vc_id] = vc.issuer_id;
    return receipt;
}

std::string Vdr::controller_of(const std::string& subject_id) const {
    std::lock_guard lock(mutex_);
    const auto it = controllers_.find(subject_id);
    return it == controllers_.end() ? std::string{} : it->second;
}

RegistrationReceipt Vdr::update_subject(const std::string& subject_id,
                                        const crypto::Digest& new_payload_digest,
                                        const ConsumerCredentials& credentials,
                                        const std::optional<Json>& new_content) {
    const auto latest = ledger_->query_latest(subject_id);
    if (!latest) {
        raise(ErrorCode::SubjectNotFound, subject_id + " is not registered");
    }
    if (latest->first == ledger::SubjectStatus::Revoked) {
        raise(ErrorCode::SubjectRevoked, subject_id + " has been revoked");
    }

    const auto consumer = directory_->find_consumer(credentials.consumer_id);
    if (!consumer ||
        !crypto::verify(consumer->effective_management_key(),
                        to_bytes(ConsumerCredentials::action_payload("update", subject_id,
                                                                     new_payload_digest)),
                        credentials.signature)) {
        raise(ErrorCode::Unauthorized, "consumer credentials do not verify");
    }
    if (controller_of(subject_id) != credentials.consumer_id) {
        raise(ErrorCode::Unauthorized,
              credentials.consumer_id + " does not control " + subject_id);
    }

    const bool is_did = [&] {
        std::lock_guard lock(mutex_);
        return documents_.contains(subject_id);
    }();
    if (new_content) {
        if (crypto::hash(to_bytes(new_content->dump())) != new_payload_digest) {
            raise(ErrorCode::SubjectMismatch, "new content does not match the declared digest");
        }
    }

    const auto receipt = submit(
        is_did ? ledger::EventKind::DidUpdated : ledger::EventKind::VcUpdated, subject_id,
        new_payload_digest);
    if (new_content) {
        std::lock_guard lock(mutex_);
        if (is_did) {
            documents_[subject_id] = DidDocument::from_json(*new_content);
        } else {
            credentials_[subject_id] = VerifiableCredential::from_json(*new_content);
        }
    }
    return receipt;
}

RegistrationReceipt Vdr::revoke_subject(const std::string& subject_id,
                                        const ConsumerCredentials& credentials) {
    const auto latest = ledger_->query_latest(subject_id);
    if (!latest) {
        raise(ErrorCode::SubjectNotFound, subject_id + " is not registered");
    }
    if (latest->first == ledger::SubjectStatus::Revoked) {
        raise(ErrorCode::AlreadyRevoked, subject_id + " is already revoked");
    }

    const auto consumer = directory_->find_consumer(credentials.consumer_id);
    if (!consumer ||
        !crypto::verify(
            consumer->effective_management_key(),
            to_bytes(ConsumerCredentials::action_payload("revoke", subject_id, std::nullopt)),
            credentials.signature)) {
        raise(ErrorCode::Unauthorized, "consumer credentials do not verify");
    }
    if (controller_of(subject_id) != credentials.consumer_id) {
        raise(ErrorCode::Unauthorized,
              credentials.consumer_id + " does not control " + subject_id);
    }

    // revoking mark: the payload digest commits to the revoked subject
    return submit(ledger::EventKind::Revoked, subject_id,
                  crypto::hash(to_bytes("revoked|" + subject_id)));
}

Resolution Vdr::resolve(const std::string& subject_id) const {
    Resolution resolution;
    if (const auto latest = ledger_->query_latest(subject_id)) {
        resolution.status = latest->first;
        resolution.payload_digest = latest->second.payload_digest;
    }
    resolution.history = ledger_->history(subject_id);
    return resolution;
}

std::optional<DidDocument> Vdr::find_document(const std::string& did) const {
    std::lock_guard lock(mutex_);
    const auto it = documents_.find(did);
    if (it == documents_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::optional<VerifiableCredential> Vdr::find_credential(const std::string& vc_id) const {
    std::lock_guard lock(mutex_);
    const auto it = credentials_.find(vc_id);
    if (it == credentials_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::map<std::string, Json> Vdr::export_store() const {
    std::lock_guard lock(mutex_);
    std::map<std::string, Json> store;
    for (const auto& [did, document] : documents_) {
        store["doc:" + did] = document.to_json();
    }
    for (const auto& [vc_id, credential] : credentials_) {
        store["vc:" + vc_id] = credential.to_json();
    }
    for (const auto& [subject, controller] : controllers_) {
        store["ctl:" + subject] = controller;
    }
    return store;
}

void Vdr::import_store(const std::map<std::string, Json>& store) {
    std::lock_guard lock(mutex_);
    for (const auto& [key, value] : store) {
        if (key.starts_with("doc:")) {
            documents_[key.substr(4)] = DidDocument::from_json(value);
        } else if (key.starts_with("vc:")) {
            credentials_[key.substr(3)] = VerifiableCredential::from_json(value);
        } else if (key.starts_with("ctl:")) {
            controllers_[key.substr(4)] = value.get<std::string>();
        }
    }
}

}  // namespace ssi::vdr
