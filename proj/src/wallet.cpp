#include "ssi/wallet.hpp"

#include <algorithm>

#include "ssi/errors.hpp"

namespace ssi::wallet {

namespace {

Bytes auth_digest_for(const std::string& password) {
    const auto digest = crypto::hash(to_bytes("wallet-auth|" + password));
    return Bytes(digest.begin(), digest.end());
}

Bytes export_key_for(const std::string& password) {
    const auto digest = crypto::hash(to_bytes("wallet-export|" + password));
    return Bytes(digest.begin(), digest.end());
}

Json keypair_to_json(const crypto::KeyPair& keys) {
    return Json{{"alg", crypto::algorithm_tag(keys.public_key.algorithm)},
                {"pk", hex_encode(keys.public_key.bytes)},
                {"sk", hex_encode(keys.secret_key.bytes)}};
}

crypto::KeyPair keypair_from_json(const Json& j) {
    crypto::KeyPair keys;
    const auto algorithm = crypto::parse_algorithm(j.at("alg").get<std::string>());
    if (!algorithm) {
        raise(ErrorCode::UnsupportedAlgorithm, j.at("alg").get<std::string>());
    }
    keys.public_key.algorithm = *algorithm;
    keys.secret_key.algorithm = *algorithm;
    keys.public_key.bytes = hex_decode(j.at("pk").get<std::string>());
    keys.secret_key.bytes = hex_decode(j.at("sk").get<std::string>());
    return keys;
}

}  // namespace

std::string_view pattern_tag(WalletPattern pattern) {
    return pattern == WalletPattern::Online ? "online" : "offline";
}

std::optional<WalletPattern> parse_wallet_pattern(std::string_view tag) {
    if (tag == "online") return WalletPattern::Online;
    if (tag == "offline") return WalletPattern::Offline;
    return std::nullopt;
}

void InMemoryRemoteStore::put(const std::string& id, const Bytes& blob) {
    if (!available_) {
        raise(ErrorCode::RemoteUnavailable, "remote store is down");
    }
    blobs_[id] = blob;
}

std::optional<Bytes> InMemoryRemoteStore::get(const std::string& id) const {
    if (!available_) {
        raise(ErrorCode::RemoteUnavailable, "remote store is down");
    }
    const auto it = blobs_.find(id);
    if (it == blobs_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::vector<std::string> InMemoryRemoteStore::list() const {
    if (!available_) {
        raise(ErrorCode::RemoteUnavailable, "remote store is down");
    }
    std::vector<std::string> ids;
    ids.reserve(blobs_.size());
    for (const auto& [id, blob] : blobs_) {
        ids.push_back(id);
    }
    return ids;
}

Wallet::Wallet(WalletPattern pattern, std::string password, ClockPtr clock)
    : pattern_(pattern), clock_(std::move(clock)), auth_digest_(auth_digest_for(password)) {
    if (!clock_) {
        raise(ErrorCode::Internal, "wallet requires a logical clock");
    }
    if (pattern_ == WalletPattern::Online) {
        content_key_ = random_bytes(crypto::kSymmetricKeyBytes);
    }
}

bool Wallet::unlock(const std::string& password) {
    const Tick now = clock_->now();
    if (now < lockout_until_) {
        raise(ErrorCode::AuthenticationFailed,
              "unlock retry budget exhausted; locked out until tick " +
                  std::to_string(lockout_until_));
    }
    if (auth_digest_for(password) == auth_digest_) {
        locked_ = false;
        failed_attempts_ = 0;
        return true;
    }
    if (++failed_attempts_ >= kUnlockAttempts) {
        failed_attempts_ = 0;
        lockout_until_ = now + kLockoutTicks;
    }
    return false;
}

void Wallet::require_unlocked() const {
    if (locked_) {
        raise(ErrorCode::WalletLocked, "unlock the wallet first");
    }
}

const crypto::KeyPair& Wallet::keypair_for(const crypto::PublicKey& key) const {
    for (const auto& [label, keys] : identities_) {
        if (keys.public_key == key) {
            return keys;
        }
    }
    raise(ErrorCode::KeyMismatch, "no wallet identity holds this public key");
}

const crypto::KeyPair& Wallet::keypair_for_did(const std::string& did) const {
    const auto it = dids_.find(did);
    if (it == dids_.end()) {
        raise(ErrorCode::NotSubject, did + " is not held by this wallet");
    }
    return keypair_for(it->second.document.subject_public_key);
}

DidRequest Wallet::create_identity(const std::string& label, Json proof_documents) {
    require_unlocked();
    if (identities_.contains(label)) {
        raise(ErrorCode::Internal, "identity label already in use: " + label);
    }
    identities_[label] = crypto::generate_keypair();
    return DidRequest{label, identities_[label].public_key, std::move(proof_documents)};
}

void Wallet::adopt_identity(const std::string& label, crypto::KeyPair keys) {
    require_unlocked();
    if (identities_.contains(label)) {
        raise(ErrorCode::Internal, "identity label already in use: " + label);
    }
    identities_[label] = std::move(keys);
}

crypto::Signature Wallet::make_delegation(const std::string& did,
                                          const crypto::PublicKey& key) const {
    require_unlocked();
    return crypto::sign(keypair_for(key).secret_key, to_bytes(did));
}

vdr::RegistrationReceipt Wallet::register_did(vdr::RegistryApi& registry,
                                              const std::string& issued_did,
                                              const DidDocument& document) {
    require_unlocked();
    // fail before any network call if the document names a foreign key
    const auto& keys = keypair_for(document.subject_public_key);

    const auto challenge = registry.request_challenge(keys.public_key);
    const auto response = crypto::respond_challenge(keys.secret_key, challenge.encoded);
    const auto receipt = registry.did_registration(
        issued_did, document,
        vdr::RegistrationAuth::answered(vdr::ChallengeAnswer{challenge.challenge_id, response}));

    dids_[issued_did] = StoredDid{document, receipt};
    return receipt;
}

vdr::RegistrationReceipt Wallet::register_vc(vdr::RegistryApi& registry, VerifiableCredential vc,
                                             const IssuerProof& issuer_proof) {
    require_unlocked();
    if (!dids_.contains(vc.subject_did)) {
        raise(ErrorCode::NotSubject, vc.subject_did + " is not held by this wallet");
    }
    const auto& keys = keypair_for_did(vc.subject_did);

    const auto digest = vc.content_digest();
    const auto holder_sig =
        crypto::sign(keys.secret_key, BytesView(digest.data(), digest.size()));
    if (vc.vc_id.empty()) {
        vc.vc_id = vc.derived_id();
    }

    const auto challenge = registry.request_challenge(keys.public_key);
    const auto response = crypto::respond_challenge(keys.secret_key, challenge.encoded);
    const auto receipt = registry.vc_registration(
        vc.subject_did, vc, issuer_proof, holder_sig,
        vdr::RegistrationAuth::answered(vdr::ChallengeAnswer{challenge.challenge_id, response}));

    // stored only after the registry accepted it
    const std::string stored_id = vc.vc_id;
    vc.proof = issuer_proof;
    credentials_[stored_id] = StoredCredential{std::move(vc), receipt};
    return receipt;
}

VerifiablePresentation Wallet::compose_presentation(
    const std::vector<std::string>& credential_ids, BytesView verifier_nonce) const {
    require_unlocked();
    if (credential_ids.empty()) {
        raise(ErrorCode::UnknownCredential, "presentation needs at least one credential");
    }

    VerifiablePresentation vp;
    for (const auto& id : credential_ids) {
        const auto it = credentials_.find(id);
        if (it == credentials_.end()) {
            raise(ErrorCode::UnknownCredential, id + " is not held by this wallet");
        }
        const auto& credential = it->second.credential;
        if (vp.holder_did.empty()) {
            vp.holder_did = credential.subject_did;
        } else if (vp.holder_did != credential.subject_did) {
            raise(ErrorCode::NotSubject, "selected credentials span multiple holders");
        }
        vp.disclosed_credentials.push_back(credential);
    }
    vp.verifier_nonce = Bytes(verifier_nonce.begin(), verifier_nonce.end());

    const auto& keys = keypair_for_did(vp.holder_did);
    const auto digest = vp.binding_digest();
    vp.holder_signature = crypto::sign(keys.secret_key, BytesView(digest.data(), digest.size()));
    return vp;
}

ChallengeResponder Wallet::challenge_responder(const std::string& did) const {
    require_unlocked();
    // a value copy of the keypair, so the responder outlives wallet locking
    const crypto::KeyPair keys = keypair_for_did(did);
    return [keys](BytesView encoded) { return crypto::respond_challenge(keys.secret_key, encoded); };
}

std::vector<std::string> Wallet::list_dids() const {
    std::vector<std::string> out;
    for (const auto& [did, entry] : dids_) {
        out.push_back(did);
    }
    return out;
}

std::vector<std::string> Wallet::list_credentials() const {
    std::vector<std::string> out;
    for (const auto& [vc_id, entry] : credentials_) {
        out.push_back(vc_id);
    }
    return out;
}

std::optional<StoredDid> Wallet::find_did(const std::string& did) const {
    const auto it = dids_.find(did);
    if (it == dids_.end()) return std::nullopt;
    return it->second;
}

std::optional<StoredCredential> Wallet::find_credential(const std::string& vc_id) const {
    const auto it = credentials_.find(vc_id);
    if (it == credentials_.end()) return std::nullopt;
    return it->second;
}

Json Wallet::entries_json() const {
    Json identities = Json::object();
    for (const auto& [label, keys] : identities_) {
        identities[label] = keypair_to_json(keys);
    }
    Json dids = Json::object();
    for (const auto& [did, entry] : dids_) {
        dids[did] = Json{{"document", entry.document.to_json()},
                         {"receipt", entry.receipt.to_json()}};
    }
    Json credentials = Json::object();
    for (const auto& [vc_id, entry] : credentials_) {
        credentials[vc_id] = Json{{"credential", entry.credential.to_json()},
                                  {"receipt", entry.receipt.to_json()}};
    }
    return Json{{"credentials", credentials}, {"dids", dids}, {"identities", identities}};
}

void Wallet::load_entries(const Json& j) {
    for (const auto& [label, keys] : j.at("identities").items()) {
        identities_[label] = keypair_from_json(keys);
    }
    for (const auto& [did, entry] : j.at("dids").items()) {
        dids_[did] = StoredDid{DidDocument::from_json(entry.at("document")),
                               vdr::RegistrationReceipt::from_json(entry.at("receipt"))};
    }
    for (const auto& [vc_id, entry] : j.at("credentials").items()) {
        credentials_[vc_id] =
            StoredCredential{VerifiableCredential::from_json(entry.at("credential")),
                             vdr::RegistrationReceipt::from_json(entry.at("receipt"))};
    }
}

std::size_t Wallet::sync_online(RemoteStore& remote) {
    if (pattern_ != WalletPattern::Online) {
        raise(ErrorCode::Internal, "sync requires the online wallet pattern");
    }
    require_unlocked();

    std::size_t count = 0;
    const auto upload = [&](const std::string& kind, const std::string& key, const Json& body) {
        const Json entry{{"body", body}, {"key", key}, {"kind", kind}};
        const Bytes blob = crypto::symmetric_encrypt(content_key_, to_bytes(entry.dump()));
        const auto digest = crypto::hash(to_bytes("entry|" + kind + "|" + key));
        remote.put(crypto::to_hex(digest), blob);
        ++count;
    };
    for (const auto& [label, keys] : identities_) {
        upload("identity", label, keypair_to_json(keys));
    }
    for (const auto& [did, entry] : dids_) {
        upload("did", did,
               Json{{"document", entry.document.to_json()}, {"receipt", entry.receipt.to_json()}});
    }
    for (const auto& [vc_id, entry] : credentials_) {
        upload("credential", vc_id,
               Json{{"credential", entry.credential.to_json()},
                    {"receipt", entry.receipt.to_json()}});
    }
    return count;
}

std::size_t Wallet::restore_online(const RemoteStore& remote) {
    if (pattern_ != WalletPattern::Online) {
        raise(ErrorCode::Internal, "restore requires the online wallet pattern");
    }
    require_unlocked();

    std::size_t count = 0;
    for (const auto& id : remote.list()) {
        const auto blob = remote.get(id);
        if (!blob) {
            continue;
        }
        Bytes plaintext;
        try {
            plaintext = crypto::symmetric_decrypt(content_key_, *blob);
        } catch (const Error&) {
            continue;  // someone else's blob in a shared store
        }
        const Json entry = Json::parse(to_text(plaintext));
        const auto kind = entry.at("kind").get<std::string>();
        const auto key = entry.at("key").get<std::string>();
        const Json& body = entry.at("body");
        if (kind == "identity") {
            identities_[key] = keypair_from_json(body);
        } else if (kind == "did") {
            dids_[key] = StoredDid{DidDocument::from_json(body.at("document")),
                                   vdr::RegistrationReceipt::from_json(body.at("receipt"))};
        } else if (kind == "credential") {
            credentials_[key] =
                StoredCredential{VerifiableCredential::from_json(body.at("credential")),
                                 vdr::RegistrationReceipt::from_json(body.at("receipt"))};
        }
        ++count;
    }
    return count;
}

std::string Wallet::export_content_key() const {
    require_unlocked();
    if (pattern_ != WalletPattern::Online) {
        raise(ErrorCode::Internal, "only online wallets carry a content key");
    }
    return hex_encode(content_key_);
}

void Wallet::adopt_content_key(const std::string& hex) {
    require_unlocked();
    if (pattern_ != WalletPattern::Online) {
        raise(ErrorCode::Internal, "only online wallets carry a content key");
    }
    content_key_ = hex_decode(hex);
}

Json Wallet::export_container(const std::string& password) const {
    Json body{{"entries", entries_json()}};
    if (pattern_ == WalletPattern::Online) {
        body["content_key"] = hex_encode(content_key_);
    }
    const Bytes sealed = crypto::symmetric_encrypt(export_key_for(password), to_bytes(body.dump()));
    return Json{{"pattern", pattern_tag(pattern_)},
                {"payload", base64_encode(sealed)},
                {"version", 1}};
}

Wallet Wallet::import_container(const Json& container, const std::string& password,
                                ClockPtr clock) {
    const auto pattern = parse_wallet_pattern(container.at("pattern").get<std::string>());
    if (!pattern || container.at("version").get<int>() != 1) {
        raise(ErrorCode::SchemaError, "unsupported wallet container");
    }
    Bytes plaintext;
    try {
        plaintext = crypto::symmetric_decrypt(
            export_key_for(password), base64_decode(container.at("payload").get<std::string>()));
    } catch (const Error&) {
        raise(ErrorCode::AuthenticationFailed, "wrong wallet password");
    }
    const Json body = Json::parse(to_text(plaintext));

    Wallet wallet(*pattern, password, std::move(clock));
    wallet.load_entries(body.at("entries"));
    if (body.contains("content_key")) {
        wallet.content_key_ = hex_decode(body.at("content_key").get<std::string>());
    }
    return wallet;
}

}  // namespace ssi::wallet
