#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ssi/clock.hpp"
#include "ssi/identity.hpp"
#include "ssi/vdr.hpp"

namespace ssi::wallet {

enum class WalletPattern { Online, Offline };

std::string_view pattern_tag(WalletPattern pattern);
std::optional<WalletPattern> parse_wallet_pattern(std::string_view tag);

// Online-pattern storage backend. A CloudLike store is only reachable
// through the interface; a DecentralizedLike store is transparent — anyone
// holding an id can fetch the blob, which is why blobs must be ciphertext.
class RemoteStore {
public:
    enum class Backend { CloudLike, DecentralizedLike };

    virtual ~RemoteStore() = default;
    virtual void put(const std::string& id, const Bytes& blob) = 0;
    virtual std::optional<Bytes> get(const std::string& id) const = 0;
    virtual std::vector<std::string> list() const = 0;
    virtual Backend backend() const = 0;
};

class InMemoryRemoteStore : public RemoteStore {
public:
    explicit InMemoryRemoteStore(Backend backend = Backend::CloudLike) : backend_(backend) {}

    void put(const std::string& id, const Bytes& blob) override;
    std::optional<Bytes> get(const std::string& id) const override;
    std::vector<std::string> list() const override;
    Backend backend() const override { return backend_; }

    void set_available(bool available) { available_ = available; }

private:
    Backend backend_;
    bool available_ = true;
    std::map<std::string, Bytes> blobs_;
};

struct DidRequest {
    std::string identity_label;
    crypto::PublicKey public_key;
    Json proof_documents;  // identity evidence forwarded to the issuer
};

struct StoredDid {
    DidDocument document;
    vdr::RegistrationReceipt receipt;
};

struct StoredCredential {
    VerifiableCredential credential;
    vdr::RegistrationReceipt receipt;
};

// Answers a verifier's encrypted challenge; wallets hand these out so the
// secret key never crosses the interface.
using ChallengeResponder = std::function<Bytes(BytesView encoded)>;

// Holder agent: key custody, the client side of both registration
// protocols, and presentation composition. Single-owner; callers serialize
// access if they share an instance.
class Wallet {
public:
    static constexpr int kUnlockAttempts = 5;
    static constexpr Tick kLockoutTicks = 60;

    Wallet(WalletPattern pattern, std::string password, ClockPtr clock);

    WalletPattern pattern() const { return pattern_; }
    bool locked() const { return locked_; }

    void lock() { locked_ = true; }
    bool unlock(const std::string& password);

    DidRequest create_identity(const std::string& label, Json proof_documents = Json::object());

    // Key import for externally provisioned identities (and deterministic
    // fixtures); custody rules apply from this point on.
    void adopt_identity(const std::string& label, crypto::KeyPair keys);

    // Produces Sig_u over the DID string for delegated registration.
    crypto::Signature make_delegation(const std::string& did, const crypto::PublicKey& key) const;

    vdr::RegistrationReceipt register_did(vdr::RegistryApi& registry, const std::string& issued_did,
                                          const DidDocument& document);

    vdr::RegistrationReceipt register_vc(vdr::RegistryApi& registry, VerifiableCredential vc,
                                         const IssuerProof& issuer_proof);

    VerifiablePresentation compose_presentation(const std::vector<std::string>& credential_ids,
                                                BytesView verifier_nonce) const;

    ChallengeResponder challenge_responder(const std::string& did) const;

    std::vector<std::string> list_dids() const;
    std::vector<std::string> list_credentials() const;
    std::optional<StoredDid> find_did(const std::string& did) const;
    std::optional<StoredCredential> find_credential(const std::string& vc_id) const;

    // Online pattern: encrypt every entry locally and upload; returns the
    // number of blobs synced. Restore rebuilds an empty wallet from the
    // remote using the same content key.
    std::size_t sync_online(RemoteStore& remote);
    std::size_t restore_online(const RemoteStore& remote);
    std::string export_content_key() const;  // recovery secret, online pattern
    void adopt_content_key(const std::string& hex);

    // Encrypted JSON container for file backup, both patterns.
    Json export_container(const std::string& password) const;
    static Wallet import_container(const Json& container, const std::string& password,
                                   ClockPtr clock);

private:
    void require_unlocked() const;
    const crypto::KeyPair& keypair_for(const crypto::PublicKey& key) const;
    const crypto::KeyPair& keypair_for_did(const std::string& did) const;
    Json entries_json() const;
    void load_entries(const Json& j);

    WalletPattern pattern_;
    ClockPtr clock_;
    Bytes auth_digest_;  // password check value
    Bytes content_key_;  // online-pattern encryption key
    bool locked_ = false;
    int failed_attempts_ = 0;
    Tick lockout_until_ = 0;

    std::map<std::string, crypto::KeyPair> identities_;  // label -> keys
    std::map<std::string, StoredDid> dids_;
    std::map<std::string, StoredCredential> credentials_;
};

}  // namespace ssi::wallet
