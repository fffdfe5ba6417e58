#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "ssi/clock.hpp"
#include "ssi/identity.hpp"
#include "ssi/vdr.hpp"

namespace ssi::verification {

enum class VerifierMode { Service, Host };

std::string_view verifier_mode_tag(VerifierMode mode);
std::optional<VerifierMode> parse_verifier_mode(std::string_view tag);

enum class CheckResult { Pass, Fail, Skipped };

struct CheckEntry {
    std::string name;
    CheckResult result = CheckResult::Skipped;
    std::string detail;
};

enum class Outcome { Valid, Invalid };

// Stable, versioned report: checks appear in protocol order, evaluation
// stops at the first failure and later checks stay Skipped.
struct VerificationReport {
    Outcome outcome = Outcome::Invalid;
    std::string subject;  // vc id or presentation digest
    std::vector<CheckEntry> checks;

    bool valid() const { return outcome == Outcome::Valid; }
    Json to_json() const;
};

struct VerifierConfig {
    VerifierMode mode = VerifierMode::Host;
    std::shared_ptr<const vdr::RegistryApi> registry;
    std::shared_ptr<const ConsumerDirectory> directory;
    Tick nonce_ttl = 60;
    // masquerade defense: when set, credentials must come from this consumer
    std::optional<std::string> expected_issuer;
    // optional second key source (issuer publishing PK_s out of band)
    std::optional<crypto::PublicKey> trusted_issuer_key;
};

// Verifier agent. Stateless between calls except the nonce and session
// caches; safe to share across threads.
class Verifier {
public:
    Verifier(VerifierConfig config, ClockPtr clock);

    const VerifierConfig& config() const { return config_; }

    // nonce for presentation binding; single use, expires after nonce_ttl
    Bytes issue_nonce();

    VerificationReport verify_vc(const VerifiableCredential& vc,
                                 const ChallengeTransport& holder,
                                 const std::optional<Bytes>& nonce_override = std::nullopt);

    VerificationReport verify_presentation(const VerifiablePresentation& vp,
                                           const ChallengeTransport& holder,
                                           const std::optional<Bytes>& nonce_override =
                                               std::nullopt);

    // Two-step drivers for the service pattern: begin returns the encrypted
    // holder challenge, complete replays the response into the same checks
    // host mode runs, so both modes produce identical reports.
    struct SessionStart {
        std::string session_id;
        Bytes encoded_challenge;
    };
    SessionStart begin_vc(const VerifiableCredential& vc);
    VerificationReport complete_vc(const std::string& session_id, const Bytes& response);
    SessionStart begin_vp(const VerifiablePresentation& vp);
    VerificationReport complete_vp(const std::string& session_id, const Bytes& response);

private:
    struct Session {
        std::optional<VerifiableCredential> vc;
        std::optional<VerifiablePresentation> vp;
        Bytes nonce;
        Tick issued = 0;
    };

    CheckEntry check_status(const VerifiableCredential& vc) const;
    CheckEntry check_holder_auth(const crypto::PublicKey& subject_key,
                                 const ChallengeTransport& holder,
                                 const std::optional<Bytes>& nonce_override) const;
    CheckEntry check_issuer_existence(const VerifiableCredential& vc,
                                      std::optional<ConsumerIdentity>& issuer_out) const;
    CheckEntry check_integrity(const VerifiableCredential& vc,
                               const std::optional<ConsumerIdentity>& issuer) const;
    void consume_nonce(const Bytes& nonce);
    SessionStart open_session(Session session, const crypto::PublicKey& subject_key);
    Session take_session(const std::string& session_id);

    VerifierConfig config_;
    ClockPtr clock_;

    mutable std::mutex mutex_;
    std::map<std::string, Tick> nonces_;
    std::map<std::string, Session> sessions_;
    std::uint64_t session_counter_ = 0;
};

}  // namespace ssi::verification
