#include "ssi/verification.hpp"

#include "ssi/errors.hpp"

namespace ssi::verification {

namespace {

std::string_view result_tag(CheckResult result) {
    switch (result) {
        case CheckResult::Pass: return "pass";
        case CheckResult::Fail: return "fail";
        case CheckResult::Skipped: return "skipped";
    }
    return "skipped";
}

// protocol order of the credential checks
constexpr std::array<std::string_view, 4> kCheckNames = {"status", "holder_auth",
                                                         "issuer_existence", "integrity"};

}  // namespace

std::string_view verifier_mode_tag(VerifierMode mode) {
    return mode == VerifierMode::Service ? "service" : "host";
}

std::optional<VerifierMode> parse_verifier_mode(std::string_view tag) {
    if (tag == "service") return VerifierMode::Service;
    if (tag == "host") return VerifierMode::Host;
    return std::nullopt;
}

Json VerificationReport::to_json() const {
    Json checks_json = Json::array();
    for (const auto& check : checks) {
        checks_json.push_back(Json{{"detail", check.detail},
                                   {"name", check.name},
                                   {"result", result_tag(check.result)}});
    }
    return Json{{"checks", checks_json},
                {"outcome", outcome == Outcome::Valid ? "valid" : "invalid"},
                {"subject", subject},
                {"version", 1}};
}

Verifier::Verifier(VerifierConfig config, ClockPtr clock)
    : config_(std::move(config)), clock_(std::move(clock)) {
    if (!config_.registry) {
        raise(ErrorCode::RegistryUnreachable, "verifier requires a registry endpoint");
    }
    if (!config_.directory) {
        raise(ErrorCode::NameServiceUnreachable, "verifier requires a name service endpoint");
    }
    if (!clock_) {
        raise(ErrorCode::Internal, "verifier requires a logical clock");
    }
}

Bytes Verifier::issue_nonce() {
    const Bytes nonce = random_bytes(16);
    std::lock_guard lock(mutex_);
    nonces_[hex_encode(nonce)] = clock_->now();
    return nonce;
}

void Verifier::consume_nonce(const Bytes& nonce) {
    std::lock_guard lock(mutex_);
    const auto it = nonces_.find(hex_encode(nonce));
    if (it == nonces_.end()) {
        raise(ErrorCode::StaleNonce, "presentation nonce was never issued or already used");
    }
    const Tick issued = it->second;
    nonces_.erase(it);  // single use
    if (clock_->now() > issued + config_.nonce_ttl) {
        raise(ErrorCode::StaleNonce, "presentation nonce expired");
    }
}

CheckEntry Verifier::check_status(const VerifiableCredential& vc) const {
    CheckEntry entry{"status", CheckResult::Fail, ""};
    vdr::Resolution resolution;
    try {
        resolution = config_.registry->resolve(vc.derived_id());
    } catch (const Error& error) {
        raise(ErrorCode::RegistryUnreachable,
              std::string("registry resolve failed: ") + error.what());
    }
    if (!resolution.status) {
        entry.detail = "no registration found for H(VC)";
        return entry;
    }
    if (*resolution.status == ledger::SubjectStatus::Revoked) {
        entry.detail = "revoking mark present";
        return entry;
    }
    entry.result = CheckResult::Pass;
    entry.detail = "registered and active";
    return entry;
}

CheckEntry Verifier::check_holder_auth(const crypto::PublicKey& subject_key,
                                       const ChallengeTransport& holder,
                                       const std::optional<Bytes>& nonce_override) const {
    CheckEntry entry{"holder_auth", CheckResult::Fail, ""};
    const Bytes nonce = nonce_override ? *nonce_override : random_bytes(vdr::Vdr::kNonceBytes);
    Bytes encoded;
    try {
        encoded = crypto::encode_challenge(nonce, subject_key);
    } catch (const Error&) {
        entry.detail = "subject key cannot receive challenges";
        return entry;
    }
    Bytes response;
    try {
        response = holder(encoded);
    } catch (...) {
        entry.detail = "holder did not answer the challenge";
        return entry;
    }
    if (response != nonce) {
        entry.detail = "challenge response mismatch";
        return entry;
    }
    entry.result = CheckResult::Pass;
    entry.detail = "nonce recovered";
    return entry;
}

CheckEntry Verifier::check_issuer_existence(const VerifiableCredential& vc,
                                            std::optional<ConsumerIdentity>& issuer_out) const {
    CheckEntry entry{"issuer_existence", CheckResult::Fail, ""};
    const std::string expected = config_.expected_issuer.value_or(vc.issuer_id);
    std::optional<ConsumerIdentity> identity;
    try {
        identity = config_.directory->find_consumer(expected);
    } catch (const Error& error) {
        raise(ErrorCode::NameServiceUnreachable,
              std::string("name service lookup failed: ") + error.what());
    }
    if (!identity) {
        entry.detail = "issuer " + expected + " is not a recognized service consumer";
        return entry;
    }
    if (vc.issuer_id != expected) {
        entry.detail = "credential names issuer " + vc.issuer_id + ", expected " + expected;
        return entry;
    }
    if (!(identity->primary_public_key == vc.issuer_public_key)) {
        entry.detail = "embedded PK_s differs from the name service record";
        return entry;
    }
    if (config_.trusted_issuer_key &&
        !(*config_.trusted_issuer_key == identity->primary_public_key)) {
        entry.detail = "name service record differs from the published PK_s";
        return entry;
    }
    issuer_out = std::move(identity);
    entry.result = CheckResult::Pass;
    entry.detail = "issuer recognized, PK_s matches";
    return entry;
}

CheckEntry Verifier::check_integrity(const VerifiableCredential& vc,
                                     const std::optional<ConsumerIdentity>& issuer) const {
    CheckEntry entry{"integrity", CheckResult::Fail, ""};
    if (!issuer) {
        entry.detail = "no issuer identity to check against";
        return entry;
    }
    if (vc.proof.empty()) {
        entry.detail = "credential carries no proof";
        return entry;
    }
    if (!proof_verifies(vc, *issuer)) {
        entry.detail = "proof P_u does not verify under PK_s";
        return entry;
    }
    entry.result = CheckResult::Pass;
    entry.detail = "proof verifies";
    return entry;
}

VerificationReport Verifier::verify_vc(const VerifiableCredential& vc,
                                       const ChallengeTransport& holder,
                                       const std::optional<Bytes>& nonce_override) {
    VerificationReport report;
    report.subject = vc.derived_id();
    report.checks.reserve(kCheckNames.size());

    std::optional<ConsumerIdentity> issuer;
    bool failed = false;
    for (const auto name : kCheckNames) {
        if (failed) {
            report.checks.push_back(CheckEntry{std::string(name), CheckResult::Skipped, ""});
            continue;
        }
        CheckEntry entry;
        if (name == "status") {
            entry = check_status(vc);
        } else if (name == "holder_auth") {
            entry = check_holder_auth(vc.subject_public_key, holder, nonce_override);
        } else if (name == "issuer_existence") {
            entry = check_issuer_existence(vc, issuer);
        } else {
            entry = check_integrity(vc, issuer);
        }
        failed = entry.result != CheckResult::Pass;
        report.checks.push_back(std::move(entry));
    }
    report.outcome = failed ? Outcome::Invalid : Outcome::Valid;
    return report;
}

VerificationReport Verifier::verify_presentation(const VerifiablePresentation& vp,
                                                 const ChallengeTransport& holder,
                                                 const std::optional<Bytes>& nonce_override) {
    if (vp.disclosed_credentials.empty()) {
        raise(ErrorCode::StaleNonce, "presentation discloses no credentials");
    }
    consume_nonce(vp.verifier_nonce);  // throws StaleNonce on replay or expiry

    VerificationReport report;
    report.subject = crypto::to_hex(vp.binding_digest());

    // presentation-level checks: the holder signature binds the nonce, and
    // every disclosed credential must describe the presenting holder
    const auto& anchor_key = vp.disclosed_credentials.front().subject_public_key;
    {
        CheckEntry entry{"holder_signature", CheckResult::Fail, ""};
        const auto digest = vp.binding_digest();
        if (crypto::verify(anchor_key, BytesView(digest.data(), digest.size()),
                           vp.holder_signature)) {
            entry.result = CheckResult::Pass;
            entry.detail = "signature binds the nonce";
        } else {
            entry.detail = "holder signature does not verify";
        }
        report.checks.push_back(std::move(entry));
    }
    {
        CheckEntry entry{"subject_binding", CheckResult::Pass, "all credentials name the holder"};
        for (const auto& credential : vp.disclosed_credentials) {
            if (credential.subject_did != vp.holder_did ||
                !(credential.subject_public_key == anchor_key)) {
                entry.result = CheckResult::Fail;
                entry.detail = "credential " + credential.derived_id() +
                               " does not belong to " + vp.holder_did;
                break;
            }
        }
        report.checks.push_back(std::move(entry));
    }

    const bool presentation_ok =
        report.checks[0].result == CheckResult::Pass &&
        report.checks[1].result == CheckResult::Pass;

    // one live challenge covers the whole presentation; its result feeds the
    // holder_auth slot of every credential block
    const CheckEntry auth =
        presentation_ok ? check_holder_auth(anchor_key, holder, nonce_override)
                        : CheckEntry{"holder_auth", CheckResult::Skipped, ""};

    bool all_valid = presentation_ok;
    for (std::size_t i = 0; i < vp.disclosed_credentials.size(); ++i) {
        const auto& credential = vp.disclosed_credentials[i];
        const std::string prefix = "vc" + std::to_string(i) + ".";
        std::optional<ConsumerIdentity> issuer;
        bool failed = !presentation_ok;
        for (const auto name : kCheckNames) {
            CheckEntry entry;
            if (failed) {
                entry = CheckEntry{std::string(name), CheckResult::Skipped, ""};
            } else if (name == "status") {
                entry = check_status(credential);
            } else if (name == "holder_auth") {
                entry = auth;
            } else if (name == "issuer_existence") {
                entry = check_issuer_existence(credential, issuer);
            } else {
                entry = check_integrity(credential, issuer);
            }
            failed = failed || entry.result != CheckResult::Pass;
            entry.name = prefix + std::string(name);
            report.checks.push_back(std::move(entry));
        }
        all_valid = all_valid && !failed;
    }

    report.outcome = all_valid ? Outcome::Valid : Outcome::Invalid;
    return report;
}

Verifier::SessionStart Verifier::open_session(Session session,
                                              const crypto::PublicKey& subject_key) {
    session.nonce = random_bytes(vdr::Vdr::kNonceBytes);
    session.issued = clock_->now();
    const Bytes encoded = crypto::encode_challenge(session.nonce, subject_key);

    std::lock_guard lock(mutex_);
    const std::string session_id = "vs-" + std::to_string(++session_counter_);
    sessions_[session_id] = std::move(session);
    return SessionStart{session_id, encoded};
}

Verifier::Session Verifier::take_session(const std::string& session_id) {
    std::lock_guard lock(mutex_);
    const auto it = sessions_.find(session_id);
    if (it == sessions_.end()) {
        raise(ErrorCode::StaleNonce, "unknown or already completed verification session");
    }
    Session session = std::move(it->second);
    sessions_.erase(it);
    if (clock_->now() > session.issued + config_.nonce_ttl) {
        raise(ErrorCode::StaleNonce, "verification session expired");
    }
    return session;
}

Verifier::SessionStart Verifier::begin_vc(const VerifiableCredential& vc) {
    Session session;
    session.vc = vc;
    return open_session(std::move(session), vc.subject_public_key);
}

VerificationReport Verifier::complete_vc(const std::string& session_id, const Bytes& response) {
    const Session session = take_session(session_id);
    if (!session.vc) {
        raise(ErrorCode::StaleNonce, "session was opened for a presentation");
    }
    const ChallengeTransport replay = [&response](BytesView) { return response; };
    return verify_vc(*session.vc, replay, session.nonce);
}

Verifier::SessionStart Verifier::begin_vp(const VerifiablePresentation& vp) {
    if (vp.disclosed_credentials.empty()) {
        raise(ErrorCode::StaleNonce, "presentation discloses no credentials");
    }
    Session session;
    session.vp = vp;
    return open_session(std::move(session), vp.disclosed_credentials.front().subject_public_key);
}

VerificationReport Verifier::complete_vp(const std::string& session_id, const Bytes& response) {
    const Session session = take_session(session_id);
    if (!session.vp) {
        raise(ErrorCode::StaleNonce, "session was opened for a single credential");
    }
    const ChallengeTransport replay = [&response](BytesView) { return response; };
    return verify_presentation(*session.vp, replay, session.nonce);
}

}  // namespace ssi::verification
