#include "doctest.h"
#include "ssi/errors.hpp"
#include "ssi/verification.hpp"
#include "ssi/wallet.hpp"
#include "test_support.hpp"

using namespace ssi;
using namespace ssi::test;
using namespace ssi::verification;

namespace {

class ThrowingRegistry : public vdr::RegistryApi {
public:
    vdr::Challenge request_challenge(const crypto::PublicKey&) override { boom(); }
    vdr::RegistrationReceipt did_registration(const std::string&, const DidDocument&,
                                              const vdr::RegistrationAuth&) override {
        boom();
    }
    vdr::RegistrationReceipt vc_registration(const std::string&, const VerifiableCredential&,
                                             const IssuerProof&, const crypto::Signature&,
                                             const vdr::RegistrationAuth&) override {
        boom();
    }
    vdr::Resolution resolve(const std::string&) const override { boom(); }

private:
    [[noreturn]] static void boom() {
        raise(ErrorCode::LedgerUnavailable, "simulated outage");
    }
};

class ThrowingDirectory : public ConsumerDirectory {
public:
    std::optional<ConsumerIdentity> find_consumer(const std::string&) const override {
        raise(ErrorCode::LedgerUnavailable, "simulated outage");
    }
};

struct VerifyFixture : RegistryFixture {
    wallet::Wallet holder{wallet::WalletPattern::Offline, "pw", clock};
    std::string did;
    std::shared_ptr<Verifier> verifier;

    VerifyFixture() {
        const auto request = holder.create_identity("main");
        did = "did:test:alice";
        holder.register_did(*registry, did, make_document(did, request.public_key));

        VerifierConfig config;
        config.mode = VerifierMode::Host;
        config.registry = registry;
        config.directory = directory;
        config.expected_issuer = "acme";
        verifier = std::make_shared<Verifier>(config, clock);
    }

    VerifiableCredential issue_and_register(std::map<std::string, std::string> claims) {
        auto vc = make_vc(did, holder.find_did(did)->document.subject_public_key,
                          std::move(claims));
        const auto proof = sign_proof(vc, issuer_key);
        holder.register_vc(*registry, vc, proof);
        return holder.find_credential(vc.derived_id())->credential;
    }

    ChallengeTransport live_holder() { return holder.challenge_responder(did); }
};

std::vector<std::string> check_results(const VerificationReport& report) {
    std::vector<std::string> out;
    for (const auto& check : report.checks) {
        out.push_back(check.name + ":" +
                      (check.result == CheckResult::Pass
                           ? "pass"
                           : check.result == CheckResult::Fail ? "fail" : "skipped"));
    }
    return out;
}

}  // namespace

TEST_CASE("honest credential with a live holder verifies with four passes") {
    VerifyFixture fx;
    const auto vc = fx.issue_and_register({{"degree", "PhD"}});
    const auto report = fx.verifier->verify_vc(vc, fx.live_holder());

    CHECK(report.valid());
    CHECK(check_results(report) ==
          std::vector<std::string>{"status:pass", "holder_auth:pass", "issuer_existence:pass",
                                   "integrity:pass"});
    CHECK(report.subject == vc.derived_id());
}

TEST_CASE("revoked credential fails at status and skips the rest") {
    VerifyFixture fx;
    const auto vc = fx.issue_and_register({{"k", "v"}});
    fx.registry->revoke_subject(
        vc.derived_id(),
        vdr::ConsumerCredentials::sign("acme", fx.issuer_key, "revoke", vc.derived_id()));

    const auto report = fx.verifier->verify_vc(vc, fx.live_holder());
    CHECK_FALSE(report.valid());
    CHECK(check_results(report) ==
          std::vector<std::string>{"status:fail", "holder_auth:skipped",
                                   "issuer_existence:skipped", "integrity:skipped"});
    CHECK(report.checks[0].detail == "revoking mark present");
}

TEST_CASE("unregistered credential fails at status") {
    VerifyFixture fx;
    auto vc = fx.make_vc(fx.did, fx.holder.find_did(fx.did)->document.subject_public_key,
                         {{"never", "registered"}});
    vc.proof = fx.sign_proof(vc, fx.issuer_key);
    const auto report = fx.verifier->verify_vc(vc, fx.live_holder());
    CHECK_FALSE(report.valid());
    CHECK(report.checks[0].detail == "no registration found for H(VC)");
}

TEST_CASE("an absent or wrong holder fails authentication") {
    VerifyFixture fx;
    const auto vc = fx.issue_and_register({{"k", "v"}});

    SUBCASE("absent holder") {
        const ChallengeTransport absent = [](BytesView) -> Bytes {
            raise(ErrorCode::DecryptionFailure, "nobody home");
        };
        const auto report = fx.verifier->verify_vc(vc, absent);
        CHECK(check_results(report) ==
              std::vector<std::string>{"status:pass", "holder_auth:fail",
                                       "issuer_existence:skipped", "integrity:skipped"});
    }
    SUBCASE("an impostor with a different key") {
        const auto impostor = crypto::generate_keypair();
        const ChallengeTransport wrong = [&](BytesView encoded) -> Bytes {
            try {
                return crypto::respond_challenge(impostor.secret_key, encoded);
            } catch (const Error&) {
                return random_bytes(vdr::Vdr::kNonceBytes);
            }
        };
        const auto report = fx.verifier->verify_vc(vc, wrong);
        CHECK_FALSE(report.valid());
        CHECK(report.checks[1].result == CheckResult::Fail);
    }
}

TEST_CASE("issuer masquerade is caught at the existence check") {
    VerifyFixture fx;
    // a legitimately registered second consumer issues the credential, so
    // registration went through; the verifier expects acme
    const auto masq_key = crypto::generate_keypair();
    fx.directory->add(
        ConsumerIdentity{"masq-corp", "did:consumer:masq", masq_key.public_key, {}, {}, {}});

    auto vc = fx.make_vc(fx.did, fx.holder.find_did(fx.did)->document.subject_public_key,
                         {{"degree", "PhD"}});
    vc.issuer_id = "masq-corp";
    vc.issuer_public_key = masq_key.public_key;
    vc.vc_id = vc.derived_id();
    const auto proof = fx.sign_proof(vc, masq_key);
    fx.holder.register_vc(*fx.registry, vc, proof);  // registration succeeds

    const auto report =
        fx.verifier->verify_vc(fx.holder.find_credential(vc.vc_id)->credential, fx.live_holder());
    CHECK_FALSE(report.valid());
    CHECK(check_results(report) ==
          std::vector<std::string>{"status:pass", "holder_auth:pass", "issuer_existence:fail",
                                   "integrity:skipped"});
    CHECK(report.checks[2].detail.find("masq-corp") != std::string::npos);
}

TEST_CASE("double-check key source rejects a mismatching record") {
    VerifyFixture fx;
    const auto vc = fx.issue_and_register({{"k", "v"}});

    VerifierConfig config = fx.verifier->config();
    config.trusted_issuer_key = crypto::generate_keypair().public_key;  // published elsewhere
    Verifier strict(config, fx.clock);
    const auto report = strict.verify_vc(vc, fx.live_holder());
    CHECK_FALSE(report.valid());
    CHECK(report.checks[2].detail == "name service record differs from the published PK_s");
}

TEST_CASE("soundness: every single-field mutation flips the outcome") {
    VerifyFixture fx;
    const auto vc = fx.issue_and_register({{"degree", "PhD"}});
    REQUIRE(fx.verifier->verify_vc(vc, fx.live_holder()).valid());

    const auto expect_invalid = [&](VerifiableCredential mutated) {
        const auto report = fx.verifier->verify_vc(mutated, fx.live_holder());
        CHECK_FALSE(report.valid());
    };

    SUBCASE("claims value") {
        auto m = vc;
        m.claims["degree"] = "Forged";
        expect_invalid(m);
    }
    SUBCASE("added claim") {
        auto m = vc;
        m.claims["bonus"] = "yes";
        expect_invalid(m);
    }
    SUBCASE("issuer id") {
        auto m = vc;
        m.issuer_id = "someone-else";
        expect_invalid(m);
    }
    SUBCASE("issuer key") {
        auto m = vc;
        m.issuer_public_key = crypto::generate_keypair().public_key;
        expect_invalid(m);
    }
    SUBCASE("subject did") {
        auto m = vc;
        m.subject_did = "did:test:other";
        expect_invalid(m);
    }
    SUBCASE("subject key") {
        auto m = vc;
        m.subject_public_key = crypto::generate_keypair().public_key;
        expect_invalid(m);
    }
    SUBCASE("proof bytes") {
        auto m = vc;
        REQUIRE(m.proof.single.has_value());
        m.proof.single->bytes[0] ^= 0x01;
        expect_invalid(m);
    }
}

TEST_CASE("infrastructure failures are errors, not verdicts") {
    VerifyFixture fx;
    const auto vc = fx.issue_and_register({{"k", "v"}});

    SUBCASE("registry outage") {
        VerifierConfig config = fx.verifier->config();
        config.registry = std::make_shared<ThrowingRegistry>();
        Verifier broken(config, fx.clock);
        CHECK_THROWS_WITH_AS(broken.verify_vc(vc, fx.live_holder()),
                             doctest::Contains("registry_unreachable"), Error);
    }
    SUBCASE("name service outage") {
        VerifierConfig config = fx.verifier->config();
        config.directory = std::make_shared<ThrowingDirectory>();
        Verifier broken(config, fx.clock);
        CHECK_THROWS_WITH_AS(broken.verify_vc(vc, fx.live_holder()),
                             doctest::Contains("name_service_unreachable"), Error);
    }
}

TEST_CASE("presentations verify holder signature, nonce and every credential") {
    VerifyFixture fx;
    const auto vc1 = fx.issue_and_register({{"a", "1"}});
    const auto vc2 = fx.issue_and_register({{"b", "2"}});

    SUBCASE("two valid credentials pass") {
        const auto nonce = fx.verifier->issue_nonce();
        const auto vp = fx.holder.compose_presentation({vc1.vc_id, vc2.vc_id}, nonce);
        const auto report = fx.verifier->verify_presentation(vp, fx.live_holder());
        CHECK(report.valid());
        CHECK(report.checks.size() == 2 + 2 * 4);
    }
    SUBCASE("replaying the same nonce is stale") {
        const auto nonce = fx.verifier->issue_nonce();
        const auto vp = fx.holder.compose_presentation({vc1.vc_id}, nonce);
        CHECK(fx.verifier->verify_presentation(vp, fx.live_holder()).valid());
        CHECK_THROWS_WITH_AS(fx.verifier->verify_presentation(vp, fx.live_holder()),
                             doctest::Contains("stale_nonce"), Error);
    }
    SUBCASE("expired nonce is stale") {
        const auto nonce = fx.verifier->issue_nonce();
        const auto vp = fx.holder.compose_presentation({vc1.vc_id}, nonce);
        fx.clock->advance(fx.verifier->config().nonce_ttl + 1);
        CHECK_THROWS_WITH_AS(fx.verifier->verify_presentation(vp, fx.live_holder()),
                             doctest::Contains("stale_nonce"), Error);
    }
    SUBCASE("a nonce the verifier never issued is stale") {
        const auto vp = fx.holder.compose_presentation({vc1.vc_id}, random_bytes(16));
        CHECK_THROWS_AS(fx.verifier->verify_presentation(vp, fx.live_holder()), Error);
    }
    SUBCASE("a foreign holder's credential breaks subject binding") {
        // bob holds his own registered credential
        wallet::Wallet bob(wallet::WalletPattern::Offline, "pw", fx.clock);
        const auto bob_request = bob.create_identity("main");
        bob.register_did(*fx.registry, "did:test:bob",
                         fx.make_document("did:test:bob", bob_request.public_key));
        auto bob_vc = fx.make_vc("did:test:bob", bob_request.public_key, {{"c", "3"}});
        bob.register_vc(*fx.registry, bob_vc, fx.sign_proof(bob_vc, fx.issuer_key));

        const auto nonce = fx.verifier->issue_nonce();
        auto vp = fx.holder.compose_presentation({vc1.vc_id}, nonce);
        vp.disclosed_credentials.push_back(
            bob.find_credential(bob_vc.derived_id())->credential);
        const auto report = fx.verifier->verify_presentation(vp, fx.live_holder());
        CHECK_FALSE(report.valid());
        CHECK(report.checks[1].name == "subject_binding");
        CHECK(report.checks[1].result == CheckResult::Fail);
    }
    SUBCASE("a tampered holder signature fails") {
        const auto nonce = fx.verifier->issue_nonce();
        auto vp = fx.holder.compose_presentation({vc1.vc_id}, nonce);
        vp.holder_signature.bytes[0] ^= 0x01;
        const auto report = fx.verifier->verify_presentation(vp, fx.live_holder());
        CHECK_FALSE(report.valid());
        CHECK(report.checks[0].result == CheckResult::Fail);
    }
}

TEST_CASE("session flow equals the live flow byte for byte") {
    VerifyFixture fx;
    const auto vc = fx.issue_and_register({{"k", "v"}});

    SUBCASE("valid credential") {
        const auto live = fx.verifier->verify_vc(vc, fx.live_holder());

        const auto start = fx.verifier->begin_vc(vc);
        const auto response = fx.live_holder()(start.encoded_challenge);
        const auto session = fx.verifier->complete_vc(start.session_id, response);

        CHECK(live.to_json().dump() == session.to_json().dump());
    }
    SUBCASE("revoked credential") {
        fx.registry->revoke_subject(
            vc.derived_id(),
            vdr::ConsumerCredentials::sign("acme", fx.issuer_key, "revoke", vc.derived_id()));
        const auto live = fx.verifier->verify_vc(vc, fx.live_holder());
        const auto start = fx.verifier->begin_vc(vc);
        const auto session =
            fx.verifier->complete_vc(start.session_id, fx.live_holder()(start.encoded_challenge));
        CHECK(live.to_json().dump() == session.to_json().dump());
    }
    SUBCASE("sessions are single use") {
        const auto start = fx.verifier->begin_vc(vc);
        const auto response = fx.live_holder()(start.encoded_challenge);
        fx.verifier->complete_vc(start.session_id, response);
        CHECK_THROWS_WITH_AS(fx.verifier->complete_vc(start.session_id, response),
                             doctest::Contains("stale_nonce"), Error);
    }
    SUBCASE("a wrong session response fails holder auth") {
        const auto start = fx.verifier->begin_vc(vc);
        const auto report = fx.verifier->complete_vc(start.session_id, random_bytes(32));
        CHECK_FALSE(report.valid());
        CHECK(report.checks[1].result == CheckResult::Fail);
    }
    SUBCASE("presentation sessions") {
        const auto nonce = fx.verifier->issue_nonce();
        const auto vp = fx.holder.compose_presentation({vc.vc_id}, nonce);
        const auto start = fx.verifier->begin_vp(vp);
        const auto report =
            fx.verifier->complete_vp(start.session_id, fx.live_holder()(start.encoded_challenge));
        CHECK(report.valid());
    }
}

TEST_CASE("completeness: every honestly issued credential verifies") {
    VerifyFixture fx;
    for (int i = 0; i < 10; ++i) {
        const auto vc = fx.issue_and_register({{"run", std::to_string(i)}});
        CHECK(fx.verifier->verify_vc(vc, fx.live_holder()).valid());
    }
}
