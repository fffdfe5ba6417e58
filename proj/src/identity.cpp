#include "ssi/identity.hpp"

#include "ssi/errors.hpp"

namespace ssi {

Json key_to_json(const crypto::PublicKey& key) {
    return Json{{"alg", crypto::algorithm_tag(key.algorithm)},
                {"hex", hex_encode(key.bytes)}};
}

crypto::PublicKey key_from_json(const Json& j) {
    crypto::PublicKey key;
    const auto algorithm = crypto::parse_algorithm(j.at("alg").get<std::string>());
    if (!algorithm) {
        raise(ErrorCode::UnsupportedAlgorithm, j.at("alg").get<std::string>());
    }
    key.algorithm = *algorithm;
    key.bytes = hex_decode(j.at("hex").get<std::string>());
    return key;
}

Json signature_to_json(const crypto::Signature& signature) {
    return Json{{"b64", base64_encode(signature.bytes)}, {"signer", signature.signer_hint}};
}

crypto::Signature signature_from_json(const Json& j) {
    crypto::Signature signature;
    signature.bytes = base64_decode(j.at("b64").get<std::string>());
    signature.signer_hint = j.at("signer").get<std::string>();
    return signature;
}

std::string did_method_of(const std::string& did) {
    // did:<method>:<unique-id>
    if (!did.starts_with("did:")) {
        return {};
    }
    const auto rest = did.substr(4);
    const auto colon = rest.find(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 >= rest.size()) {
        return {};
    }
    return rest.substr(0, colon);
}

std::string DidDocument::method() const {
    return did_method_of(did);
}

Json DidDocument::to_json() const {
    Json methods = Json::array();
    for (const auto& m : verification_methods) {
        methods.push_back(Json{{"id", m.id}, {"key", m.public_key_hex}, {"type", m.method_type}});
    }
    return Json{{"controller", controller},
                {"did", did},
                {"subject_key", key_to_json(subject_public_key)},
                {"verification_methods", methods}};
}

DidDocument DidDocument::from_json(const Json& j) {
    DidDocument doc;
    doc.did = j.at("did").get<std::string>();
    doc.controller = j.at("controller").get<std::string>();
    doc.subject_public_key = key_from_json(j.at("subject_key"));
    for (const auto& m : j.at("verification_methods")) {
        doc.verification_methods.push_back(VerificationMethod{
            m.at("id").get<std::string>(),
            m.at("type").get<std::string>(),
            m.at("key").get<std::string>(),
        });
    }
    return doc;
}

std::string DidDocument::canonical_json() const {
    return to_json().dump();
}

crypto::Digest DidDocument::digest() const {
    return crypto::hash(to_bytes(canonical_json()));
}

Json IssuerProof::to_json() const {
    if (aggregate) {
        Json partials = Json::array();
        for (const auto& [key, signature] : aggregate->partials) {
            partials.push_back(Json{{"key", key_to_json(key)},
                                    {"signature", signature_to_json(signature)}});
        }
        return Json{{"kind", "aggregate"},
                    {"partials", partials},
                    {"threshold", aggregate->threshold}};
    }
    if (single) {
        return Json{{"kind", "single"}, {"signature", signature_to_json(*single)}};
    }
    return Json{{"kind", "none"}};
}

IssuerProof IssuerProof::from_json(const Json& j) {
    IssuerProof proof;
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "single") {
        proof.single = signature_from_json(j.at("signature"));
    } else if (kind == "aggregate") {
        crypto::SignatureSet set;
        set.threshold = j.at("threshold").get<std::size_t>();
        for (const auto& partial : j.at("partials")) {
            set.partials.emplace_back(key_from_json(partial.at("key")),
                                      signature_from_json(partial.at("signature")));
        }
        proof.aggregate = std::move(set);
    } else if (kind != "none") {
        raise(ErrorCode::MalformedSignature, "unknown proof kind " + kind);
    }
    return proof;
}

std::string VerifiableCredential::signing_payload() const {
    return Json{{"claims", claims},
                {"issuer_id", issuer_id},
                {"issuer_key", key_to_json(issuer_public_key)},
                {"subject_did", subject_did},
                {"subject_key", key_to_json(subject_public_key)}}
        .dump();
}

crypto::Digest VerifiableCredential::content_digest() const {
    return crypto::hash(to_bytes(signing_payload()));
}

std::string VerifiableCredential::derived_id() const {
    return crypto::to_hex(content_digest());
}

Json VerifiableCredential::to_json() const {
    return Json{{"claims", claims},
                {"issuer_id", issuer_id},
                {"issuer_key", key_to_json(issuer_public_key)},
                {"proof", proof.to_json()},
                {"subject_did", subject_did},
                {"subject_key", key_to_json(subject_public_key)},
                {"vc_id", vc_id}};
}

VerifiableCredential VerifiableCredential::from_json(const Json& j) {
    VerifiableCredential vc;
    vc.vc_id = j.at("vc_id").get<std::string>();
    vc.subject_did = j.at("subject_did").get<std::string>();
    vc.subject_public_key = key_from_json(j.at("subject_key"));
    vc.claims = j.at("claims").get<std::map<std::string, std::string>>();
    vc.issuer_id = j.at("issuer_id").get<std::string>();
    vc.issuer_public_key = key_from_json(j.at("issuer_key"));
    vc.proof = IssuerProof::from_json(j.at("proof"));
    return vc;
}

crypto::Digest VerifiablePresentation::binding_digest() const {
    Json credentials = Json::array();
    for (const auto& vc : disclosed_credentials) {
        credentials.push_back(vc.to_json());
    }
    const Json j{{"credentials", credentials},
                 {"holder", holder_did},
                 {"nonce", hex_encode(verifier_nonce)}};
    return crypto::hash(to_bytes(j.dump()));
}

Json VerifiablePresentation::to_json() const {
    Json credentials = Json::array();
    for (const auto& vc : disclosed_credentials) {
        credentials.push_back(vc.to_json());
    }
    return Json{{"credentials", credentials},
                {"holder", holder_did},
                {"holder_signature", signature_to_json(holder_signature)},
                {"nonce", hex_encode(verifier_nonce)}};
}

VerifiablePresentation VerifiablePresentation::from_json(const Json& j) {
    VerifiablePresentation vp;
    vp.holder_did = j.at("holder").get<std::string>();
    for (const auto& credential : j.at("credentials")) {
        vp.disclosed_credentials.push_back(VerifiableCredential::from_json(credential));
    }
    vp.verifier_nonce = hex_decode(j.at("nonce").get<std::string>());
    vp.holder_signature = signature_from_json(j.at("holder_signature"));
    return vp;
}

bool proof_verifies(const VerifiableCredential& credential, const ConsumerIdentity& issuer) {
    const crypto::Digest digest = credential.content_digest();
    const BytesView message(digest.data(), digest.size());
    if (credential.proof.is_aggregate()) {
        if (issuer.entity_public_keys.empty()) {
            return false;  // directory does not advertise entity keys for this consumer
        }
        crypto::SignatureSet set = *credential.proof.aggregate;
        if (issuer.entity_threshold) {
            set.threshold = *issuer.entity_threshold;  // the directory policy wins
        }
        return crypto::verify_aggregate(message, set, issuer.entity_public_keys);
    }
    if (!credential.proof.single) {
        return false;
    }
    return crypto::verify(issuer.primary_public_key, message, *credential.proof.single);
}

}  // namespace ssi
