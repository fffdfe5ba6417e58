#include "ssi/errors.hpp"

namespace ssi {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::UnsupportedAlgorithm: return "unsupported_algorithm";
        case ErrorCode::MalformedKey: return "malformed_key";
        case ErrorCode::MalformedSignature: return "malformed_signature";
        case ErrorCode::DecryptionFailure: return "decryption_failure";
        case ErrorCode::InvalidThreshold: return "invalid_threshold";
        case ErrorCode::InsufficientShares: return "insufficient_shares";
        case ErrorCode::InconsistentShares: return "inconsistent_shares";
        case ErrorCode::ThresholdNotMet: return "threshold_not_met";
        case ErrorCode::InvalidPartial: return "invalid_partial";
        case ErrorCode::Unauthorized: return "unauthorized";
        case ErrorCode::LedgerUnavailable: return "ledger_unavailable";
        case ErrorCode::MasterUnavailable: return "master_unavailable";
        case ErrorCode::UnknownBundle: return "unknown_bundle";
        case ErrorCode::AuthenticationFailed: return "authentication_failed";
        case ErrorCode::DuplicateDid: return "duplicate_did";
        case ErrorCode::SubjectMismatch: return "subject_mismatch";
        case ErrorCode::UnrecognizedIssuer: return "unrecognized_issuer";
        case ErrorCode::InvalidIssuerProof: return "invalid_issuer_proof";
        case ErrorCode::SubjectNotFound: return "subject_not_found";
        case ErrorCode::SubjectRevoked: return "subject_revoked";
        case ErrorCode::AlreadyRevoked: return "already_revoked";
        case ErrorCode::WalletLocked: return "wallet_locked";
        case ErrorCode::KeyMismatch: return "key_mismatch";
        case ErrorCode::NotSubject: return "not_subject";
        case ErrorCode::UnknownCredential: return "unknown_credential";
        case ErrorCode::RemoteUnavailable: return "remote_unavailable";
        case ErrorCode::ReviewRejected: return "review_rejected";
        case ErrorCode::PolicyNotSatisfied: return "policy_not_satisfied";
        case ErrorCode::SigningFailure: return "signing_failure";
        case ErrorCode::UnknownEntity: return "unknown_entity";
        case ErrorCode::DuplicateApproval: return "duplicate_approval";
        case ErrorCode::InvalidMaterial: return "invalid_material";
        case ErrorCode::RegistryUnreachable: return "registry_unreachable";
        case ErrorCode::NameServiceUnreachable: return "name_service_unreachable";
        case ErrorCode::StaleNonce: return "stale_nonce";
        case ErrorCode::UnknownConsumer: return "unknown_consumer";
        case ErrorCode::SyntaxError: return "syntax_error";
        case ErrorCode::SchemaError: return "schema_error";
        case ErrorCode::DuplicateService: return "duplicate_service";
        case ErrorCode::BuildFailure: return "build_failure";
        case ErrorCode::UnknownService: return "unknown_service";
        case ErrorCode::ChannelViolation: return "channel_violation";
        case ErrorCode::Unauthenticated: return "unauthenticated";
        case ErrorCode::NotFound: return "not_found";
        case ErrorCode::MigrationFailure: return "migration_failure";
        case ErrorCode::Internal: return "internal";
    }
    return "internal";
}

std::optional<ErrorCode> parse_error_code(std::string_view tag) {
    for (int i = 0; i <= static_cast<int>(ErrorCode::Internal); ++i) {
        const auto code = static_cast<ErrorCode>(i);
        if (to_string(code) == tag) {
            return code;
        }
    }
    return std::nullopt;
}

}  // namespace ssi
