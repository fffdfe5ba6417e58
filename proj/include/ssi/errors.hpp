#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ssi {

enum class ErrorCode {
    // crypto
    UnsupportedAlgorithm,
    MalformedKey,
    MalformedSignature,
    DecryptionFailure,
    InvalidThreshold,
    InsufficientShares,
    InconsistentShares,
    ThresholdNotMet,
    InvalidPartial,
    // ledger
    Unauthorized,
    LedgerUnavailable,
    MasterUnavailable,
    UnknownBundle,
    // vdr
    AuthenticationFailed,
    DuplicateDid,
    SubjectMismatch,
    UnrecognizedIssuer,
    InvalidIssuerProof,
    SubjectNotFound,
    SubjectRevoked,
    AlreadyRevoked,
    // wallet
    WalletLocked,
    KeyMismatch,
    NotSubject,
    UnknownCredential,
    RemoteUnavailable,
    // endorsement
    ReviewRejected,
    PolicyNotSatisfied,
    SigningFailure,
    UnknownEntity,
    DuplicateApproval,
    InvalidMaterial,
    // verification
    RegistryUnreachable,
    NameServiceUnreachable,
    StaleNonce,
    UnknownConsumer,
    // platform
    SyntaxError,
    SchemaError,
    DuplicateService,
    BuildFailure,
    UnknownService,
    ChannelViolation,
    Unauthenticated,
    NotFound,
    MigrationFailure,
    Internal,
};

std::string_view to_string(ErrorCode code);
std::optional<ErrorCode> parse_error_code(std::string_view tag);

// All domain failures are reported as Error carrying a stable code; the
// gateway maps codes onto the JSON error contract.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace ssi
