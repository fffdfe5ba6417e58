#include "ssi/multisig.hpp"

#include <algorithm>
#include <set>

#include "ssi/errors.hpp"

namespace ssi::crypto {

SignatureSet aggregate_signatures(BytesView message,
                                  const std::vector<std::pair<PublicKey, Signature>>& partials,
                                  std::size_t threshold) {
    std::set<std::string> seen;
    for (const auto& [key, signature] : partials) {
        if (!verify(key, message, signature)) {
            raise(ErrorCode::InvalidPartial, "partial from " + fingerprint(key) + " does not verify");
        }
        if (!seen.insert(fingerprint(key)).second) {
            raise(ErrorCode::InvalidPartial, "duplicate signer " + fingerprint(key));
        }
    }
    if (partials.size() < threshold + 1) {
        raise(ErrorCode::ThresholdNotMet,
              "have " + std::to_string(partials.size()) + " partials, need " +
                  std::to_string(threshold + 1));
    }
    SignatureSet set;
    set.threshold = threshold;
    set.partials = partials;
    return set;
}

bool verify_aggregate(BytesView message, const SignatureSet& set,
                      const std::vector<PublicKey>& allowed_signers) {
    std::set<std::string> valid_signers;
    for (const auto& [key, signature] : set.partials) {
        if (!allowed_signers.empty() &&
            std::find(allowed_signers.begin(), allowed_signers.end(), key) ==
                allowed_signers.end()) {
            return false;
        }
        if (signature.bytes.size() != 64 || !verify(key, message, signature)) {
            return false;
        }
        valid_signers.insert(fingerprint(key));
    }
    return valid_signers.size() >= set.threshold + 1;
}

}  // namespace ssi::crypto
