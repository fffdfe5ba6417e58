#pragma once

#include <cstddef>
#include <vector>

#include "ssi/bytes.hpp"
#include "ssi/crypto.hpp"

namespace ssi::crypto {

// Threshold signing as verified aggregation: the set carries every partial
// and the policy threshold, and acceptance means at least threshold + 1
// distinct valid signers. A t-subset must never verify.
struct SignatureSet {
    std::size_t threshold = 0;
    std::vector<std::pair<PublicKey, Signature>> partials;
};

SignatureSet aggregate_signatures(BytesView message,
                                  const std::vector<std::pair<PublicKey, Signature>>& partials,
                                  std::size_t threshold);

// True iff the set still meets its threshold over this message. When
// `allowed_signers` is non-empty every participating key must belong to it;
// verifiers pass the entity key set advertised by the name service.
bool verify_aggregate(BytesView message, const SignatureSet& set,
                      const std::vector<PublicKey>& allowed_signers = {});

}  // namespace ssi::crypto
