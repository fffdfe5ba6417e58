#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <vector>

#include "ssi/bytes.hpp"
#include "ssi/clock.hpp"
#include "ssi/crypto.hpp"

namespace ssi::ledger {

enum class LedgerPattern {
    Permissionless,   // simulated public ledger, proof-based consensus latency
    PermissionedCdl,  // consortium ledger, provider-wide authorization system
    PermissionedPdl,  // private ledger, per-service authorization system
    SubLedger,        // permissioned slave anchoring bundles to a master
};

std::string_view pattern_tag(LedgerPattern pattern);
std::optional<LedgerPattern> parse_pattern(std::string_view tag);

enum class EventKind {
    DidRegistered,
    VcRegistered,
    DidUpdated,
    VcUpdated,
    Revoked,
    AnchorBundle,
};

std::string_view event_tag(EventKind kind);
std::optional<EventKind> parse_event(std::string_view tag);

enum class SubjectStatus { Active, Revoked };

struct LedgerRecord {
    std::uint64_t sequence = 0;  // 1-based, strictly increasing
    Tick timestamp = 0;          // finalization tick
    EventKind event_kind = EventKind::DidRegistered;
    std::string subject_id;
    crypto::Digest payload_digest{};
    std::string submitter;  // public-key fingerprint

    std::string to_json_line() const;
    static LedgerRecord from_json_line(const std::string& line);

    bool operator==(const LedgerRecord&) const = default;
};

struct RecordDraft {
    EventKind event_kind = EventKind::DidRegistered;
    std::string subject_id;
    crypto::Digest payload_digest{};
};

// Submitter binds itself to the draft by signing its canonical form; the
// ledger derives the submitter fingerprint from the verified key.
struct SubmitterCredentials {
    crypto::PublicKey public_key;
    crypto::Signature signature;

    static SubmitterCredentials for_draft(const crypto::KeyPair& keypair,
                                          const RecordDraft& draft);
};

struct LedgerConfig {
    LedgerPattern pattern = LedgerPattern::Permissionless;
    std::string did_method = "sim";
    Tick block_latency = 6;
    std::uint64_t anchor_period = 8;            // SubLedger only
    std::set<std::string> authorized_writers;   // permissioned patterns only

    static LedgerConfig defaults(LedgerPattern pattern, std::string did_method);
};

struct AnchorBundle {
    std::uint64_t bundle_id = 0;
    std::uint64_t first_sequence = 0;
    std::uint64_t last_sequence = 0;
    crypto::Digest bundle_digest{};
    std::string master_receipt;  // subject id of the master-ledger record
};

// Writer set shared by every CDL ledger of a provider, or owned by a single
// PDL/sub-ledger instance.
class AuthorizationSystem {
public:
    void authorize(const std::string& fingerprint);
    void withdraw(const std::string& fingerprint);
    bool is_authorized(const std::string& fingerprint) const;
    std::size_t size() const;

private:
    mutable std::shared_mutex mutex_;
    std::set<std::string> writers_;
};

// Append-only event log with simulated finalization: a record appended at
// tick T becomes visible to queries at T + block_latency. Appends serialize
// through the writer lock; queries run concurrently and see only finalized
// records.
class Ledger {
public:
    Ledger(LedgerConfig config, ClockPtr clock,
           std::shared_ptr<AuthorizationSystem> authorization = nullptr,
           std::shared_ptr<Ledger> master = nullptr);

    const LedgerConfig& config() const { return config_; }
    const ClockPtr& clock() const { return clock_; }
    const std::shared_ptr<AuthorizationSystem>& authorization() const { return authorization_; }
    const std::shared_ptr<Ledger>& master() const { return master_; }

    LedgerRecord append(const RecordDraft& draft, const SubmitterCredentials& credentials);

    std::optional<std::pair<SubjectStatus, LedgerRecord>> query_latest(
        const std::string& subject_id) const;

    // Newest-first finalized records for one subject.
    std::vector<LedgerRecord> history(const std::string& subject_id) const;

    std::vector<LedgerRecord> finalized_records() const;
    std::uint64_t finalized_count() const;
    std::uint64_t total_count() const;

    // Sub-ledger anchoring. Packages every unanchored finalized record once
    // at least anchor_period of them exist and appends the bundle digest to
    // the master ledger. On MasterUnavailable the bundle is retained and
    // retried by the next call.
    std::optional<AnchorBundle> anchor_pending();
    std::vector<AnchorBundle> bundles() const;
    bool has_retained_bundle() const;

    // Trusted paths used by platform migration and snapshot restore; they
    // bypass submitter authorization but keep ordering.
    LedgerRecord replay_append(const LedgerRecord& source);
    std::string export_ndjson() const;
    void import_ndjson(const std::string& text);  // requires an empty ledger

    // Test-only mutation hook for the anchor tamper sweeps.
    void tamper_record_for_test(std::uint64_t sequence, const crypto::Digest& digest);

    void set_available(bool available) { available_ = available; }
    bool available() const { return available_; }

private:
    std::vector<LedgerRecord> finalized_locked() const;
    crypto::Digest digest_of_range(std::uint64_t first, std::uint64_t last) const;

    LedgerConfig config_;
    ClockPtr clock_;
    std::shared_ptr<AuthorizationSystem> authorization_;
    std::shared_ptr<Ledger> master_;
    crypto::KeyPair anchor_key_;  // sub-ledger identity on the master

    mutable std::shared_mutex mutex_;
    std::vector<LedgerRecord> records_;
    std::vector<AnchorBundle> bundles_;
    std::optional<AnchorBundle> retained_;
    std::uint64_t anchored_through_ = 0;
    std::atomic<bool> available_{true};
};

// True iff the digest recomputed over the sub-ledger's covered records
// equals the digest anchored on the master.
bool verify_anchor(const Ledger& sub, const Ledger& master, std::uint64_t bundle_id);

}  // namespace ssi::ledger
