#include "ssi/ledger.hpp"

#include <algorithm>
#include <sstream>

#include "json.hpp"
#include "ssi/errors.hpp"

namespace ssi::ledger {

namespace {

std::string draft_signing_payload(const RecordDraft& draft) {
    std::string payload(event_tag(draft.event_kind));
    payload += '|';
    payload += draft.subject_id;
    payload += '|';
    payload += crypto::to_hex(draft.payload_digest);
    return payload;
}

std::string anchor_subject(const std::string& method, const AnchorBundle& bundle) {
    return "anchor:" + method + ":" + std::to_string(bundle.bundle_id) + ":" +
           std::to_string(bundle.first_sequence) + ":" + std::to_string(bundle.last_sequence);
}

}  // namespace

std::string_view pattern_tag(LedgerPattern pattern) {
    switch (pattern) {
        case LedgerPattern::Permissionless: return "permissionless";
        case LedgerPattern::PermissionedCdl: return "permissioned-cdl";
        case LedgerPattern::PermissionedPdl: return "permissioned-pdl";
        case LedgerPattern::SubLedger: return "sub-ledger";
    }
    return "permissionless";
}

std::optional<LedgerPattern> parse_pattern(std::string_view tag) {
    if (tag == "permissionless") return LedgerPattern::Permissionless;
    if (tag == "permissioned-cdl") return LedgerPattern::PermissionedCdl;
    if (tag == "permissioned-pdl") return LedgerPattern::PermissionedPdl;
    if (tag == "sub-ledger") return LedgerPattern::SubLedger;
    return std::nullopt;
}

std::string_view event_tag(EventKind kind) {
    switch (kind) {
        case EventKind::DidRegistered: return "did_registered";
        case EventKind::VcRegistered: return "vc_registered";
        case EventKind::DidUpdated: return "did_updated";
        case EventKind::VcUpdated: return "vc_updated";
        case EventKind::Revoked: return "revoked";
        case EventKind::AnchorBundle: return "anchor_bundle";
    }
    return "did_registered";
}

std::optional<EventKind> parse_event(std::string_view tag) {
    if (tag == "did_registered") return EventKind::DidRegistered;
    if (tag == "vc_registered") return EventKind::VcRegistered;
    if (tag == "did_updated") return EventKind::DidUpdated;
    if (tag == "vc_updated") return EventKind::VcUpdated;
    if (tag == "revoked") return EventKind::Revoked;
    if (tag == "anchor_bundle") return EventKind::AnchorBundle;
    return std::nullopt;
}

std::string LedgerRecord::to_json_line() const {
    nlohmann::json j{
        {"event", event_tag(event_kind)},
        {"payload_digest", crypto::to_hex(payload_digest)},
        {"sequence", sequence},
        {"subject", subject_id},
        {"submitter", submitter},
        {"timestamp", timestamp},
    };
    return j.dump();
}

LedgerRecord LedgerRecord::from_json_line(const std::string& line) {
    const auto j = nlohmann::json::parse(line);
    LedgerRecord record;
    record.sequence = j.at("sequence").get<std::uint64_t>();
    record.timestamp = j.at("timestamp").get<Tick>();
    const auto kind = parse_event(j.at("event").get<std::string>());
    if (!kind) {
        raise(ErrorCode::Internal, "unknown event kind in ledger line");
    }
    record.event_kind = *kind;
    record.subject_id = j.at("subject").get<std::string>();
    record.payload_digest = crypto::digest_from_hex(j.at("payload_digest").get<std::string>());
    record.submitter = j.at("submitter").get<std::string>();
    return record;
}

SubmitterCredentials SubmitterCredentials::for_draft(const crypto::KeyPair& keypair,
                                                     const RecordDraft& draft) {
    SubmitterCredentials credentials;
    credentials.public_key = keypair.public_key;
    credentials.signature = crypto::sign(keypair.secret_key, to_bytes(draft_signing_payload(draft)));
    return credentials;
}

LedgerConfig LedgerConfig::defaults(LedgerPattern pattern, std::string did_method) {
    LedgerConfig config;
    config.pattern = pattern;
    config.did_method = std::move(did_method);
    switch (pattern) {
        case LedgerPattern::Permissionless:
            config.block_latency = 6;
            break;
        case LedgerPattern::PermissionedCdl:
        case LedgerPattern::PermissionedPdl:
            config.block_latency = 1;
            break;
        case LedgerPattern::SubLedger:
            config.block_latency = 1;
            config.anchor_period = 8;
            break;
    }
    return config;
}

void AuthorizationSystem::authorize(const std::string& fingerprint) {
    std::unique_lock lock(mutex_);
    writers_.insert(fingerprint);
}

void AuthorizationSystem::withdraw(const std::string& fingerprint) {
    std::unique_lock lock(mutex_);
    writers_.erase(fingerprint);
}

bool AuthorizationSystem::is_authorized(const std::string& fingerprint) const {
    std::shared_lock lock(mutex_);
    return writers_.contains(fingerprint);
}

std::size_t AuthorizationSystem::size() const {
    std::shared_lock lock(mutex_);
    return writers_.size();
}

Ledger::Ledger(LedgerConfig config, ClockPtr clock,
               std::shared_ptr<AuthorizationSystem> authorization, std::shared_ptr<Ledger> master)
    : config_(std::move(config)),
      clock_(std::move(clock)),
      authorization_(std::move(authorization)),
      master_(std::move(master)) {
    if (!clock_) {
        raise(ErrorCode::Internal, "ledger requires a logical clock");
    }
    if (config_.did_method.empty()) {
        raise(ErrorCode::Internal, "did_method must be non-empty");
    }
    const bool permissioned = config_.pattern != LedgerPattern::Permissionless;
    if (permissioned) {
        if (!authorization_) {
            authorization_ = std::make_shared<AuthorizationSystem>();
        }
        for (const auto& writer : config_.authorized_writers) {
            authorization_->authorize(writer);
        }
        if (authorization_->size() == 0) {
            raise(ErrorCode::Internal, "permissioned ledger needs at least one authorized writer");
        }
    }
    if (config_.pattern == LedgerPattern::SubLedger) {
        if (!master_) {
            raise(ErrorCode::Internal, "sub-ledger requires a master ledger");
        }
        if (config_.anchor_period < 1) {
            raise(ErrorCode::Internal, "anchor_period must be >= 1");
        }
        anchor_key_ = crypto::generate_keypair();
    }
}

LedgerRecord Ledger::append(const RecordDraft& draft, const SubmitterCredentials& credentials) {
    if (!available_.load()) {
        raise(ErrorCode::LedgerUnavailable, "ledger fault injected");
    }
    if (!crypto::verify(credentials.public_key, to_bytes(draft_signing_payload(draft)),
                        credentials.signature)) {
        raise(ErrorCode::Unauthorized, "submitter proof does not verify");
    }
    const std::string submitter = crypto::fingerprint(credentials.public_key);
    if (config_.pattern != LedgerPattern::Permissionless &&
        !authorization_->is_authorized(submitter)) {
        raise(ErrorCode::Unauthorized, "submitter " + submitter + " is not an authorized writer");
    }

    std::unique_lock lock(mutex_);
    LedgerRecord record;
    record.sequence = records_.size() + 1;
    record.timestamp = clock_->now() + config_.block_latency;
    record.event_kind = draft.event_kind;
    record.subject_id = draft.subject_id;
    record.payload_digest = draft.payload_digest;
    record.submitter = submitter;
    records_.push_back(record);
    return record;
}

std::vector<LedgerRecord> Ledger::finalized_locked() const {
    const Tick now = clock_->now();
    std::vector<LedgerRecord> out;
    out.reserve(records_.size());
    for (const auto& record : records_) {
        if (record.timestamp <= now) {
            out.push_back(record);
        }
    }
    return out;
}

std::vector<LedgerRecord> Ledger::finalized_records() const {
    std::shared_lock lock(mutex_);
    return finalized_locked();
}

std::uint64_t Ledger::finalized_count() const {
    std::shared_lock lock(mutex_);
    return finalized_locked().size();
}

std::uint64_t Ledger::total_count() const {
    std::shared_lock lock(mutex_);
    return records_.size();
}

std::optional<std::pair<SubjectStatus, LedgerRecord>> Ledger::query_latest(
    const std::string& subject_id) const {
    std::shared_lock lock(mutex_);
    const auto finalized = finalized_locked();

    // linear scan in timestamp-reverse order (sequence breaks ties)
    std::optional<LedgerRecord> latest;
    std::optional<std::uint64_t> latest_registration;
    bool revoked_after_registration = false;
    for (auto it = finalized.rbegin(); it != finalized.rend(); ++it) {
        if (it->subject_id != subject_id) {
            continue;
        }
        if (!latest) {
            latest = *it;
        }
        if (!latest_registration) {
            if (it->event_kind == EventKind::Revoked) {
                revoked_after_registration = true;
            }
            if (it->event_kind == EventKind::DidRegistered ||
                it->event_kind == EventKind::VcRegistered) {
                latest_registration = it->sequence;
            }
        }
    }
    if (!latest) {
        return std::nullopt;
    }
    const SubjectStatus status =
        revoked_after_registration ? SubjectStatus::Revoked : SubjectStatus::Active;
    return std::make_pair(status, *latest);
}

std::vector<LedgerRecord> Ledger::history(const std::string& subject_id) const {
    std::shared_lock lock(mutex_);
    const auto finalized = finalized_locked();
    std::vector<LedgerRecord> out;
    for (auto it = finalized.rbegin(); it != finalized.rend(); ++it) {
        if (it->subject_id == subject_id) {
            out.push_back(*it);
        }
    }
    return out;
}

crypto::Digest Ledger::digest_of_range(std::uint64_t first, std::uint64_t last) const {
    std::string material;
    for (std::uint64_t seq = first; seq <= last; ++seq) {
        material += records_[seq - 1].to_json_line();
        material += '\n';
    }
    return crypto::hash(to_bytes(material));
}

std::optional<AnchorBundle> Ledger::anchor_pending() {
    if (config_.pattern != LedgerPattern::SubLedger) {
        raise(ErrorCode::Internal, "anchor_pending requires the sub-ledger pattern");
    }

    std::unique_lock lock(mutex_);
    AnchorBundle bundle;
    if (retained_) {
        bundle = *retained_;
    } else {
        const Tick now = clock_->now();
        std::uint64_t last_finalized = anchored_through_;
        while (last_finalized < records_.size() &&
               records_[last_finalized].timestamp <= now) {
            ++last_finalized;
        }
        if (last_finalized - anchored_through_ < config_.anchor_period) {
            return std::nullopt;
        }
        bundle.bundle_id = bundles_.size() + 1;
        bundle.first_sequence = anchored_through_ + 1;
        bundle.last_sequence = last_finalized;
        bundle.bundle_digest = digest_of_range(bundle.first_sequence, bundle.last_sequence);
    }

    RecordDraft draft;
    draft.event_kind = EventKind::AnchorBundle;
    draft.subject_id = anchor_subject(config_.did_method, bundle);
    draft.payload_digest = bundle.bundle_digest;
    try {
        master_->append(draft, SubmitterCredentials::for_draft(anchor_key_, draft));
    } catch (const Error&) {
        // keep serving; the bundle is retried on the next call
        retained_ = bundle;
        anchored_through_ = std::max(anchored_through_, bundle.last_sequence);
        raise(ErrorCode::MasterUnavailable, "master rejected bundle " +
                                                std::to_string(bundle.bundle_id) +
                                                "; retained for retry");
    }

    bundle.master_receipt = draft.subject_id;
    bundles_.push_back(bundle);
    retained_.reset();
    anchored_through_ = std::max(anchored_through_, bundle.last_sequence);
    return bundle;
}

std::vector<AnchorBundle> Ledger::bundles() const {
    std::shared_lock lock(mutex_);
    return bundles_;
}

bool Ledger::has_retained_bundle() const {
    std::shared_lock lock(mutex_);
    return retained_.has_value();
}

LedgerRecord Ledger::replay_append(const LedgerRecord& source) {
    if (!available_.load()) {
        raise(ErrorCode::LedgerUnavailable, "ledger fault injected");
    }
    std::unique_lock lock(mutex_);
    LedgerRecord record = source;
    record.sequence = records_.size() + 1;
    record.timestamp = clock_->now() + config_.block_latency;
    records_.push_back(record);
    return record;
}

std::string Ledger::export_ndjson() const {
    std::shared_lock lock(mutex_);
    std::string out;
    for (const auto& record : finalized_locked()) {
        out += record.to_json_line();
        out += '\n';
    }
    return out;
}

void Ledger::import_ndjson(const std::string& text) {
    std::unique_lock lock(mutex_);
    if (!records_.empty()) {
        raise(ErrorCode::Internal, "snapshot import requires an empty ledger");
    }
    std::istringstream stream(text);
    std::string line;
    while (std::getline(stream, line)) {
        if (line.empty()) {
            continue;
        }
        LedgerRecord record = LedgerRecord::from_json_line(line);
        if (record.sequence != records_.size() + 1) {
            raise(ErrorCode::Internal, "snapshot sequence gap at " +
                                           std::to_string(record.sequence));
        }
        records_.push_back(std::move(record));
    }
}

void Ledger::tamper_record_for_test(std::uint64_t sequence, const crypto::Digest& digest) {
    std::unique_lock lock(mutex_);
    records_.at(sequence - 1).payload_digest = digest;
}

bool verify_anchor(const Ledger& sub, const Ledger& master, std::uint64_t bundle_id) {
    const std::string prefix =
        "anchor:" + sub.config().did_method + ":" + std::to_string(bundle_id) + ":";
    std::optional<LedgerRecord> anchor;
    for (const auto& record : master.finalized_records()) {
        if (record.event_kind == EventKind::AnchorBundle &&
            record.subject_id.starts_with(prefix)) {
            anchor = record;
        }
    }
    if (!anchor) {
        raise(ErrorCode::UnknownBundle, "bundle " + std::to_string(bundle_id) +
                                            " is not anchored on the master");
    }

    // subject layout: anchor:<method>:<id>:<first>:<last>
    const std::string tail = anchor->subject_id.substr(prefix.size());
    const auto colon = tail.find(':');
    if (colon == std::string::npos) {
        raise(ErrorCode::UnknownBundle, "malformed anchor subject " + anchor->subject_id);
    }
    const std::uint64_t first = std::stoull(tail.substr(0, colon));
    const std::uint64_t last = std::stoull(tail.substr(colon + 1));

    std::string material;
    for (const auto& record : sub.finalized_records()) {
        if (record.sequence >= first && record.sequence <= last) {
            material += record.to_json_line();
            material += '\n';
        }
    }
    return crypto::hash(to_bytes(material)) == anchor->payload_digest;
}

}  // namespace ssi::ledger
