#include "ssi/platform.hpp"

#include <algorithm>
#include <cctype>

namespace ssi::platform {

namespace {

// DID method identifiers per pattern: the simulated public chain for the
// permissionless pattern, the provider for CDL, the service for PDL and
// sub-ledgers.
std::string abbreviate(const std::string& name) {
    std::string out;
    for (const char c : name) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        }
        if (out.size() == 8) break;
    }
    return out.empty() ? "svc" : out;
}

Json record_to_json(const ledger::LedgerRecord& record) {
    return Json::parse(record.to_json_line());
}

Json consumer_record_json(const ConsumerRecord& record) {
    Json entity_keys = Json::array();
    for (const auto& key : record.identity.entity_public_keys) {
        entity_keys.push_back(key_to_json(key));
    }
    Json j{{"consumer_id", record.identity.consumer_id},
           {"did", record.identity.did},
           {"entity_keys", entity_keys},
           {"meta", record.meta},
           {"service_ids", record.service_ids}};
    if (!record.identity.primary_public_key.bytes.empty()) {
        j["primary_key"] = key_to_json(record.identity.primary_public_key);
    }
    if (record.identity.entity_threshold) {
        j["entity_threshold"] = *record.identity.entity_threshold;
    }
    if (record.identity.management_public_key) {
        j["management_key"] = key_to_json(*record.identity.management_public_key);
    }
    return j;
}

Json approval_state_json(const endorsement::ApprovalState& state) {
    return Json{{"approvals", state.valid_approvals},
                {"rejections", state.rejections},
                {"required", state.required},
                {"satisfied", state.satisfied()}};
}

Json review_request_json(const endorsement::ReviewRequest& request) {
    return Json{{"kind", request.kind == endorsement::RequestKind::DidIssue ? "did" : "vc"},
                {"payload", request.payload},
                {"payload_digest", crypto::to_hex(request.payload_digest)},
                {"request_id", request.request_id},
                {"reviewers", request.reviewers}};
}

Json share_to_json(const crypto::Share& share) {
    return Json{{"index", share.index},
                {"threshold", share.threshold},
                {"total", share.total},
                {"value", hex_encode(share.value)}};
}

crypto::Share share_from_json(const Json& j) {
    crypto::Share share;
    share.index = j.at("index").get<std::uint8_t>();
    share.threshold = j.at("threshold").get<std::uint8_t>();
    share.total = j.at("total").get<std::uint8_t>();
    share.value = hex_decode(j.at("value").get<std::string>());
    return share;
}

vdr::RegistrationAuth auth_from_json(const Json& j) {
    if (j.contains("challenge_id")) {
        return vdr::RegistrationAuth::answered(vdr::ChallengeAnswer{
            j.at("challenge_id").get<std::string>(),
            base64_decode(j.at("response").get<std::string>())});
    }
    if (j.contains("delegated")) {
        return vdr::RegistrationAuth::delegated(signature_from_json(j.at("delegated")));
    }
    raise(ErrorCode::AuthenticationFailed, "auth needs a challenge answer or a delegation");
}

Json resolution_json(const vdr::Resolution& resolution) {
    Json history = Json::array();
    for (const auto& record : resolution.history) {
        history.push_back(record_to_json(record));
    }
    Json j{{"history", history}};
    if (resolution.status) {
        j["status"] = *resolution.status == ledger::SubjectStatus::Active ? "active" : "revoked";
        j["payload_digest"] = crypto::to_hex(*resolution.payload_digest);
    } else {
        j["status"] = nullptr;
    }
    return j;
}

}  // namespace

// --------------------------------------------------------------------------
// NameService

void NameService::register_consumer(const std::string& consumer_id, Json meta) {
    std::unique_lock lock(mutex_);
    auto& record = consumers_[consumer_id];
    record.identity.consumer_id = consumer_id;
    if (record.identity.did.empty()) {
        record.identity.did = "did:consumer:" + consumer_id;
    }
    record.meta = std::move(meta);
}

void NameService::publish_identity(const ConsumerIdentity& identity) {
    std::unique_lock lock(mutex_);
    auto& record = consumers_[identity.consumer_id];
    const auto service_ids = record.service_ids;
    const auto meta = record.meta;
    record.identity = identity;
    record.service_ids = service_ids;
    record.meta = meta;
}

void NameService::bind_service(const std::string& consumer_id, const std::string& service_id) {
    std::unique_lock lock(mutex_);
    const auto it = consumers_.find(consumer_id);
    if (it == consumers_.end()) {
        raise(ErrorCode::UnknownConsumer, consumer_id + " is not registered");
    }
    it->second.service_ids.push_back(service_id);
}

std::optional<ConsumerRecord> NameService::resolve_consumer(const std::string& consumer_id) const {
    std::shared_lock lock(mutex_);
    const auto it = consumers_.find(consumer_id);
    if (it == consumers_.end()) return std::nullopt;
    return it->second;
}

std::optional<ConsumerIdentity> NameService::find_consumer(const std::string& consumer_id) const {
    std::shared_lock lock(mutex_);
    const auto it = consumers_.find(consumer_id);
    // a consumer without published keys is not yet usable as an issuer
    if (it == consumers_.end() || it->second.identity.primary_public_key.bytes.empty()) {
        return std::nullopt;
    }
    return it->second.identity;
}

bool NameService::has_consumer(const std::string& consumer_id) const {
    std::shared_lock lock(mutex_);
    return consumers_.contains(consumer_id);
}

void NameService::register_address(const std::string& service_id, const std::string& address) {
    std::unique_lock lock(mutex_);
    addresses_[service_id] = address;
}

void NameService::drop_address(const std::string& service_id) {
    std::unique_lock lock(mutex_);
    addresses_.erase(service_id);
}

std::optional<std::string> NameService::resolve_service(const std::string& service_id) const {
    std::shared_lock lock(mutex_);
    const auto it = addresses_.find(service_id);
    if (it == addresses_.end()) return std::nullopt;
    return it->second;
}

// --------------------------------------------------------------------------
// Monitor

std::string_view event_kind_tag(EventKind kind) {
    switch (kind) {
        case EventKind::Request: return "request";
        case EventKind::LedgerAppend: return "ledger_append";
        case EventKind::Anchor: return "anchor";
        case EventKind::Error: return "error";
        case EventKind::NodeStatus: return "node_status";
    }
    return "request";
}

Json MonitorEvent::to_json() const {
    return Json{{"kind", event_kind_tag(kind)},
                {"payload", payload},
                {"service_id", service_id},
                {"timestamp", timestamp}};
}

void Monitor::record(const std::string& service_id, EventKind kind, Json payload) {
    std::lock_guard lock(mutex_);
    auto& ring = events_[service_id];
    ring.push_back(MonitorEvent{clock_->now(), service_id, kind, std::move(payload)});
    if (ring.size() > capacity_) {
        ring.pop_front();
    }
}

std::vector<MonitorEvent> Monitor::query(const std::string& service_id,
                                         const EventFilter& filter) const {
    std::lock_guard lock(mutex_);
    std::vector<MonitorEvent> out;
    const auto it = events_.find(service_id);
    if (it == events_.end()) return out;
    for (const auto& event : it->second) {
        if (filter.kind && event.kind != *filter.kind) continue;
        if (filter.from && event.timestamp < *filter.from) continue;
        if (filter.to && event.timestamp > *filter.to) continue;
        out.push_back(event);
    }
    return out;
}

std::size_t Monitor::count(const std::string& service_id, const EventFilter& filter) const {
    return query(service_id, filter).size();
}

std::map<std::string, std::size_t> Monitor::append_summary(const std::string& service_id) const {
    std::map<std::string, std::size_t> out;
    for (const auto& event : query(service_id, EventFilter{EventKind::LedgerAppend, {}, {}})) {
        if (event.payload.contains("submitter")) {
            ++out[event.payload.at("submitter").get<std::string>()];
        }
    }
    return out;
}

// --------------------------------------------------------------------------
// ServiceInstance

std::string_view service_status_tag(ServiceStatus status) {
    switch (status) {
        case ServiceStatus::Building: return "building";
        case ServiceStatus::Running: return "running";
        case ServiceStatus::Stopped: return "stopped";
        case ServiceStatus::Unhealthy: return "unhealthy";
    }
    return "building";
}

Json ServiceInstance::descriptor() const {
    return Json{{"address", address},
                {"consumer_id", consumer_id},
                {"data_pattern", ledger::pattern_tag(spec.data_pattern)},
                {"did_method", chain ? chain->config().did_method : ""},
                {"endorsement_mode", endorsement::mode_tag(spec.endorsement_mode)},
                {"service_id", service_id},
                {"service_name", service_name},
                {"status", service_status_tag(status)},
                {"verification_mode", verification::verifier_mode_tag(spec.verification_mode)},
                {"wallet_pattern", wallet::pattern_tag(spec.wallet_pattern)}};
}

Json ServiceInstance::client_bundle() const {
    return Json{{"address", address},
                {"consumer_id", consumer_id},
                {"data", Json{{"did_method", chain ? chain->config().did_method : ""},
                              {"pattern", ledger::pattern_tag(spec.data_pattern)}}},
                {"service_id", service_id},
                {"verification", Json{{"mode", verification::verifier_mode_tag(
                                                   spec.verification_mode)}}},
                {"wallet", Json{{"pattern", wallet::pattern_tag(spec.wallet_pattern)}}}};
}

Json BuildPlan::to_json() const {
    Json out = Json::array();
    for (const auto& step : steps) {
        out.push_back(Json{{"detail", step.detail}, {"step", step.name}});
    }
    return out;
}

// --------------------------------------------------------------------------
// Platform

Platform::Platform(std::string provider_name, ClockPtr clock)
    : provider_name_(std::move(provider_name)), clock_(std::move(clock)),
      provider_token_(hex_encode(random_bytes(16))),
      name_service_(std::make_shared<NameService>()),
      monitor_(std::make_unique<Monitor>(clock_)),
      global_authorization_(std::make_shared<ledger::AuthorizationSystem>()) {}

ConsumerRecord Platform::register_consumer(const std::string& consumer_id, Json meta) {
    name_service_->register_consumer(consumer_id, std::move(meta));
    return *name_service_->resolve_consumer(consumer_id);
}

std::shared_ptr<ledger::Ledger> Platform::consortium_ledger() {
    std::unique_lock lock(mutex_);
    if (!consortium_) {
        auto config = ledger::LedgerConfig::defaults(ledger::LedgerPattern::PermissionedCdl,
                                                     abbreviate(provider_name_));
        // the provider operates the consortium; real writers are authorized
        // per service through the global authorization system
        global_authorization_->authorize("provider:" + provider_name_);
        consortium_ = std::make_shared<ledger::Ledger>(config, clock_, global_authorization_);
    }
    return consortium_;
}

std::shared_ptr<ledger::Ledger> Platform::master_ledger() {
    std::unique_lock lock(mutex_);
    if (!master_) {
        master_ = std::make_shared<ledger::Ledger>(
            ledger::LedgerConfig::defaults(ledger::LedgerPattern::Permissionless, "sim"), clock_);
    }
    return master_;
}

BuildPlan Platform::plan_service(const ServiceSpec& spec) const {
    BuildPlan plan;
    plan.steps.push_back({"validate", "consumer " + spec.consumer_id + ", service '" +
                                          spec.service_name + "'"});
    plan.steps.push_back(
        {"create-ledger", std::string(ledger::pattern_tag(spec.data_pattern))});
    plan.steps.push_back({"create-vdr", "registry over the " +
                                            std::string(ledger::pattern_tag(spec.data_pattern)) +
                                            " ledger"});
    plan.steps.push_back(
        {"create-issuer", std::string(endorsement::mode_tag(spec.endorsement_mode))});
    plan.steps.push_back({"create-verifier",
                          std::string(verification::verifier_mode_tag(spec.verification_mode))});
    plan.steps.push_back({"register-name-service", "publish identity, bind address"});
    plan.steps.push_back({"start", "mark running"});
    return plan;
}

std::shared_ptr<ledger::Ledger> Platform::make_chain(const ServiceSpec& spec,
                                                     const std::string& service_name,
                                                     const std::string& writer_fingerprint) {
    switch (spec.data_pattern) {
        case ledger::LedgerPattern::Permissionless: {
            auto config = ledger::LedgerConfig::defaults(spec.data_pattern, "sim");
            if (spec.block_latency) config.block_latency = *spec.block_latency;
            return std::make_shared<ledger::Ledger>(config, clock_);
        }
        case ledger::LedgerPattern::PermissionedCdl: {
            auto shared = consortium_ledger();
            global_authorization_->authorize(writer_fingerprint);
            return shared;
        }
        case ledger::LedgerPattern::PermissionedPdl: {
            auto config =
                ledger::LedgerConfig::defaults(spec.data_pattern, abbreviate(service_name));
            if (spec.block_latency) config.block_latency = *spec.block_latency;
            config.authorized_writers = {writer_fingerprint};
            return std::make_shared<ledger::Ledger>(config, clock_);
        }
        case ledger::LedgerPattern::SubLedger: {
            auto config =
                ledger::LedgerConfig::defaults(spec.data_pattern, abbreviate(service_name));
            if (spec.block_latency) config.block_latency = *spec.block_latency;
            if (spec.anchor_period) config.anchor_period = *spec.anchor_period;
            config.authorized_writers = {writer_fingerprint};
            return std::make_shared<ledger::Ledger>(config, clock_, nullptr, master_ledger());
        }
    }
    raise(ErrorCode::BuildFailure, "unknown data pattern");
}

std::shared_ptr<ServiceInstance> Platform::build_service(const ServiceSpec& spec) {
    const BuildPlan plan = plan_service(spec);
    std::string current_step = plan.steps.front().name;
    try {
        // validate
        if (!name_service_->has_consumer(spec.consumer_id)) {
            raise(ErrorCode::UnknownConsumer, spec.consumer_id + " is not registered");
        }
        {
            std::shared_lock lock(mutex_);
            for (const auto& [id, service] : services_) {
                if (service->service_name == spec.service_name &&
                    service->status != ServiceStatus::Stopped) {
                    raise(ErrorCode::DuplicateService,
                          "service name '" + spec.service_name + "' is already in use");
                }
                if (service->consumer_id == spec.consumer_id &&
                    service->status != ServiceStatus::Stopped) {
                    raise(ErrorCode::DuplicateService,
                          spec.consumer_id + " already operates service " + id);
                }
            }
        }

        auto instance = std::make_shared<ServiceInstance>();
        instance->service_name = spec.service_name;
        instance->consumer_id = spec.consumer_id;
        instance->spec = spec;
        instance->status = ServiceStatus::Building;

        current_step = "create-ledger";
        const auto service_key = crypto::generate_keypair();
        instance->chain =
            make_chain(spec, spec.service_name, crypto::fingerprint(service_key.public_key));

        current_step = "create-vdr";
        instance->registry =
            std::make_shared<vdr::Vdr>(instance->chain, name_service_, service_key);

        current_step = "create-issuer";
        endorsement::IssuerConfig issuer_config;
        issuer_config.consumer_id = spec.consumer_id;
        issuer_config.mode = spec.endorsement_mode;
        issuer_config.threshold = spec.threshold;
        issuer_config.total = spec.entities;
        issuer_config.reviewer_seed = spec.reviewer_seed;
        std::shared_ptr<const endorsement::ReviewPolicy> policy =
            std::make_shared<endorsement::AutoApprove>();
        if (const auto it = spec.parameters.find("review-reject-substring");
            it != spec.parameters.end()) {
            const std::string needle = it->second;
            policy = std::make_shared<endorsement::ScriptedReview>(
                [needle](endorsement::RequestKind, const Json& payload) {
                    return payload.dump().find(needle) == std::string::npos;
                });
        }
        instance->issuer =
            std::make_shared<endorsement::Issuer>(issuer_config, instance->registry, policy);
        name_service_->publish_identity(instance->issuer->identity());

        current_step = "create-verifier";
        verification::VerifierConfig verifier_config;
        verifier_config.mode = spec.verification_mode;
        verifier_config.registry = instance->registry;
        verifier_config.directory = name_service_;
        verifier_config.expected_issuer = spec.consumer_id;
        instance->verifier =
            std::make_shared<verification::Verifier>(verifier_config, clock_);

        current_step = "register-name-service";
        {
            std::unique_lock lock(mutex_);
            instance->service_id = "svc-" + std::to_string(++service_counter_);
            services_[instance->service_id] = instance;
        }
        instance->address = "local://" + instance->service_id + "/v1";
        name_service_->register_address(instance->service_id, instance->address);
        name_service_->bind_service(spec.consumer_id, instance->service_id);

        current_step = "start";
        instance->status = ServiceStatus::Running;
        monitor_->record(instance->service_id, EventKind::NodeStatus,
                         Json{{"status", "running"}, {"plan", plan.to_json()}});
        return instance;
    } catch (const Error& error) {
        if (error.code() == ErrorCode::UnknownConsumer ||
            error.code() == ErrorCode::DuplicateService) {
            throw;
        }
        raise(ErrorCode::BuildFailure,
              "step '" + current_step + "' failed: " + error.what());
    }
}

std::shared_ptr<ServiceInstance> Platform::find_service(const std::string& service_id) const {
    std::shared_lock lock(mutex_);
    const auto it = services_.find(service_id);
    if (it == services_.end()) return nullptr;
    return it->second;
}

std::shared_ptr<ServiceInstance> Platform::find_running_service(
    const std::string& service_id) const {
    auto service = find_service(service_id);
    if (!service || service->status == ServiceStatus::Stopped) {
        return nullptr;
    }
    return service;
}

std::vector<std::string> Platform::service_ids() const {
    std::shared_lock lock(mutex_);
    std::vector<std::string> out;
    for (const auto& [id, service] : services_) {
        out.push_back(id);
    }
    return out;
}

std::shared_ptr<ServiceInstance> Platform::migrate_service(const std::string& service_id,
                                                           const ServiceSpec& new_spec) {
    auto instance = find_service(service_id);
    if (!instance) {
        raise(ErrorCode::UnknownService, service_id + " does not exist");
    }
    if (instance->status != ServiceStatus::Running) {
        raise(ErrorCode::MigrationFailure, service_id + " is not running");
    }
    if (new_spec.consumer_id != instance->consumer_id) {
        raise(ErrorCode::MigrationFailure, "migration cannot change the consumer");
    }

    // build the target data component
    const auto service_key = crypto::generate_keypair();
    auto new_chain = make_chain(new_spec, new_spec.service_name,
                                crypto::fingerprint(service_key.public_key));
    auto new_registry = std::make_shared<vdr::Vdr>(new_chain, name_service_, service_key);

    // replay the finalized history in order
    const auto records = instance->chain->finalized_records();
    std::uint64_t position = 0;
    try {
        for (const auto& record : records) {
            ++position;
            new_chain->replay_append(record);
        }
    } catch (const Error& error) {
        raise(ErrorCode::MigrationFailure, "replay stopped at record " +
                                               std::to_string(position) + ": " + error.what());
    }
    clock_->advance(new_chain->config().block_latency);  // finalize the replayed history
    new_registry->import_store(instance->registry->export_store());

    // keep the consumer's issuer keys; rebind them to the new registry
    instance->issuer->rebind_registry(new_registry);

    verification::VerifierConfig verifier_config;
    verifier_config.mode = new_spec.verification_mode;
    verifier_config.registry = new_registry;
    verifier_config.directory = name_service_;
    verifier_config.expected_issuer = instance->consumer_id;
    auto new_verifier = std::make_shared<verification::Verifier>(verifier_config, clock_);

    {
        std::unique_lock lock(mutex_);
        instance->chain = new_chain;
        instance->registry = new_registry;
        instance->verifier = new_verifier;
        instance->spec = new_spec;
        instance->service_name = new_spec.service_name;
        // fresh logical location; the name service hides the move
        const auto version_pos = instance->address.rfind("/v");
        const auto version =
            std::stoul(instance->address.substr(version_pos + 2)) + 1;
        instance->address = "local://" + instance->service_id + "/v" + std::to_string(version);
    }
    name_service_->register_address(service_id, instance->address);
    monitor_->record(service_id, EventKind::NodeStatus,
                     Json{{"records_replayed", records.size()},
                          {"status", "migrated"},
                          {"to_pattern", ledger::pattern_tag(new_spec.data_pattern)}});
    return instance;
}

void Platform::stop_service(const std::string& service_id) {
    auto instance = find_service(service_id);
    if (!instance) {
        raise(ErrorCode::UnknownService, service_id + " does not exist");
    }
    instance->status = ServiceStatus::Stopped;
    name_service_->drop_address(service_id);
    monitor_->record(service_id, EventKind::NodeStatus, Json{{"status", "stopped"}});
}

void Platform::run_anchors() {
    for (const auto& service_id : service_ids()) {
        auto instance = find_running_service(service_id);
        if (!instance ||
            instance->chain->config().pattern != ledger::LedgerPattern::SubLedger) {
            continue;
        }
        try {
            while (const auto bundle = instance->chain->anchor_pending()) {
                monitor_->record(service_id, EventKind::Anchor,
                                 Json{{"bundle_id", bundle->bundle_id},
                                      {"first", bundle->first_sequence},
                                      {"last", bundle->last_sequence}});
            }
            if (instance->status == ServiceStatus::Unhealthy) {
                instance->status = ServiceStatus::Running;
                monitor_->record(service_id, EventKind::NodeStatus,
                                 Json{{"status", "recovered"}});
            }
        } catch (const Error& error) {
            instance->status = ServiceStatus::Unhealthy;
            monitor_->record(service_id, EventKind::Error,
                             Json{{"what", error.what()},
                                  {"where", "anchor_pending"}});
        }
    }
}

// --------------------------------------------------------------------------
// Gateway

GatewayRequest GatewayRequest::from_json(const Json& j) {
    GatewayRequest request;
    const auto channel = j.at("channel").get<std::string>();
    if (channel == "internal") {
        request.channel = Channel::Internal;
        request.target = j.at("module").get<std::string>();
    } else if (channel == "external") {
        request.channel = Channel::External;
        request.target = j.at("service_id").get<std::string>();
    } else {
        raise(ErrorCode::ChannelViolation, "unknown channel '" + channel + "'");
    }
    request.action = j.at("action").get<std::string>();
    request.payload = j.value("payload", Json::object());
    request.credentials = j.value("credentials", Json::object());
    return request;
}

namespace {

const std::set<std::string> kInternalModules = {"parser", "monitor", "name-service"};

}  // namespace

void Gateway::authenticate_internal(const GatewayRequest& request) const {
    if (request.credentials.contains("provider_token")) {
        if (request.credentials.at("provider_token").get<std::string>() ==
            platform_.provider_token()) {
            return;
        }
        raise(ErrorCode::Unauthenticated, "provider token mismatch");
    }
    if (request.credentials.contains("consumer_id")) {
        const auto consumer_id = request.credentials.at("consumer_id").get<std::string>();
        const auto identity = platform_.name_service()->find_consumer(consumer_id);
        if (identity &&
            crypto::verify(identity->effective_management_key(),
                           to_bytes("internal|" + request.target + "|" + request.action),
                           signature_from_json(request.credentials.at("signature")))) {
            return;
        }
        raise(ErrorCode::Unauthenticated, "consumer credentials do not verify");
    }
    raise(ErrorCode::Unauthenticated, "internal channel requires credentials");
}

Json Gateway::route(const GatewayRequest& request) {
    bool ok = false;
    std::string error_code;
    const std::string log_target =
        request.channel == Channel::Internal ? "platform" : request.target;
    Json result;
    try {
        if (request.channel == Channel::Internal) {
            if (!kInternalModules.contains(request.target)) {
                raise(ErrorCode::NotFound, "unknown internal module " + request.target);
            }
            authenticate_internal(request);
            result = dispatch_internal(request);
        } else {
            if (kInternalModules.contains(request.target)) {
                raise(ErrorCode::ChannelViolation,
                      "module " + request.target + " is not reachable externally");
            }
            auto service = platform_.find_running_service(request.target);
            if (!service || !platform_.name_service()->resolve_service(request.target)) {
                raise(ErrorCode::UnknownService,
                      request.target + " is not a running service");
            }
            result = dispatch_external(request, *service);
        }
        ok = true;
    } catch (const Error& error) {
        error_code = to_string(error.code());
        platform_.monitor().record(log_target, EventKind::Request,
                                   Json{{"action", request.action},
                                        {"channel", request.channel == Channel::Internal
                                                        ? "internal"
                                                        : "external"},
                                        {"error", error_code},
                                        {"ok", false}});
        throw;
    }
    platform_.monitor().record(log_target, EventKind::Request,
                               Json{{"action", request.action},
                                    {"channel", request.channel == Channel::Internal
                                                    ? "internal"
                                                    : "external"},
                                    {"ok", true}});
    return result;
}

Json Gateway::route_json(const Json& request_json) {
    try {
        const auto request = GatewayRequest::from_json(request_json);
        return Json{{"ok", true}, {"result", route(request)}};
    } catch (const SpecError& error) {
        return Json{{"ok", false},
                    {"error", Json{{"code", to_string(error.code())},
                                   {"diagnostics", error.diagnostics_json()},
                                   {"message", error.what()}}}};
    } catch (const Error& error) {
        return Json{{"ok", false},
                    {"error", Json{{"code", to_string(error.code())},
                                   {"message", error.what()}}}};
    } catch (const std::exception& error) {
        return Json{{"ok", false},
                    {"error", Json{{"code", "internal"}, {"message", error.what()}}}};
    }
}

Json Gateway::dispatch_internal(const GatewayRequest& request) {
    const auto& action = request.action;
    const auto& payload = request.payload;

    if (request.target == "parser") {
        if (action == "validate-spec") {
            try {
                const auto spec = parse_spec(payload.at("yaml").get<std::string>());
                return Json{{"spec", spec.to_json()}, {"valid", true}};
            } catch (const SpecError& error) {
                return Json{{"diagnostics", error.diagnostics_json()},
                            {"message", error.what()},
                            {"valid", false}};
            }
        }
        if (action == "plan-service") {
            const auto spec = parse_spec(payload.at("yaml").get<std::string>());
            return Json{{"plan", platform_.plan_service(spec).to_json()}};
        }
        if (action == "build-service") {
            const auto spec = parse_spec(payload.at("yaml").get<std::string>());
            const auto instance = platform_.build_service(spec);
            return Json{{"client_bundle", instance->client_bundle()},
                        {"service", instance->descriptor()}};
        }
        if (action == "migrate-service") {
            const auto spec = parse_spec(payload.at("yaml").get<std::string>());
            const auto instance =
                platform_.migrate_service(payload.at("service_id").get<std::string>(), spec);
            return Json{{"service", instance->descriptor()}};
        }
        if (action == "stop-service") {
            platform_.stop_service(payload.at("service_id").get<std::string>());
            return Json{{"stopped", true}};
        }
    } else if (request.target == "monitor") {
        if (action == "query") {
            EventFilter filter;
            if (payload.contains("kind")) {
                const auto tag = payload.at("kind").get<std::string>();
                for (const auto kind : {EventKind::Request, EventKind::LedgerAppend,
                                        EventKind::Anchor, EventKind::Error,
                                        EventKind::NodeStatus}) {
                    if (event_kind_tag(kind) == tag) filter.kind = kind;
                }
            }
            if (payload.contains("from")) filter.from = payload.at("from").get<Tick>();
            if (payload.contains("to")) filter.to = payload.at("to").get<Tick>();
            Json events = Json::array();
            for (const auto& event :
                 platform_.monitor().query(payload.at("service_id").get<std::string>(), filter)) {
                events.push_back(event.to_json());
            }
            return Json{{"events", events}};
        }
        if (action == "append-summary") {
            Json out = Json::object();
            for (const auto& [submitter, count] : platform_.monitor().append_summary(
                     payload.at("service_id").get<std::string>())) {
                out[submitter] = count;
            }
            return Json{{"summary", out}};
        }
    } else if (request.target == "name-service") {
        if (action == "register-consumer") {
            const auto record = platform_.register_consumer(
                payload.at("consumer_id").get<std::string>(),
                payload.value("meta", Json::object()));
            return consumer_record_json(record);
        }
        if (action == "resolve-consumer") {
            const auto record = platform_.name_service()->resolve_consumer(
                payload.at("consumer_id").get<std::string>());
            if (!record) {
                raise(ErrorCode::NotFound, "unknown consumer");
            }
            return consumer_record_json(*record);
        }
        if (action == "resolve-service") {
            const auto address = platform_.name_service()->resolve_service(
                payload.at("service_id").get<std::string>());
            if (!address) {
                raise(ErrorCode::NotFound, "unknown service");
            }
            return Json{{"address", *address}};
        }
    }
    raise(ErrorCode::NotFound, "unknown internal action " + action);
}

Json Gateway::dispatch_external(const GatewayRequest& request, ServiceInstance& service) {
    const auto& action = request.action;
    const auto& payload = request.payload;
    auto& registry = *service.registry;
    auto& issuer = *service.issuer;
    auto& verifier = *service.verifier;

    const auto log_append = [&](const ledger::LedgerRecord& record) {
        platform_.monitor().record(service.service_id, EventKind::LedgerAppend,
                                   Json{{"event", ledger::event_tag(record.event_kind)},
                                        {"sequence", record.sequence},
                                        {"subject", record.subject_id},
                                        {"submitter", record.submitter}});
    };

    if (action == "request-challenge") {
        const auto challenge = registry.request_challenge(key_from_json(payload.at("subject_key")));
        return Json{{"challenge_id", challenge.challenge_id},
                    {"encoded", base64_encode(challenge.encoded)}};
    }
    if (action == "register-did") {
        const auto receipt = registry.did_registration(
            payload.at("did").get<std::string>(),
            DidDocument::from_json(payload.at("document")), auth_from_json(payload.at("auth")));
        log_append(receipt.record);
        return receipt.to_json();
    }
    if (action == "register-vc") {
        const auto receipt = registry.vc_registration(
            payload.at("did").get<std::string>(),
            VerifiableCredential::from_json(payload.at("credential")),
            IssuerProof::from_json(payload.at("proof")),
            signature_from_json(payload.at("holder_sig")), auth_from_json(payload.at("auth")));
        log_append(receipt.record);
        return receipt.to_json();
    }
    if (action == "update") {
        vdr::ConsumerCredentials credentials{
            payload.at("credentials").at("consumer_id").get<std::string>(),
            signature_from_json(payload.at("credentials").at("signature"))};
        std::optional<Json> content;
        if (payload.contains("new_content")) content = payload.at("new_content");
        const auto receipt = registry.update_subject(
            payload.at("subject_id").get<std::string>(),
            crypto::digest_from_hex(payload.at("new_digest").get<std::string>()), credentials,
            content);
        log_append(receipt.record);
        return receipt.to_json();
    }
    if (action == "revoke") {
        vdr::ConsumerCredentials credentials{
            payload.at("credentials").at("consumer_id").get<std::string>(),
            signature_from_json(payload.at("credentials").at("signature"))};
        const auto receipt =
            registry.revoke_subject(payload.at("subject_id").get<std::string>(), credentials);
        log_append(receipt.record);
        return receipt.to_json();
    }
    if (action == "resolve") {
        return resolution_json(registry.resolve(payload.at("subject_id").get<std::string>()));
    }
    if (action == "request-did") {
        const auto request = issuer.open_did_request(
            payload.value("proofs", Json::object()), key_from_json(payload.at("subject_key")));
        return review_request_json(request);
    }
    if (action == "issue-did") {
        endorsement::ReviewRequest review;
        review.request_id = payload.at("request_id").get<std::string>();
        const auto [did, document] =
            issuer.issue_did(review, key_from_json(payload.at("subject_key")));
        return Json{{"did", did}, {"document", document.to_json()}};
    }
    if (action == "request-vc-begin") {
        const auto auth = issuer.begin_subject_auth(payload.at("subject_did").get<std::string>());
        return Json{{"auth_id", auth.auth_id}, {"encoded", base64_encode(auth.encoded)}};
    }
    if (action == "request-vc") {
        const auto request = issuer.open_vc_request(
            payload.at("subject_did").get<std::string>(),
            payload.at("claims").get<std::map<std::string, std::string>>(),
            payload.value("proofs", Json::object()), payload.at("auth_id").get<std::string>(),
            base64_decode(payload.at("response").get<std::string>()));
        return review_request_json(request);
    }
    if (action == "approve") {
        endorsement::ApprovalMaterial material;
        if (payload.contains("partial")) {
            material.partial = signature_from_json(payload.at("partial"));
        }
        if (payload.contains("share")) {
            material.share = share_from_json(payload.at("share"));
        }
        const auto state = issuer.collect_approval(
            payload.at("request_id").get<std::string>(),
            payload.at("entity_id").get<std::string>(),
            payload.value("decision", "approve") == "approve" ? endorsement::Decision::Approve
                                                              : endorsement::Decision::Reject,
            material);
        return approval_state_json(state);
    }
    if (action == "issuer-status") {
        return approval_state_json(
            issuer.approval_state(payload.at("request_id").get<std::string>()));
    }
    if (action == "issue-vc") {
        endorsement::ReviewRequest review;
        review.request_id = payload.at("request_id").get<std::string>();
        const auto [vc, proof] = issuer.issue_vc(
            review, payload.at("subject_did").get<std::string>(),
            payload.at("claims").get<std::map<std::string, std::string>>());
        return Json{{"credential", vc.to_json()}, {"proof", proof.to_json()}};
    }
    if (action == "issue-nonce") {
        return Json{{"nonce", hex_encode(verifier.issue_nonce())}};
    }
    if (action == "verify-begin") {
        if (payload.contains("credential")) {
            const auto start =
                verifier.begin_vc(VerifiableCredential::from_json(payload.at("credential")));
            return Json{{"encoded", base64_encode(start.encoded_challenge)},
                        {"session_id", start.session_id}};
        }
        const auto start =
            verifier.begin_vp(VerifiablePresentation::from_json(payload.at("presentation")));
        return Json{{"encoded", base64_encode(start.encoded_challenge)},
                    {"session_id", start.session_id}};
    }
    if (action == "verify-complete") {
        const auto session_id = payload.at("session_id").get<std::string>();
        const Bytes response = base64_decode(payload.at("response").get<std::string>());
        const bool is_vp = payload.value("presentation", false);
        const auto report = is_vp ? verifier.complete_vp(session_id, response)
                                  : verifier.complete_vc(session_id, response);
        return report.to_json();
    }
    raise(ErrorCode::NotFound, "unknown action " + action);
}

// --------------------------------------------------------------------------
// GatewayRegistryClient

Json auth_to_json(const vdr::RegistrationAuth& auth) {
    if (auth.challenge) {
        return Json{{"challenge_id", auth.challenge->challenge_id},
                    {"response", base64_encode(auth.challenge->response)}};
    }
    if (auth.delegated_signature) {
        return Json{{"delegated", signature_to_json(*auth.delegated_signature)}};
    }
    return Json::object();
}

Json GatewayRegistryClient::call(const std::string& action, Json payload) const {
    const Json envelope{{"action", action},
                        {"channel", "external"},
                        {"payload", std::move(payload)},
                        {"service_id", service_id_}};
    const Json reply = route_(envelope);
    if (!reply.at("ok").get<bool>()) {
        const auto& error = reply.at("error");
        const auto code = parse_error_code(error.at("code").get<std::string>());
        raise(code.value_or(ErrorCode::Internal), error.value("message", "gateway error"));
    }
    return reply.at("result");
}

vdr::Challenge GatewayRegistryClient::request_challenge(const crypto::PublicKey& subject_key) {
    const Json result =
        call("request-challenge", Json{{"subject_key", key_to_json(subject_key)}});
    return vdr::Challenge{result.at("challenge_id").get<std::string>(),
                          base64_decode(result.at("encoded").get<std::string>())};
}

vdr::RegistrationReceipt GatewayRegistryClient::did_registration(
    const std::string& did, const DidDocument& document, const vdr::RegistrationAuth& auth) {
    const Json result = call("register-did", Json{{"auth", auth_to_json(auth)},
                                                  {"did", did},
                                                  {"document", document.to_json()}});
    return vdr::RegistrationReceipt::from_json(result);
}

vdr::RegistrationReceipt GatewayRegistryClient::vc_registration(
    const std::string& did, const VerifiableCredential& vc, const IssuerProof& issuer_proof,
    const crypto::Signature& holder_sig, const vdr::RegistrationAuth& auth) {
    const Json result = call("register-vc", Json{{"auth", auth_to_json(auth)},
                                                 {"credential", vc.to_json()},
                                                 {"did", did},
                                                 {"holder_sig", signature_to_json(holder_sig)},
                                                 {"proof", issuer_proof.to_json()}});
    return vdr::RegistrationReceipt::from_json(result);
}

vdr::Resolution GatewayRegistryClient::resolve(const std::string& subject_id) const {
    const Json result = call("resolve", Json{{"subject_id", subject_id}});
    vdr::Resolution resolution;
    if (!result.at("status").is_null()) {
        resolution.status = result.at("status").get<std::string>() == "active"
                                ? ledger::SubjectStatus::Active
                                : ledger::SubjectStatus::Revoked;
        resolution.payload_digest =
            crypto::digest_from_hex(result.at("payload_digest").get<std::string>());
    }
    for (const auto& record : result.at("history")) {
        resolution.history.push_back(ledger::LedgerRecord::from_json_line(record.dump()));
    }
    return resolution;
}

}  // namespace ssi::platform
