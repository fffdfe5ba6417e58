#pragma once

#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "ssi/endorsement.hpp"
#include "ssi/identity.hpp"
#include "ssi/ledger.hpp"
#include "ssi/service_spec.hpp"
#include "ssi/vdr.hpp"
#include "ssi/verification.hpp"

namespace ssi::platform {

// ---------------------------------------------------------------------------
// Name Service: consumer identities and service addresses. Reads run
// concurrently; writes serialize. resolve always returns the latest
// registration, which is what makes services portable across migrations.

struct ConsumerRecord {
    ConsumerIdentity identity;
    std::vector<std::string> service_ids;
    Json meta;
};

class NameService : public ConsumerDirectory {
public:
    void register_consumer(const std::string& consumer_id, Json meta);
    void publish_identity(const ConsumerIdentity& identity);
    void bind_service(const std::string& consumer_id, const std::string& service_id);

    std::optional<ConsumerRecord> resolve_consumer(const std::string& consumer_id) const;
    std::optional<ConsumerIdentity> find_consumer(const std::string& consumer_id) const override;
    bool has_consumer(const std::string& consumer_id) const;

    void register_address(const std::string& service_id, const std::string& address);
    void drop_address(const std::string& service_id);
    std::optional<std::string> resolve_service(const std::string& service_id) const;

private:
    mutable std::shared_mutex mutex_;
    std::map<std::string, ConsumerRecord> consumers_;
    std::map<std::string, std::string> addresses_;
};

// ---------------------------------------------------------------------------
// Monitor: append-only telemetry ring per service, bounded by capacity.

enum class EventKind { Request, LedgerAppend, Anchor, Error, NodeStatus };

std::string_view event_kind_tag(EventKind kind);

struct MonitorEvent {
    Tick timestamp = 0;
    std::string service_id;
    EventKind kind = EventKind::Request;
    Json payload;

    Json to_json() const;
};

struct EventFilter {
    std::optional<EventKind> kind;
    std::optional<Tick> from;
    std::optional<Tick> to;
};

class Monitor {
public:
    explicit Monitor(ClockPtr clock, std::size_t capacity = 65536)
        : clock_(std::move(clock)), capacity_(capacity) {}

    void record(const std::string& service_id, EventKind kind, Json payload);
    std::vector<MonitorEvent> query(const std::string& service_id,
                                    const EventFilter& filter = {}) const;
    std::size_t count(const std::string& service_id, const EventFilter& filter = {}) const;

    // per-writer append counts, the permissioned-pattern audit view
    std::map<std::string, std::size_t> append_summary(const std::string& service_id) const;

private:
    ClockPtr clock_;
    std::size_t capacity_;
    mutable std::mutex mutex_;
    std::map<std::string, std::deque<MonitorEvent>> events_;
};

// ---------------------------------------------------------------------------
// Service instances and the platform that builds them.

enum class ServiceStatus { Building, Running, Stopped, Unhealthy };

std::string_view service_status_tag(ServiceStatus status);

struct ServiceInstance {
    std::string service_id;  // opaque token, never reused
    std::string service_name;
    std::string consumer_id;
    std::string address;
    ServiceStatus status = ServiceStatus::Building;
    ServiceSpec spec;

    std::shared_ptr<ledger::Ledger> chain;
    std::shared_ptr<vdr::Vdr> registry;
    std::shared_ptr<endorsement::Issuer> issuer;
    std::shared_ptr<verification::Verifier> verifier;

    Json descriptor() const;
    Json client_bundle() const;  // wallet/verifier configuration for clients
};

struct BuildStep {
    std::string name;
    std::string detail;
};

struct BuildPlan {
    std::vector<BuildStep> steps;
    Json to_json() const;
};

class Platform {
public:
    explicit Platform(std::string provider_name = "selfprov",
                      ClockPtr clock = std::make_shared<LogicalClock>());

    const std::string& provider_name() const { return provider_name_; }
    const std::string& provider_token() const { return provider_token_; }
    const ClockPtr& clock() const { return clock_; }
    const std::shared_ptr<NameService>& name_service() const { return name_service_; }
    Monitor& monitor() { return *monitor_; }
    const Monitor& monitor() const { return *monitor_; }

    ConsumerRecord register_consumer(const std::string& consumer_id, Json meta = Json::object());

    BuildPlan plan_service(const ServiceSpec& spec) const;
    std::shared_ptr<ServiceInstance> build_service(const ServiceSpec& spec);
    std::shared_ptr<ServiceInstance> migrate_service(const std::string& service_id,
                                                     const ServiceSpec& new_spec);
    void stop_service(const std::string& service_id);

    std::shared_ptr<ServiceInstance> find_service(const std::string& service_id) const;
    std::shared_ptr<ServiceInstance> find_running_service(const std::string& service_id) const;
    std::vector<std::string> service_ids() const;

    // drives sub-ledger anchoring; flags unhealthy services via the monitor
    void run_anchors();

    // shared infrastructure: one CDL per provider, one permissionless master
    // for all sub-ledgers
    std::shared_ptr<ledger::Ledger> consortium_ledger();
    std::shared_ptr<ledger::Ledger> master_ledger();

private:
    std::shared_ptr<ledger::Ledger> make_chain(const ServiceSpec& spec,
                                               const std::string& service_name,
                                               const std::string& writer_fingerprint);

    std::string provider_name_;
    ClockPtr clock_;
    std::string provider_token_;
    std::shared_ptr<NameService> name_service_;
    std::unique_ptr<Monitor> monitor_;
    std::shared_ptr<ledger::AuthorizationSystem> global_authorization_;
    std::shared_ptr<ledger::Ledger> consortium_;
    std::shared_ptr<ledger::Ledger> master_;

    mutable std::shared_mutex mutex_;
    std::map<std::string, std::shared_ptr<ServiceInstance>> services_;
    std::uint64_t service_counter_ = 0;
};

// ---------------------------------------------------------------------------
// Gateway: channel-isolated routing. Internal requests reach the management
// modules only with provider or consumer credentials; external requests are
// resolved through the name service to a running instance.

enum class Channel { Internal, External };

struct GatewayRequest {
    Channel channel = Channel::External;
    std::string target;  // service_id (external) or module name (internal)
    std::string action;
    Json payload = Json::object();
    Json credentials = Json::object();  // internal channel only

    static GatewayRequest from_json(const Json& j);
};

class Gateway {
public:
    explicit Gateway(Platform& platform) : platform_(platform) {}

    // throws Error for rejected requests
    Json route(const GatewayRequest& request);

    // envelope variant for wire use: {"ok":true,"result":...} or
    // {"ok":false,"error":{"code":...,"message":...,"diagnostics":...}}
    Json route_json(const Json& request);

private:
    Json dispatch_internal(const GatewayRequest& request);
    Json dispatch_external(const GatewayRequest& request, ServiceInstance& service);
    void authenticate_internal(const GatewayRequest& request) const;

    Platform& platform_;
};

// Transport for gateway envelopes: in-process (Gateway::route_json) or HTTP
// (POST /api/v1/route).
using JsonRoute = std::function<Json(const Json& envelope)>;

// RegistryApi over the gateway wire format, so holder agents run the same
// protocol code whether the service is local or behind the platform API.
class GatewayRegistryClient : public vdr::RegistryApi {
public:
    GatewayRegistryClient(JsonRoute route, std::string service_id)
        : route_(std::move(route)), service_id_(std::move(service_id)) {}

    vdr::Challenge request_challenge(const crypto::PublicKey& subject_key) override;
    vdr::RegistrationReceipt did_registration(const std::string& did,
                                              const DidDocument& document,
                                              const vdr::RegistrationAuth& auth) override;
    vdr::RegistrationReceipt vc_registration(const std::string& did,
                                             const VerifiableCredential& vc,
                                             const IssuerProof& issuer_proof,
                                             const crypto::Signature& holder_sig,
                                             const vdr::RegistrationAuth& auth) override;
    vdr::Resolution resolve(const std::string& subject_id) const override;

    // generic escape hatch for the non-registry actions
    Json call(const std::string& action, Json payload) const;

private:
    JsonRoute route_;
    std::string service_id_;
};

Json auth_to_json(const vdr::RegistrationAuth& auth);

}  // namespace ssi::platform
