#include "ssi/http_api.hpp"

#include "httplib.h"
#include "ssi/errors.hpp"

namespace ssi::platform {

struct HttpApi::Impl {
    explicit Impl(Platform& platform) : gateway(platform) {}

    Gateway gateway;
    httplib::Server server;
    std::thread worker;
};

HttpApi::HttpApi(Platform& platform) : impl_(std::make_unique<Impl>(platform)) {
    auto& server = impl_->server;

    server.Get("/api/v1/health", [](const httplib::Request&, httplib::Response& response) {
        response.set_content(Json{{"ok", true}}.dump(), "application/json");
    });

    server.Post("/api/v1/route",
                [this](const httplib::Request& request, httplib::Response& response) {
                    Json body;
                    try {
                        body = Json::parse(request.body);
                    } catch (const Json::exception& error) {
                        response.status = 400;
                        response.set_content(
                            Json{{"ok", false},
                                 {"error", Json{{"code", "syntax_error"},
                                                {"message", error.what()}}}}
                                .dump(),
                            "application/json");
                        return;
                    }
                    const Json result = impl_->gateway.route_json(body);
                    response.status = result.at("ok").get<bool>() ? 200 : 400;
                    response.set_content(result.dump(), "application/json");
                });

    const auto channel_handler = [this](const std::string& channel) {
        return [this, channel](const httplib::Request& request, httplib::Response& response) {
            Json envelope{{"channel", channel},
                          {"action", request.matches[2].str()},
                          {"payload", Json::object()}};
            envelope[channel == "external" ? "service_id" : "module"] =
                request.matches[1].str();
            if (!request.body.empty()) {
                try {
                    Json body = Json::parse(request.body);
                    if (body.contains("credentials")) {
                        envelope["credentials"] = body.at("credentials");
                        body.erase("credentials");
                    }
                    envelope["payload"] = body;
                } catch (const Json::exception& error) {
                    response.status = 400;
                    response.set_content(Json{{"ok", false},
                                              {"error", Json{{"code", "syntax_error"},
                                                             {"message", error.what()}}}}
                                             .dump(),
                                         "application/json");
                    return;
                }
            }
            if (request.has_header("X-Provider-Token")) {
                envelope["credentials"] =
                    Json{{"provider_token", request.get_header_value("X-Provider-Token")}};
            }
            const Json result = impl_->gateway.route_json(envelope);
            response.status = result.at("ok").get<bool>() ? 200 : 400;
            response.set_content(result.dump(), "application/json");
        };
    };
    server.Post(R"(/api/v1/external/([^/]+)/([^/]+))", channel_handler("external"));
    server.Post(R"(/api/v1/internal/([^/]+)/([^/]+))", channel_handler("internal"));
}

HttpApi::~HttpApi() {
    stop();
}

int HttpApi::start(int port) {
    auto& server = impl_->server;
    if (port == 0) {
        port_ = server.bind_to_any_port("127.0.0.1");
    } else {
        if (!server.bind_to_port("127.0.0.1", port)) {
            raise(ErrorCode::Internal, "cannot bind port " + std::to_string(port));
        }
        port_ = port;
    }
    impl_->worker = std::thread([this] { impl_->server.listen_after_bind(); });
    server.wait_until_ready();
    return port_;
}

void HttpApi::stop() {
    if (impl_ && impl_->server.is_running()) {
        impl_->server.stop();
    }
    if (impl_ && impl_->worker.joinable()) {
        impl_->worker.join();
    }
}

}  // namespace ssi::platform
