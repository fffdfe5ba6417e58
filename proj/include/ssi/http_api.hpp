#pragma once

#include <memory>
#include <string>
#include <thread>

#include "ssi/platform.hpp"

namespace ssi::platform {

// JSON-over-HTTP front of the gateway. One generic route endpoint plus
// channel-shaped paths:
//   POST /api/v1/route                        full gateway request envelope
//   POST /api/v1/external/<service>/<action>  body is the payload
//   POST /api/v1/internal/<module>/<action>   credentials via body or
//                                             X-Provider-Token header
//   GET  /api/v1/health
class HttpApi {
public:
    explicit HttpApi(Platform& platform);
    ~HttpApi();

    HttpApi(const HttpApi&) = delete;
    HttpApi& operator=(const HttpApi&) = delete;

    // binds 127.0.0.1; port 0 picks a free one; returns the bound port
    int start(int port = 0);
    void stop();
    int port() const { return port_; }

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    int port_ = 0;
};

}  // namespace ssi::platform
