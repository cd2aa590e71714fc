#pragma once

// Wire API over an Engine. `route` is the whole API without a transport;
// HttpServer puts it on a socket.

#include "semcomp/session.hpp"

#include <map>
#include <memory>
#include <string>

namespace semcomp {

struct WireRequest {
    std::string method;  // GET, POST, PUT, DELETE
    std::string path;
    std::multimap<std::string, std::string> params;
    std::string body;

    std::optional<std::string> param(const std::string &key) const;
};

struct WireResponse {
    int status = 200;
    std::string body;  // always a JSON document
};

int http_status(ErrorCode code);

WireResponse route(Engine &engine, const WireRequest &request);

class HttpServer {
public:
    explicit HttpServer(Engine &engine);
    ~HttpServer();

    // port 0 picks a free port; returns the bound port, or -1.
    int bind(const std::string &host, int port);
    // Blocks until stop().
    bool listen_after_bind();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace semcomp
