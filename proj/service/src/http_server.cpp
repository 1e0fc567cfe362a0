#include <httplib.h>

#include "tamex/service.hpp"

namespace tamex::service {

struct HttpServer::Impl {
    explicit Impl(Service& s) : service(s) {
        auto forward = [this](const httplib::Request& req, httplib::Response& res) {
            Request r{req.method, req.path, {}, req.body};
            for (const auto& [k, v] : req.params) r.query[k] = v;
            Response out = service.handle(r);
            res.status = out.status;
            res.set_content(out.body, "application/json");
        };
        server.Get(R"(/.*)", forward);
        server.Post(R"(/.*)", forward);
        server.Put(R"(/.*)", forward);
        server.Delete(R"(/.*)", forward);
    }

    Service& service;
    httplib::Server server;
};

HttpServer::HttpServer(Service& service) : impl_(std::make_unique<Impl>(service)) {}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
    if (port == 0) return impl_->server.bind_to_any_port(host);
    return impl_->server.bind_to_port(host, port) ? port : -1;
}

void HttpServer::run() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
    if (impl_) impl_->server.stop();
}

}  // namespace tamex::service
