#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>

#include "tamex/pipeline.hpp"
#include "tamex/runtime.hpp"

namespace tamex::service {

struct Request {
    std::string method;
    std::string path;
    std::map<std::string, std::string> query;
    std::string body;
};

struct Response {
    int status = 200;
    std::string body;
};

// Session-oriented JSON facade over the runtime. Transport independent: the
// HTTP server below only forwards requests here.
//
//   POST /sessions                          {"bundle","profile","analyse"?,"options"?}
//   GET  /sessions/{id}                     session summary
//   GET  /sessions/{id}/snapshot            runtime snapshot
//   POST /sessions/{id}/events              [event, ...] or {"events":[...]}
//   GET  /sessions/{id}/explanations        ?observable=&occurrence=&verbosity=
//   POST /sessions/{id}/feedback            {"kind", "target"|"value"}
//   GET  /sessions/{id}/model               ?stage=EM1..EM5
//   GET  /sessions/{id}/lookahead           ?horizon=
//   GET  /artifacts, POST /artifacts
//
// Errors are {"code","message"} with 400/403/404/409/422.
class Service {
public:
    Service() = default;
    // Loads every subdirectory of `data_dir` that has a bundle.json.
    explicit Service(const std::filesystem::path& data_dir);

    Response handle(const Request& request);

    // Throws Error when the name is taken.
    void add_bundle(Bundle bundle);
    std::size_t session_count() const;

private:
    struct Slot {
        Slot(std::string b, PipelineResult s, Session sess)
            : bundle(std::move(b)), stages(std::move(s)), session(std::move(sess)) {}

        std::mutex mutex;
        std::string bundle;
        PipelineResult stages;
        Session session;
    };

    Response create_session(const Request& r);
    Response post_events(Slot& slot, const Request& r);
    Response get_explanation(Slot& slot, const Request& r);
    Response post_feedback(Slot& slot, const Request& r);
    Response get_model(Slot& slot, const Request& r);
    Response get_lookahead(Slot& slot, const Request& r);
    Response session_summary(Slot& slot);
    Response list_artifacts();
    Response upload_artifact(const Request& r);

    std::shared_ptr<const Bundle> find_bundle(const std::string& name) const;
    std::shared_ptr<Slot> find_session(const std::string& id) const;

    mutable std::shared_mutex mutex_;
    std::map<std::string, std::shared_ptr<const Bundle>> bundles_;
    std::map<std::string, std::shared_ptr<Slot>> sessions_;
    std::uint64_t next_id_ = 1;
};

// Minimal HTTP front end. bind() returns the bound port (0 picks a free one).
class HttpServer {
public:
    explicit HttpServer(Service& service);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    int bind(const std::string& host, int port);
    void run();  // blocks until stop()
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace tamex::service
