#pragma once

#include "config.hpp"

#include <chrono>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>

namespace httplib {
class Server;
}

namespace kcut::app {

struct ServiceOptions {
    std::size_t max_upload_bytes = 16u << 20;
    int max_pixels = 200000;
    int iterations_per_solve = 3;
    int max_iterations_per_solve = 50;
    std::chrono::seconds ttl{1800};
};

struct Session;

// In-memory segmentation sessions behind the /v1 HTTP API.
class Service {
public:
    using Clock = std::chrono::steady_clock;

    explicit Service(ServiceOptions opt = {});
    ~Service();

    void mount(httplib::Server& server);
    std::size_t session_count();
    // Replaces the TTL clock; tests step time forward with it.
    void set_clock(std::function<Clock::time_point()> now);

private:
    std::shared_ptr<Session> find(const std::string& id);
    void sweep();

    ServiceOptions opt_;
    std::function<Clock::time_point()> now_;
    std::mutex mu_;
    std::unordered_map<std::string, std::shared_ptr<Session>> sessions_;
    std::uint64_t counter_ = 0;
    std::uint64_t salt_ = 0;
};

}  // namespace kcut::app
