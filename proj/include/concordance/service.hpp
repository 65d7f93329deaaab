#pragma once

#include "concordance/error.hpp"
#include "concordance/json_io.hpp"
#include "concordance/session.hpp"

#include <atomic>
#include <condition_variable>
#include <deque>
#include <functional>
#include <memory>
#include <stop_token>
#include <string>
#include <thread>

namespace httplib {
class Server;
}

namespace concordance {

struct ServiceConfig {
    std::string bind = "127.0.0.1";
    int port = 8080;
    int dimension_cap = 14;
    std::filesystem::path data_dir;  // empty: sessions live in memory only
    McConfig mc_defaults;
    std::string cors_origin = "*";
    unsigned job_workers = 2;
    /// Monte Carlo requests above this many samples run as jobs.
    std::uint64_t job_sample_threshold = 2'000'000;
    /// Vertex enumeration at or above this dimension runs as a job.
    int job_dimension_threshold = 6;
};

/// Reads CONCORDANCE_BIND, CONCORDANCE_PORT, CONCORDANCE_DIMENSION_CAP, CONCORDANCE_DATA_DIR,
/// CONCORDANCE_MC_SAMPLES, CONCORDANCE_MC_SEED and CONCORDANCE_CORS_ORIGIN over the given values.
ServiceConfig config_from_env(ServiceConfig base = {});

/// {"code", "message", "detail"} and the HTTP status for an error code.
int http_status(ErrorCode code);
json error_body(std::string_view code, std::string_view message, const json& detail = nullptr);

enum class JobStatus { Queued, Running, Done, Failed, Cancelled };
std::string_view to_string(JobStatus s);

/// Background computations with polling and cooperative cancellation.
class JobQueue {
public:
    using Task = std::function<json(std::stop_token)>;

    explicit JobQueue(unsigned workers);
    ~JobQueue();
    JobQueue(const JobQueue&) = delete;
    JobQueue& operator=(const JobQueue&) = delete;

    std::string submit(std::string kind, Task task);
    /// {"id","kind","status"[,"result"|"error"]}; null when unknown.
    json describe(const std::string& id) const;
    /// False when unknown. Queued jobs are cancelled at once, running ones at their next check.
    bool cancel(const std::string& id);

private:
    struct Job {
        std::string id;
        std::string kind;
        Task task;
        std::stop_source stop;
        JobStatus status = JobStatus::Queued;
        json result;
        json error;
    };

    void run(std::stop_token worker_stop);

    mutable std::mutex mutex_;
    std::condition_variable_any ready_;
    std::deque<std::shared_ptr<Job>> queue_;
    std::map<std::string, std::shared_ptr<Job>> jobs_;
    std::uint64_t next_id_ = 1;
    std::vector<std::jthread> workers_;
};

class Service {
public:
    explicit Service(ServiceConfig config);
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    /// Blocks until stop().
    bool listen();
    /// Binds an ephemeral port on the configured address and returns it; serve with listen_after_bind().
    int bind_any_port();
    bool listen_after_bind();
    void stop();
    void wait_until_ready() const;

    const ServiceConfig& config() const noexcept { return config_; }
    SessionStore& sessions() noexcept { return sessions_; }

private:
    void routes();

    ServiceConfig config_;
    SessionStore sessions_;
    JobQueue jobs_;
    std::unique_ptr<httplib::Server> server_;
};

}  // namespace concordance
