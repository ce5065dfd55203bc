#pragma once

#include "pharmaharvest/errors.hpp"
#include "pharmaharvest/politeness.hpp"
#include "pharmaharvest/serialize.hpp"
#include "pharmaharvest/sources.hpp"
#include "pharmaharvest/transport.hpp"
#include "pharmaharvest/types.hpp"
#include "pharmaharvest/vaers.hpp"

#include <chrono>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace pharmaharvest::service {

enum class JobKind { Search, Download };
enum class JobState { Queued, Running, Done, Failed, NeedsHuman };

std::string_view to_string(JobKind k);
std::string_view to_string(JobState s);
bool is_terminal(JobState s);

struct Job {
    std::string id;
    JobKind kind = JobKind::Search;
    SourceId source = SourceId::Dma;
    std::map<std::string, std::string> params;
    JobState state = JobState::Queued;
    double progress = 0;
    std::optional<ManifestEntry> result_ref;
    std::optional<std::string> error;
    std::optional<std::string> error_code;
    std::vector<CountRecord> records;  ///< inline search result, capped
    bool records_truncated = false;
    std::optional<adapters::HandoffInstruction> handoff;
};

Json to_json(const Job& job);

/// What a finished task hands back to the queue.
struct JobOutcome {
    JobState state = JobState::Done;
    std::optional<ManifestEntry> result_ref;
    std::vector<CountRecord> records;
    bool records_truncated = false;
    std::optional<adapters::HandoffInstruction> handoff;
};

/// Single background worker running jobs in submission order. Tasks that
/// throw leave their job FAILED with the error's message and code.
class JobQueue {
public:
    using Progress = std::function<void(double)>;
    using Task = std::function<JobOutcome(const Progress&)>;

    JobQueue();
    ~JobQueue();
    JobQueue(const JobQueue&) = delete;
    JobQueue& operator=(const JobQueue&) = delete;

    /// Assigns the id and queues the job.
    std::string submit(Job job, Task task);
    std::optional<Job> get(const std::string& id) const;
    std::vector<Job> list() const;

    /// Blocks until the job is terminal or the timeout passes.
    std::optional<Job> wait(const std::string& id, std::chrono::milliseconds timeout) const;

    /// Lets the running job finish, fails anything still queued, joins the
    /// worker. Idempotent.
    void shutdown();

private:
    void run();

    mutable std::mutex mu_;
    mutable std::condition_variable cv_;
    std::map<std::string, Job> jobs_;
    std::vector<std::string> order_;
    std::deque<std::pair<std::string, Task>> pending_;
    std::uint64_t next_id_ = 1;
    bool stopping_ = false;
    std::thread worker_;
};

class PortInUse : public Error {
public:
    explicit PortInUse(const std::string& message) : Error("port_in_use", message) {}
};

struct ServiceOptions {
    std::filesystem::path data_root = "pharmaharvest-data";
    /// Where PUT /api/config persists data_root; empty disables persisting.
    std::filesystem::path config_file;
    /// Recorded sessions and archives for `?driver=replay`:
    /// `<root>/<source>/<slug(term)>/` sessions, `<root>/faers/` and
    /// `<root>/vaers/` files served by name.
    std::optional<std::filesystem::path> replay_root;
    /// Static web UI mounted at "/".
    std::optional<std::filesystem::path> static_dir;
    fetch::PolitenessPolicy politeness;
    std::string bind = "127.0.0.1";
    int port = 8799;  ///< 0 picks a free port
    std::string faers_index_url = std::string(adapters::kFaersIndexUrl);
    std::string vaers_index_url = std::string(adapters::kVaersIndexUrl);
    /// Live transport; a cpp-httplib client when null.
    std::shared_ptr<fetch::Transport> live_transport;
    std::size_t inline_record_cap = 10000;
};

/// Local JSON API over the library. Construction initialises the store
/// layout (NotWritable on failure); bind() claims the port.
class Service {
public:
    explicit Service(ServiceOptions options);
    ~Service();

    /// Throws PortInUse.
    void bind();
    int port() const;
    /// Serves until stop(). bind() must have succeeded.
    void run();
    /// Binds if needed and serves on a background thread.
    void start();
    /// Stops accepting requests, drains the running job, joins.
    void stop();

    JobQueue& jobs();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace pharmaharvest::service
