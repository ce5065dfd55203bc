#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <string>

namespace pharmaharvest::fetch {

struct TransportRequest {
    std::string url;
    std::string user_agent;
    std::chrono::milliseconds timeout{30000};
};

struct TransportResponse {
    int status = 0;
    std::string body;
    std::string content_type;
};

/// One HTTP GET, no retries and no politeness. Implementations throw
/// Timeout when the deadline passes and TransportError for any other
/// failure to obtain a response.
class Transport {
public:
    virtual ~Transport() = default;
    virtual TransportResponse get(const TransportRequest& request) = 0;
};

/// cpp-httplib backed transport. Follows redirects.
class HttpTransport final : public Transport {
public:
    TransportResponse get(const TransportRequest& request) override;
};

/// Serves files from a local directory, keyed by the last path segment of
/// the requested URL. Unknown names answer 404. Used to run the bulk
/// download paths against recorded archives.
class DirectoryTransport final : public Transport {
public:
    explicit DirectoryTransport(std::filesystem::path dir) : dir_(std::move(dir)) {}
    TransportResponse get(const TransportRequest& request) override;
    /// Requests answered, 404s included.
    std::size_t hits() const noexcept { return hits_.load(); }

private:
    std::filesystem::path dir_;
    std::atomic<std::size_t> hits_{0};
};

}  // namespace pharmaharvest::fetch
