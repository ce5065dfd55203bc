#pragma once

#include "pharmaharvest/transport.hpp"

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

namespace testsupport {

namespace fs = std::filesystem;

inline fs::path fixture(const std::string& rel) { return fs::path(PHARMAHARVEST_FIXTURE_DIR) / rel; }

inline std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void spit(const fs::path& p, const std::string& bytes) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << bytes;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        std::random_device rd;
        path_ = fs::temp_directory_path() /
                ("pharmaharvest-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& rel) const { return path_ / rel; }

private:
    fs::path path_;
};

/// Copies a fixture directory so a test can damage it.
inline fs::path copy_fixture(const std::string& rel, const TempDir& into) {
    const auto dest = into / fs::path(rel).filename().string();
    fs::copy(fixture(rel), dest, fs::copy_options::recursive);
    return dest;
}

/// Scripted transport: a handler per call, with a log of requested URLs.
class ScriptedTransport final : public pharmaharvest::fetch::Transport {
public:
    using Handler = std::function<pharmaharvest::fetch::TransportResponse(const std::string& url)>;

    explicit ScriptedTransport(Handler h) : handler_(std::move(h)) {}

    pharmaharvest::fetch::TransportResponse get(const pharmaharvest::fetch::TransportRequest& r) override {
        {
            std::lock_guard lock(mu_);
            urls_.push_back(r.url);
        }
        return handler_(r.url);
    }

    std::vector<std::string> urls() const {
        std::lock_guard lock(mu_);
        return urls_;
    }
    std::size_t count_ending(const std::string& suffix) const {
        std::lock_guard lock(mu_);
        std::size_t n = 0;
        for (const auto& u : urls_)
            if (u.size() >= suffix.size() && u.compare(u.size() - suffix.size(), suffix.size(), suffix) == 0) ++n;
        return n;
    }

private:
    Handler handler_;
    mutable std::mutex mu_;
    std::vector<std::string> urls_;
};

struct CommandResult {
    int exit_code = -1;
    std::string out;
};

/// Runs a shell command, capturing stdout (stderr goes to the test log).
inline CommandResult run_command(const std::string& cmd) {
    CommandResult r;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (!pipe) return r;
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
    const int status = ::pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

inline std::string cli() { return PHARMAHARVEST_CLI_PATH; }

inline std::string quote(const fs::path& p) { return "'" + p.string() + "'"; }

}  // namespace testsupport
