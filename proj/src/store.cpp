#include "pharmaharvest/store.hpp"

#include "pharmaharvest/checksum.hpp"
#include "pharmaharvest/csv.hpp"
#include "pharmaharvest/errors.hpp"
#include "pharmaharvest/serialize.hpp"
#include "pharmaharvest/sources.hpp"
#include "pharmaharvest/text.hpp"

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

namespace pharmaharvest::store {
namespace fs = std::filesystem;

namespace {

constexpr const char* kManifestName = "manifest.json";
constexpr const char* kLockName = ".lock";
constexpr const char* kTempPrefix = ".tmp-";

std::string errno_text() { return std::strerror(errno); }

class FileLock {
public:
    explicit FileLock(const fs::path& path) {
        fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
        if (fd_ < 0) throw NotWritable("cannot open lock file " + path.string() + ": " + errno_text());
        while (::flock(fd_, LOCK_EX) != 0) {
            if (errno == EINTR) continue;
            const auto msg = errno_text();
            ::close(fd_);
            throw NotWritable("cannot lock " + path.string() + ": " + msg);
        }
    }
    ~FileLock() {
        ::flock(fd_, LOCK_UN);
        ::close(fd_);
    }
    FileLock(const FileLock&) = delete;
    FileLock& operator=(const FileLock&) = delete;

private:
    int fd_ = -1;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw NotFound("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

DatasetManifest read_manifest(const fs::path& root) {
    const auto text = slurp(root / kManifestName);
    try {
        return Json::parse(text).get<DatasetManifest>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("malformed manifest " + (root / kManifestName).string() + ": " + e.what());
    }
}

void write_manifest(const fs::path& root, const DatasetManifest& m) {
    atomic_write(root / kManifestName, Json(m).dump(2) + "\n");
}

void fsync_dir(const fs::path& dir) {
    const int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY | O_CLOEXEC);
    if (fd < 0) return;
    ::fsync(fd);
    ::close(fd);
}

}  // namespace

void atomic_write(const fs::path& path, std::string_view bytes) {
    const auto tmp = path.parent_path() / (kTempPrefix + path.filename().string());
    const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
    if (fd < 0) throw NotWritable("cannot create " + tmp.string() + ": " + errno_text());
    std::size_t off = 0;
    while (off < bytes.size()) {
        const auto n = ::write(fd, bytes.data() + off, bytes.size() - off);
        if (n < 0) {
            if (errno == EINTR) continue;
            const auto msg = errno_text();
            ::close(fd);
            ::unlink(tmp.c_str());
            throw NotWritable("cannot write " + tmp.string() + ": " + msg);
        }
        off += static_cast<std::size_t>(n);
    }
    if (::fsync(fd) != 0 || ::close(fd) != 0) {
        ::unlink(tmp.c_str());
        throw NotWritable("cannot flush " + tmp.string() + ": " + errno_text());
    }
    if (::rename(tmp.c_str(), path.c_str()) != 0) {
        const auto msg = errno_text();
        ::unlink(tmp.c_str());
        throw NotWritable("cannot rename into " + path.string() + ": " + msg);
    }
    fsync_dir(path.parent_path());
}

Layout Layout::init(const fs::path& root, Clock& clock) {
    std::error_code ec;
    fs::create_directories(root, ec);
    if (ec || !fs::is_directory(root)) throw NotWritable("cannot create data root " + root.string());
    for (const auto id : kAllSources) {
        const auto dir = root / std::string(to_string(id));
        fs::create_directories(dir, ec);
        if (ec) throw NotWritable("cannot create " + dir.string() + ": " + ec.message());
    }
    Layout layout(fs::absolute(root), clock);
    FileLock lock(layout.root_ / kLockName);
    if (!fs::exists(layout.root_ / kManifestName)) write_manifest(layout.root_, DatasetManifest{});
    return layout;
}

fs::path Layout::source_dir(SourceId id) const { return root_ / std::string(to_string(id)); }

DatasetManifest Layout::manifest() const { return read_manifest(root_); }

ManifestEntry Layout::write_records(SourceId source, std::string_view query, std::span<const CountRecord> records,
                                    std::string source_url) {
    const auto& desc = adapters::describe(source);
    if (desc.native_format != FileFormat::Csv)
        throw FormatMismatch(std::string(to_string(source)) + " stores " + std::string(to_string(desc.native_format)) +
                             ", not csv records");
    Timestamp retrieved = records.empty() ? clock_->wall_now() : records.front().retrieved_at;
    for (const auto& r : records) retrieved = std::max(retrieved, r.retrieved_at);
    const auto bytes = csv::write_records(records);
    const auto base = text::slug(query) + "_" + format_compact(clock_->wall_now());
    return commit(source, query, base, bytes, FileFormat::Csv, retrieved, std::move(source_url), false);
}

ManifestEntry Layout::write_blob(SourceId source, std::string_view label, std::string_view bytes, FileFormat format,
                                 BlobNaming naming, std::optional<Timestamp> retrieved_at, std::string source_url) {
    const auto& desc = adapters::describe(source);
    if (desc.native_format != format)
        throw FormatMismatch(std::string(to_string(source)) + " stores " + std::string(to_string(desc.native_format)) +
                             ", got " + std::string(to_string(format)));
    auto base = text::slug(label);
    if (naming == BlobNaming::Timestamped) base += "_" + format_compact(clock_->wall_now());
    return commit(source, label, base, bytes, format, retrieved_at.value_or(clock_->wall_now()), std::move(source_url),
                  naming == BlobNaming::Fixed);
}

ManifestEntry Layout::commit(SourceId source, std::string_view label, const std::string& base, std::string_view bytes,
                             FileFormat format, Timestamp retrieved_at, std::string source_url, bool fixed) {
    FileLock lock(root_ / kLockName);
    auto m = read_manifest(root_);
    const auto dir = std::string(to_string(source));
    const auto ext = std::string(extension(format));
    const auto digest = sha256_hex(bytes);

    std::string rel;
    if (fixed) {
        rel = dir + "/" + base + ext;
        const auto it = std::find_if(m.entries.begin(), m.entries.end(),
                                     [&](const ManifestEntry& e) { return e.file_path == rel; });
        if (it != m.entries.end()) {
            if (it->checksum != digest)
                throw ChecksumMismatch(rel + " is already stored with checksum " + it->checksum + ", new content has " +
                                       digest);
            const auto path = root_ / rel;
            if (!fs::exists(path) || sha256_file(path) != digest) atomic_write(path, bytes);
            return *it;
        }
    } else {
        std::set<std::string> taken;
        for (const auto& e : m.entries) taken.insert(e.file_path);
        rel = dir + "/" + base + ext;
        for (int n = 2; taken.count(rel) || fs::exists(root_ / rel); ++n)
            rel = dir + "/" + base + "-" + std::to_string(n) + ext;
    }

    atomic_write(root_ / rel, bytes);

    ManifestEntry e;
    e.source = source;
    e.query_or_quarter = std::string(label);
    e.file_path = rel;
    e.format = format;
    e.byte_size = bytes.size();
    e.checksum = digest;
    e.retrieved_at = retrieved_at;
    e.source_url = std::move(source_url);
    m.entries.push_back(e);
    write_manifest(root_, m);
    return e;
}

std::optional<ManifestEntry> Layout::find(SourceId source, std::string_view label) const {
    const auto m = manifest();
    for (auto it = m.entries.rbegin(); it != m.entries.rend(); ++it)
        if (it->source == source && it->query_or_quarter == label) return *it;
    return std::nullopt;
}

std::string Layout::read(const ManifestEntry& e) const { return slurp(resolve(e)); }

VerifyReport Layout::verify() const {
    VerifyReport report;
    const auto m = manifest();
    std::set<std::string> known;
    for (const auto& e : m.entries) {
        known.insert(e.file_path);
        const auto path = resolve(e);
        if (!fs::is_regular_file(path)) {
            report.missing.push_back(e.file_path);
        } else if (fs::file_size(path) != e.byte_size || sha256_file(path) != e.checksum) {
            report.corrupted.push_back(e.file_path);
        }
    }
    for (const auto id : kAllSources) {
        const auto dir = source_dir(id);
        if (!fs::is_directory(dir)) continue;
        std::vector<std::string> found;
        for (const auto& f : fs::directory_iterator(dir)) {
            if (!f.is_regular_file()) continue;
            const auto rel = std::string(to_string(id)) + "/" + f.path().filename().string();
            if (!known.count(rel)) found.push_back(rel);
        }
        std::sort(found.begin(), found.end());
        report.orphans.insert(report.orphans.end(), found.begin(), found.end());
    }
    report.ok = report.missing.empty() && report.corrupted.empty() && report.orphans.empty();
    return report;
}

}  // namespace pharmaharvest::store
