#pragma once

#include "pharmaharvest/clock.hpp"
#include "pharmaharvest/types.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pharmaharvest::store {

struct VerifyReport {
    bool ok = true;
    std::vector<std::string> missing;    ///< manifested, not on disk
    std::vector<std::string> corrupted;  ///< on disk, checksum differs
    std::vector<std::string> orphans;    ///< on disk, not manifested
};

enum class BlobNaming {
    Timestamped,  ///< "<slug>_<compact time>.<ext>", never overwrites
    Fixed,        ///< "<slug>.<ext>"; rewriting identical bytes is a no-op
};

/// On-disk dataset layout: one subfolder per source plus manifest.json.
///
///   <root>/manifest.json
///   <root>/.lock
///   <root>/<source>/<file>
///
/// Data files and the manifest are replaced by rename, so readers never see
/// partial content. Writers serialise on an exclusive flock of `.lock`.
class Layout {
public:
    /// Creates the folders and an empty manifest when absent. Existing
    /// manifests are left untouched. Throws NotWritable.
    static Layout init(const std::filesystem::path& root, Clock& clock = SystemClock::instance());

    const std::filesystem::path& root() const noexcept { return root_; }
    std::filesystem::path source_dir(SourceId id) const;
    std::filesystem::path resolve(const ManifestEntry& e) const { return root_ / e.file_path; }

    DatasetManifest manifest() const;

    /// Canonical CSV for a search result. Throws FormatMismatch when the
    /// source does not store CSV.
    ManifestEntry write_records(SourceId source, std::string_view query, std::span<const CountRecord> records,
                                std::string source_url = {});

    /// Raw bytes in the source's native format. Throws FormatMismatch when
    /// `format` differs from it, and ChecksumMismatch when Fixed naming
    /// meets an existing manifested file with different content.
    ManifestEntry write_blob(SourceId source, std::string_view label, std::string_view bytes, FileFormat format,
                             BlobNaming naming = BlobNaming::Timestamped, std::optional<Timestamp> retrieved_at = {},
                             std::string source_url = {});

    /// Latest manifest entry for (source, label), if any.
    std::optional<ManifestEntry> find(SourceId source, std::string_view label) const;

    std::string read(const ManifestEntry& e) const;

    /// Re-hashes every manifested file and lists unmanifested ones.
    VerifyReport verify() const;

private:
    Layout(std::filesystem::path root, Clock& clock) : root_(std::move(root)), clock_(&clock) {}

    ManifestEntry commit(SourceId source, std::string_view label, const std::string& file_name, std::string_view bytes,
                         FileFormat format, Timestamp retrieved_at, std::string source_url, bool replace_existing);

    std::filesystem::path root_;
    Clock* clock_;
};

/// Writes `bytes` to `path` through a sibling temp file, fsync and rename.
void atomic_write(const std::filesystem::path& path, std::string_view bytes);

}  // namespace pharmaharvest::store
