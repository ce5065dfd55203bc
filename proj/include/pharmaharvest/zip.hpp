#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pharmaharvest::zip {

struct Entry {
    std::string name;
    std::uint16_t method = 0;  ///< 0 stored, 8 deflate
    std::uint32_t crc32 = 0;
    std::uint64_t compressed_size = 0;
    std::uint64_t uncompressed_size = 0;
    std::uint64_t local_header_offset = 0;
};

/// True when the bytes carry a local-file or empty-archive signature and a
/// locatable end-of-central-directory record.
bool looks_like_zip(std::string_view bytes);

/// Read-only view over an in-memory archive. Supports stored and deflate
/// members; ZIP64 and encryption are rejected. Throws ParseError on any
/// structural problem, including CRC mismatches on extraction.
class Archive {
public:
    explicit Archive(std::string_view bytes);

    const std::vector<Entry>& entries() const noexcept { return entries_; }
    const Entry* find(std::string_view name) const;
    std::string extract(const Entry& entry) const;
    std::optional<std::string> extract(std::string_view name) const;

private:
    std::string_view bytes_;
    std::vector<Entry> entries_;
};

}  // namespace pharmaharvest::zip
