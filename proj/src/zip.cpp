#include "pharmaharvest/zip.hpp"

#include "pharmaharvest/errors.hpp"

#include <zlib.h>

#include <cstring>

namespace pharmaharvest::zip {
namespace {

constexpr std::uint32_t kLocalSig = 0x04034b50;
constexpr std::uint32_t kCentralSig = 0x02014b50;
constexpr std::uint32_t kEndSig = 0x06054b50;

std::uint32_t u16(std::string_view b, std::size_t at) {
    if (at + 2 > b.size()) throw ParseError("zip: truncated structure");
    return static_cast<std::uint32_t>(static_cast<unsigned char>(b[at])) |
           static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + 1])) << 8;
}

std::uint32_t u32(std::string_view b, std::size_t at) { return u16(b, at) | u16(b, at + 2) << 16; }

std::optional<std::size_t> find_end_record(std::string_view b) {
    if (b.size() < 22) return std::nullopt;
    const std::size_t lowest = b.size() > 22 + 0xFFFF ? b.size() - 22 - 0xFFFF : 0;
    for (std::size_t at = b.size() - 22 + 1; at-- > lowest;) {
        if (u32(b, at) == kEndSig && at + 22 + u16(b, at + 20) <= b.size()) return at;
    }
    return std::nullopt;
}

std::string inflate_raw(std::string_view in, std::uint64_t expected) {
    z_stream zs{};
    if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) throw ParseError("zip: inflateInit failed");
    std::string out;
    out.resize(expected + 1);
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(in.data()));
    zs.avail_in = static_cast<uInt>(in.size());
    zs.next_out = reinterpret_cast<Bytef*>(out.data());
    zs.avail_out = static_cast<uInt>(out.size());
    const int rc = inflate(&zs, Z_FINISH);
    const auto produced = zs.total_out;
    inflateEnd(&zs);
    if (rc != Z_STREAM_END || produced != expected) throw ParseError("zip: corrupt deflate stream");
    out.resize(expected);
    return out;
}

}  // namespace

bool looks_like_zip(std::string_view bytes) {
    if (bytes.size() < 22) return false;
    const auto sig = u32(bytes, 0);
    if (sig != kLocalSig && sig != kEndSig) return false;
    return find_end_record(bytes).has_value();
}

Archive::Archive(std::string_view bytes) : bytes_(bytes) {
    const auto end = find_end_record(bytes);
    if (!end) throw ParseError("zip: end of central directory not found");
    const auto count = u16(bytes, *end + 10);
    const auto dir_size = u32(bytes, *end + 12);
    const auto dir_offset = u32(bytes, *end + 16);
    if (count == 0xFFFF || dir_offset == 0xFFFFFFFF) throw ParseError("zip: ZIP64 archives are not supported");
    if (std::uint64_t{dir_offset} + dir_size > bytes.size()) throw ParseError("zip: central directory out of range");

    std::size_t at = dir_offset;
    entries_.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        if (u32(bytes, at) != kCentralSig) throw ParseError("zip: bad central directory signature");
        Entry e;
        const auto flags = u16(bytes, at + 8);
        if (flags & 0x1) throw ParseError("zip: encrypted members are not supported");
        e.method = static_cast<std::uint16_t>(u16(bytes, at + 10));
        e.crc32 = u32(bytes, at + 16);
        e.compressed_size = u32(bytes, at + 20);
        e.uncompressed_size = u32(bytes, at + 24);
        const auto name_len = u16(bytes, at + 28);
        const auto extra_len = u16(bytes, at + 30);
        const auto comment_len = u16(bytes, at + 32);
        e.local_header_offset = u32(bytes, at + 42);
        if (at + 46 + name_len > bytes.size()) throw ParseError("zip: truncated entry name");
        e.name = std::string(bytes.substr(at + 46, name_len));
        entries_.push_back(std::move(e));
        at += 46 + name_len + extra_len + comment_len;
    }
}

const Entry* Archive::find(std::string_view name) const {
    for (const auto& e : entries_)
        if (e.name == name) return &e;
    return nullptr;
}

std::string Archive::extract(const Entry& e) const {
    const auto at = e.local_header_offset;
    if (u32(bytes_, at) != kLocalSig) throw ParseError("zip: bad local header for " + e.name);
    const auto data_at = at + 30 + u16(bytes_, at + 26) + u16(bytes_, at + 28);
    if (data_at + e.compressed_size > bytes_.size()) throw ParseError("zip: member data out of range: " + e.name);
    const auto raw = bytes_.substr(data_at, e.compressed_size);

    std::string out;
    if (e.method == 0) {
        if (e.compressed_size != e.uncompressed_size) throw ParseError("zip: stored size mismatch: " + e.name);
        out = std::string(raw);
    } else if (e.method == 8) {
        out = inflate_raw(raw, e.uncompressed_size);
    } else {
        throw ParseError("zip: unsupported compression method " + std::to_string(e.method));
    }
    const auto crc = ::crc32(0L, reinterpret_cast<const Bytef*>(out.data()), static_cast<uInt>(out.size()));
    if (crc != e.crc32) throw ParseError("zip: CRC mismatch for " + e.name);
    return out;
}

std::optional<std::string> Archive::extract(std::string_view name) const {
    const auto* e = find(name);
    if (!e) return std::nullopt;
    return extract(*e);
}

}  // namespace pharmaharvest::zip
