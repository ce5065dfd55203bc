#pragma once

#include "pharmaharvest/timefmt.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pharmaharvest {

enum class SourceId { Daen, Dma, Lareb, Medsafe, Faers, Vaers, VigiAccess };

inline constexpr std::array<SourceId, 7> kAllSources = {
    SourceId::Daen, SourceId::Dma,   SourceId::Lareb,     SourceId::Medsafe,
    SourceId::Faers, SourceId::Vaers, SourceId::VigiAccess,
};

/// Stable lowercase wire name ("daen", "vigiaccess", ...).
std::string_view to_string(SourceId id);
/// Case-insensitive; std::nullopt for unknown names.
std::optional<SourceId> parse_source_id(std::string_view name);

enum class AccessMode { SearchAggregate, BulkQuarterly, BulkAnnualHumanAssisted };
enum class AccessLevel { High, Medium, Limited };
enum class FileFormat { Csv, Xlsx, Zip };

std::string_view to_string(AccessMode m);
std::string_view to_string(AccessLevel l);
std::string_view to_string(FileFormat f);
std::optional<AccessMode> parse_access_mode(std::string_view s);
std::optional<AccessLevel> parse_access_level(std::string_view s);
std::optional<FileFormat> parse_file_format(std::string_view s);
/// ".csv", ".xlsx", ".zip"
std::string_view extension(FileFormat f);

struct SourceDescriptor {
    SourceId id;
    std::string display_name;
    AccessMode access_mode;
    AccessLevel access_level;
    FileFormat native_format;
    std::string base_url;
    std::optional<std::string> robots_url;

    bool operator==(const SourceDescriptor&) const = default;
};

struct DrugQuery {
    std::string term;
    SourceId source;

    /// Trims the term and rejects empty input with InvalidArgument.
    static DrugQuery make(std::string_view term, SourceId source);
};

struct CountRecord {
    SourceId source = SourceId::Dma;
    std::string drug;      ///< normalized label
    std::string raw_drug;  ///< label exactly as the source rendered it
    std::optional<std::string> soc;
    std::string reaction;  ///< MedDRA Preferred Term
    std::uint64_t count = 0;
    Timestamp retrieved_at{};
    std::string adapter_version;

    bool operator==(const CountRecord&) const = default;
};

/// Throws InvalidArgument when a record has an empty reaction or when two
/// records share (source, drug, soc, reaction).
void validate_records(std::span<const CountRecord> records);

/// I x J report-count matrix, row-major. Rows are reaction terms, columns
/// are drugs. Labels are unique.
class CountMatrix {
public:
    CountMatrix() = default;
    CountMatrix(std::vector<std::string> ae_labels, std::vector<std::string> drug_labels,
                std::vector<std::uint64_t> cells);

    std::size_t rows() const noexcept { return ae_labels_.size(); }
    std::size_t cols() const noexcept { return drug_labels_.size(); }
    const std::vector<std::string>& ae_labels() const noexcept { return ae_labels_; }
    const std::vector<std::string>& drug_labels() const noexcept { return drug_labels_; }
    std::span<const std::uint64_t> cells() const noexcept { return cells_; }

    std::uint64_t at(std::size_t i, std::size_t j) const { return cells_[i * cols() + j]; }

    /// Case-insensitive lookup; std::nullopt when absent.
    std::optional<std::size_t> ae_index(std::string_view label) const;
    std::optional<std::size_t> drug_index(std::string_view label) const;

    bool operator==(const CountMatrix&) const = default;

private:
    std::vector<std::string> ae_labels_;
    std::vector<std::string> drug_labels_;
    std::vector<std::uint64_t> cells_;
};

/// Laid out as
///            drug j   comparator
///   AE i       a         b
///   other AEs  c         d
struct TwoByTwo {
    std::uint64_t a = 0;
    std::uint64_t b = 0;
    std::uint64_t c = 0;
    std::uint64_t d = 0;

    std::uint64_t total() const noexcept { return a + b + c + d; }
    bool operator==(const TwoByTwo&) const = default;
};

struct ManifestEntry {
    SourceId source = SourceId::Dma;
    std::string query_or_quarter;
    std::string file_path;  ///< relative to the layout root, "<source>/<file>"
    FileFormat format = FileFormat::Csv;
    std::uint64_t byte_size = 0;
    std::string checksum;   ///< lowercase hex SHA-256
    Timestamp retrieved_at{};
    std::string source_url;

    bool operator==(const ManifestEntry&) const = default;
};

struct DatasetManifest {
    static constexpr int kSchemaVersion = 1;
    std::vector<ManifestEntry> entries;

    bool operator==(const DatasetManifest&) const = default;
};

}  // namespace pharmaharvest
