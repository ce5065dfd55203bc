#include "pharmaharvest/types.hpp"

#include "pharmaharvest/errors.hpp"
#include "pharmaharvest/text.hpp"

#include <set>
#include <tuple>
#include <unordered_set>

namespace pharmaharvest {
namespace {

template <typename Enum, std::size_t N>
std::optional<Enum> lookup(std::string_view name, const std::array<std::pair<Enum, std::string_view>, N>& table) {
    for (const auto& [value, wire] : table)
        if (text::iequals(wire, name)) return value;
    return std::nullopt;
}

template <typename Enum, std::size_t N>
std::string_view name_of(Enum value, const std::array<std::pair<Enum, std::string_view>, N>& table) {
    for (const auto& [v, wire] : table)
        if (v == value) return wire;
    return "unknown";
}

constexpr std::array<std::pair<SourceId, std::string_view>, 7> kSourceNames{{
    {SourceId::Daen, "daen"},
    {SourceId::Dma, "dma"},
    {SourceId::Lareb, "lareb"},
    {SourceId::Medsafe, "medsafe"},
    {SourceId::Faers, "faers"},
    {SourceId::Vaers, "vaers"},
    {SourceId::VigiAccess, "vigiaccess"},
}};

constexpr std::array<std::pair<AccessMode, std::string_view>, 3> kModeNames{{
    {AccessMode::SearchAggregate, "search_aggregate"},
    {AccessMode::BulkQuarterly, "bulk_quarterly"},
    {AccessMode::BulkAnnualHumanAssisted, "bulk_annual_human_assisted"},
}};

constexpr std::array<std::pair<AccessLevel, std::string_view>, 3> kLevelNames{{
    {AccessLevel::High, "high"},
    {AccessLevel::Medium, "medium"},
    {AccessLevel::Limited, "limited"},
}};

constexpr std::array<std::pair<FileFormat, std::string_view>, 3> kFormatNames{{
    {FileFormat::Csv, "csv"},
    {FileFormat::Xlsx, "xlsx"},
    {FileFormat::Zip, "zip"},
}};

}  // namespace

std::string_view to_string(SourceId id) { return name_of(id, kSourceNames); }
std::optional<SourceId> parse_source_id(std::string_view name) { return lookup(text::trim(name), kSourceNames); }
std::string_view to_string(AccessMode m) { return name_of(m, kModeNames); }
std::string_view to_string(AccessLevel l) { return name_of(l, kLevelNames); }
std::string_view to_string(FileFormat f) { return name_of(f, kFormatNames); }
std::optional<AccessMode> parse_access_mode(std::string_view s) { return lookup(s, kModeNames); }
std::optional<AccessLevel> parse_access_level(std::string_view s) { return lookup(s, kLevelNames); }
std::optional<FileFormat> parse_file_format(std::string_view s) { return lookup(s, kFormatNames); }

std::string_view extension(FileFormat f) {
    switch (f) {
        case FileFormat::Csv: return ".csv";
        case FileFormat::Xlsx: return ".xlsx";
        case FileFormat::Zip: return ".zip";
    }
    return "";
}

DrugQuery DrugQuery::make(std::string_view term, SourceId source) {
    const auto trimmed = text::collapse_whitespace(term);
    if (trimmed.empty()) throw InvalidArgument("query term is empty");
    return DrugQuery{trimmed, source};
}

void validate_records(std::span<const CountRecord> records) {
    std::set<std::tuple<SourceId, std::string, std::string, std::string>> seen;
    for (const auto& r : records) {
        if (text::trim(r.reaction).empty()) throw InvalidArgument("record with empty reaction term");
        auto key = std::make_tuple(r.source, r.drug, r.soc.value_or(std::string{}), r.reaction);
        if (!seen.insert(std::move(key)).second)
            throw InvalidArgument("duplicate record for " + r.drug + " / " + r.reaction);
    }
}

CountMatrix::CountMatrix(std::vector<std::string> ae_labels, std::vector<std::string> drug_labels,
                         std::vector<std::uint64_t> cells)
    : ae_labels_(std::move(ae_labels)), drug_labels_(std::move(drug_labels)), cells_(std::move(cells)) {
    if (cells_.size() != ae_labels_.size() * drug_labels_.size())
        throw InvalidArgument("matrix cell count does not match label dimensions");
    auto check_unique = [](const std::vector<std::string>& labels, const char* what) {
        std::unordered_set<std::string> keys;
        for (const auto& l : labels)
            if (!keys.insert(text::label_key(l)).second)
                throw InvalidArgument(std::string("duplicate ") + what + " label: " + l);
    };
    check_unique(ae_labels_, "reaction");
    check_unique(drug_labels_, "drug");
}

std::optional<std::size_t> CountMatrix::ae_index(std::string_view label) const {
    const auto key = text::label_key(label);
    for (std::size_t i = 0; i < ae_labels_.size(); ++i)
        if (text::label_key(ae_labels_[i]) == key) return i;
    return std::nullopt;
}

std::optional<std::size_t> CountMatrix::drug_index(std::string_view label) const {
    const auto key = text::label_key(label);
    for (std::size_t j = 0; j < drug_labels_.size(); ++j)
        if (text::label_key(drug_labels_[j]) == key) return j;
    return std::nullopt;
}

}  // namespace pharmaharvest
