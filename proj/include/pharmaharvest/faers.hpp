#pragma once

#include "pharmaharvest/fetcher.hpp"
#include "pharmaharvest/sources.hpp"
#include "pharmaharvest/store.hpp"
#include "pharmaharvest/types.hpp"

#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace pharmaharvest::adapters {

struct QuarterRef {
    int year = 0;
    int quarter = 1;  ///< 1..4
    std::string archive_url;
    std::string label;  ///< "January - March 2025"

    /// "2025Q1"
    std::string code() const;
    bool operator==(const QuarterRef&) const = default;
};

/// "January - March 2025" style label for a quarter.
std::string quarter_label(int year, int quarter);

/// Parses "2025Q1" / "2025q1". Throws InvalidArgument.
std::pair<int, int> parse_quarter_code(std::string_view code);

/// Reads the quarterly ASCII archive links off the FAERS index page,
/// newest first. Links are resolved against `page_url`. Years outside
/// 2004..`current_year` are ignored. Throws DomDrift when none are found.
std::vector<QuarterRef> list_faers_quarters(std::string_view index_html, std::string_view page_url = kFaersIndexUrl,
                                            int current_year = 0);

struct FaersDrugRow {
    std::string primaryid;
    std::string drug_name;
    std::string role;
    bool operator==(const FaersDrugRow&) const = default;
};

struct FaersReacRow {
    std::string primaryid;
    std::string pt;
    bool operator==(const FaersReacRow&) const = default;
};

template <typename Row>
struct FaersParse {
    std::vector<Row> rows;
    std::size_t skipped = 0;  ///< lines whose field count differs from the header's
};

/// `$`-delimited DRUGyyQq file. Columns are located by header name
/// (primaryid, drugname, role_cod; "isr" is accepted for old extracts).
/// Throws EmptyFile when there is no header line and ParseError when a
/// required column is absent.
FaersParse<FaersDrugRow> parse_faers_drug_file(std::string_view content);

/// `$`-delimited REACyyQq file (primaryid, pt).
FaersParse<FaersReacRow> parse_faers_reac_file(std::string_view content);

struct JoinOptions {
    /// role_cod values to keep; empty keeps every role.
    std::set<std::string> roles;
    Timestamp retrieved_at{};
    std::string adapter_version = "faers/1.0";
};

/// Counts distinct primaryids per (drug, PT). Drug names are normalized and
/// matched case-insensitively; raw_drug is the lexicographically smallest
/// spelling seen. Records carry no SOC.
std::vector<CountRecord> join_faers(const std::vector<FaersDrugRow>& drugs, const std::vector<FaersReacRow>& reactions,
                                    const JoinOptions& options = {});

/// Locates the DRUG and REAC members inside a quarterly archive, parses and
/// joins them. Throws MalformedExport when either member is missing.
std::vector<CountRecord> join_faers_archive(std::string_view zip_bytes, const JoinOptions& options = {});

/// Downloads a quarter into `<root>/faers/<code>.zip` and manifests it.
/// A quarter already stored with a verifying checksum is returned without
/// any request. Throws NotAZip, ChecksumMismatch, or fetch errors.
ManifestEntry download_archive(const QuarterRef& ref, store::Layout& layout, fetch::Fetcher& fetcher);

}  // namespace pharmaharvest::adapters
