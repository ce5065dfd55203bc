#pragma once

#include "pharmaharvest/types.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pharmaharvest::tabulate {

struct Marginals {
    std::vector<std::uint64_t> row_totals;  ///< n_i.
    std::vector<std::uint64_t> col_totals;  ///< n_.j
    std::uint64_t grand = 0;                ///< n_..
};

/// Comparator ("Other Drugs") construction for a 2x2 table.
struct OtherDrugsMode {
    enum class Kind {
        AeBased,    ///< every drug except the target
        DrugBased,  ///< every drug outside the target's class
    };
    Kind kind = Kind::AeBased;
    std::vector<std::string> class_members;

    static OtherDrugsMode ae_based() { return {}; }
    static OtherDrugsMode drug_based(std::vector<std::string> members) {
        return {Kind::DrugBased, std::move(members)};
    }
};

/// Sums counts per (drug, reaction) across sources. Labels are matched
/// case-insensitively, displayed with their smallest spelling and sorted by
/// their matching key. Absent pairs are 0.
CountMatrix assemble_matrix(std::span<const CountRecord> records);

Marginals marginals(const CountMatrix& m);

/// Cells per the AE/drug layout of TwoByTwo. Throws UnknownLabel, and
/// ClassMissingTarget when a drug-based class omits `drug`.
TwoByTwo two_by_two(const CountMatrix& m, std::string_view ae, std::string_view drug, const OtherDrugsMode& mode);

/// Entry i is the sum of row i over drugs outside `class_members`.
/// Throws UnknownLabel for members that are not columns of `m`.
std::vector<std::uint64_t> other_drugs_column(const CountMatrix& m, std::span<const std::string> class_members);

/// Keeps the given columns, in sorted order. Throws UnknownLabel.
CountMatrix select_drugs(const CountMatrix& m, std::span<const std::string> drugs);

/// Keeps the given rows, in sorted order. Throws UnknownLabel.
CountMatrix select_reactions(const CountMatrix& m, std::span<const std::string> reactions);

/// What the CLI and service ask for: optional drug and reaction filters
/// over the assembled matrix, plus the comparator mode. In drug-based mode
/// every selected drug must belong to the class, and the Other Drugs
/// column sums the full matrix over drugs outside it.
struct TableRequest {
    std::vector<std::string> drugs;      ///< empty keeps every drug
    std::vector<std::string> reactions;  ///< empty keeps every reaction
    OtherDrugsMode mode;
};

struct TableResult {
    CountMatrix matrix;
    std::optional<std::vector<std::uint64_t>> other;  ///< drug-based only
};

/// Throws UnknownLabel and ClassMissingTarget.
TableResult build_table(std::span<const CountRecord> records, const TableRequest& request);

inline constexpr std::string_view kOtherDrugsHeader = "Other Drugs";

/// `PT,<drug>...[,Other Drugs]`, CRLF rows. `other` must have m.rows()
/// entries when present.
std::string export_csv(const CountMatrix& m, const std::optional<std::vector<std::uint64_t>>& other = {});
std::string export_json(const CountMatrix& m, const std::optional<std::vector<std::uint64_t>>& other = {});
std::string export_csv(const TwoByTwo& t);
std::string export_json(const TwoByTwo& t);

struct ParsedTable {
    CountMatrix matrix;
    std::optional<std::vector<std::uint64_t>> other;
};

/// Inverse of export_csv. Throws ParseError.
ParsedTable parse_csv(std::string_view document);
/// Inverse of export_json. Throws ParseError.
ParsedTable parse_json(std::string_view document);

}  // namespace pharmaharvest::tabulate
