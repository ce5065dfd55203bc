#pragma once

#include "pharmaharvest/driver.hpp"
#include "pharmaharvest/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace pharmaharvest::adapters {

// Search adapters. Each walks its source's page flow through a
// DocumentDriver and converts what it finds into CountRecords stamped with
// driver.snapshot_time(). Drug selection matches the listed product name
// exactly (case-insensitive, whitespace-collapsed). All of them raise
// DrugNotFound when the search lists no such product and DomDrift when a
// selector they depend on is missing.

/// Per-SOC expansion, one click per group; records carry the SOC.
std::vector<CountRecord> search_vigiaccess(const DrugQuery& query, DocumentDriver& driver);

/// One expand-all click, then SOC-grouped rows. Empty table -> no records.
std::vector<CountRecord> search_dma(const DrugQuery& query, DocumentDriver& driver);

enum class LarebProduct { Drug, Vaccine };
std::string lareb_search_url(std::string_view term, LarebProduct product);

/// Waits for the results pane, then expands each reaction group.
std::vector<CountRecord> search_lareb(const DrugQuery& query, DocumentDriver& driver,
                                      LarebProduct product = LarebProduct::Drug);

/// Flat reaction table; records have no SOC.
std::vector<CountRecord> search_medsafe(const DrugQuery& query, DocumentDriver& driver);

struct DaenResult {
    std::vector<CountRecord> records;
    std::string export_bytes;  ///< the .xlsx exactly as exported
};

/// Prepares and downloads the export, then parses it. Raises
/// ExportTimeout when the download link never appears and MalformedExport
/// when the bytes are not a readable workbook with the expected sheet.
DaenResult search_daen(const DrugQuery& query, DocumentDriver& driver);

/// Parses a DAEN medicine export workbook.
std::vector<CountRecord> parse_daen_export(std::string_view xlsx_bytes, const std::string& raw_drug,
                                           Timestamp retrieved_at);

struct SearchOutcome {
    std::vector<CountRecord> records;
    std::optional<std::string> export_bytes;  ///< DAEN only
    std::string source_url;
};

/// Dispatches on query.source. Throws InvalidArgument for bulk sources.
SearchOutcome run_search(const DrugQuery& query, DocumentDriver& driver);

/// Adapter version stamped into records, e.g. "dma/1.0".
std::string adapter_version(SourceId id);

}  // namespace pharmaharvest::adapters
