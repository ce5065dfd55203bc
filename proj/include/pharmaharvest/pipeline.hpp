#pragma once

#include "pharmaharvest/search.hpp"
#include "pharmaharvest/store.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace pharmaharvest {

/// Persists a search result in the source's native format: the exported
/// workbook for DAEN, canonical CSV for the rest.
ManifestEntry store_search(store::Layout& layout, const DrugQuery& query, const adapters::SearchOutcome& outcome);

/// Reads a stored dataset back as records: CSV directly, DAEN workbooks
/// through the export parser, FAERS quarters through the DRUG/REAC join.
std::vector<CountRecord> load_dataset(const store::Layout& layout, const ManifestEntry& entry);

/// Same, for a file outside any layout; the format follows the extension.
std::vector<CountRecord> load_dataset_file(const std::filesystem::path& file);

/// Directory of a recorded session under a replay root:
/// `<root>/<source>/<slug(term)>`.
std::filesystem::path replay_session_dir(const std::filesystem::path& root, SourceId source, std::string_view term);

}  // namespace pharmaharvest
