#pragma once

#include "pharmaharvest/sources.hpp"
#include "pharmaharvest/store.hpp"
#include "pharmaharvest/types.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace pharmaharvest::adapters {

struct VaersFile {
    int year = 0;
    std::string archive_url;
    std::string file_name;  ///< "2024VAERSData.zip"
    bool operator==(const VaersFile&) const = default;
};

/// Annual data archives linked from the VAERS datasets page, newest first.
/// Throws DomDrift when none are found.
std::vector<VaersFile> list_vaers_files(std::string_view index_html, std::string_view page_url = kVaersIndexUrl);

/// What a person has to do to fetch an annual file the site guards with a
/// CAPTCHA. The tool never attempts the download itself.
struct HandoffInstruction {
    std::string url;                ///< page to open in a browser
    std::string expected_filename;  ///< file the browser will save
    std::string dest_path;          ///< where import_external_file will store it
    std::string message;            ///< human-readable steps
};

HandoffInstruction vaers_manual_handoff(int year, const store::Layout& layout);

/// Completes a handoff: checks the file is a zip archive (NotAZip
/// otherwise) and stores it as `<root>/vaers/<year>vaersdata.zip`.
ManifestEntry import_external_file(const std::filesystem::path& file, int year, store::Layout& layout);

}  // namespace pharmaharvest::adapters
