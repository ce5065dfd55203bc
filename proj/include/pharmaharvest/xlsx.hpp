#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace pharmaharvest::xlsx {

struct Sheet {
    std::string name;
    /// Cell text by row, with gaps filled by empty strings. Numbers keep
    /// the textual form stored in the workbook.
    std::vector<std::vector<std::string>> rows;
};

/// Minimal SpreadsheetML reader: shared, inline and literal strings plus
/// numeric values. Formulas yield their cached value. Throws ParseError on
/// anything that is not a readable workbook.
std::vector<Sheet> read_workbook(std::string_view bytes);

}  // namespace pharmaharvest::xlsx
