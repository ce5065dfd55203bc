#include "pharmaharvest/vaers.hpp"

#include "pharmaharvest/dom.hpp"
#include "pharmaharvest/errors.hpp"
#include "pharmaharvest/text.hpp"
#include "pharmaharvest/url.hpp"
#include "pharmaharvest/zip.hpp"

#include <fstream>
#include <map>
#include <regex>
#include <sstream>

namespace pharmaharvest::adapters {
namespace {

std::string file_name_for(int year) { return std::to_string(year) + "VAERSData.zip"; }

}  // namespace

std::vector<VaersFile> list_vaers_files(std::string_view index_html, std::string_view page_url) {
    const auto doc = dom::Document::parse_html(index_html);
    static const std::regex re(R"((\d{4})VAERSData\.zip)", std::regex::icase);
    std::map<int, VaersFile> found;
    for (const auto* a : doc.select("a[href]")) {
        const auto& href = *a->attr("href");
        std::smatch m;
        if (!std::regex_search(href, m, re)) continue;
        const int year = std::stoi(m[1].str());
        if (year < 1990 || found.count(year)) continue;
        found.emplace(year, VaersFile{year, resolve_url(page_url, href), file_name_for(year)});
    }
    if (found.empty()) throw DomDrift("a[href*=VAERSData.zip]", "no annual archive links on VAERS datasets page");
    std::vector<VaersFile> out;
    for (auto it = found.rbegin(); it != found.rend(); ++it) out.push_back(it->second);
    return out;
}

HandoffInstruction vaers_manual_handoff(int year, const store::Layout& layout) {
    if (year < 1990) throw InvalidArgument("VAERS annual files start in 1990");
    HandoffInstruction h;
    h.url = std::string(kVaersIndexUrl);
    h.expected_filename = file_name_for(year);
    h.dest_path = (layout.source_dir(SourceId::Vaers) / text::slug(h.expected_filename.substr(0, 13))).string() + ".zip";
    h.message = "Open " + h.url + " in a browser, choose the " + std::to_string(year) +
                " zip file, complete the verification CAPTCHA and save " + h.expected_filename +
                ". Then run: pharmaharvest vaers import <saved file> --year " + std::to_string(year);
    return h;
}

ManifestEntry import_external_file(const std::filesystem::path& file, int year, store::Layout& layout) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw NotFound("cannot read " + file.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    const auto bytes = ss.str();
    if (!zip::looks_like_zip(bytes)) throw NotAZip(file.string() + " is not a zip archive");
    try {
        zip::Archive{bytes};
    } catch (const ParseError& e) {
        throw NotAZip(file.string() + " is not a readable zip archive: " + e.what());
    }
    return layout.write_blob(SourceId::Vaers, file_name_for(year).substr(0, 13), bytes, FileFormat::Zip,
                             store::BlobNaming::Fixed, std::nullopt, std::string(kVaersIndexUrl));
}

}  // namespace pharmaharvest::adapters
