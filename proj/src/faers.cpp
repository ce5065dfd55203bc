#include "pharmaharvest/faers.hpp"

#include "pharmaharvest/checksum.hpp"
#include "pharmaharvest/dom.hpp"
#include "pharmaharvest/errors.hpp"
#include "pharmaharvest/text.hpp"
#include "pharmaharvest/url.hpp"
#include "pharmaharvest/zip.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <regex>

namespace pharmaharvest::adapters {
namespace {

constexpr const char* kMonths[4] = {"January - March", "April - June", "July - September", "October - December"};

int year_now() { return std::stoi(format_rfc3339(utc_now()).substr(0, 4)); }

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::size_t skipped = 0;
};

std::vector<std::string> split_dollar(std::string_view line) {
    auto fields = text::split(line, '$');
    for (auto& f : fields) f = std::string(text::trim(f));
    return fields;
}

Table read_table(std::string_view content, std::string_view what) {
    Table t;
    std::size_t pos = 0;
    bool have_header = false;
    while (pos <= content.size()) {
        auto end = content.find('\n', pos);
        if (end == std::string_view::npos) end = content.size();
        auto line = content.substr(pos, end - pos);
        pos = end + 1;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (text::trim(line).empty()) {
            if (end == content.size()) break;
            continue;
        }
        auto fields = split_dollar(line);
        if (!have_header) {
            if (!fields.empty() && !fields.front().empty() && fields.front()[0] == '\xEF')
                fields.front() = fields.front().substr(std::min<std::size_t>(3, fields.front().size()));
            if (fields.size() > 1 && fields.back().empty()) fields.pop_back();
            for (auto& h : fields) h = text::lower(h);
            t.header = std::move(fields);
            have_header = true;
            continue;
        }
        if (fields.size() == t.header.size() + 1 && fields.back().empty()) fields.pop_back();
        if (fields.size() != t.header.size()) {
            ++t.skipped;
            continue;
        }
        t.rows.push_back(std::move(fields));
    }
    if (!have_header) throw EmptyFile(std::string(what) + " file has no header line");
    return t;
}

std::size_t column(const Table& t, std::initializer_list<std::string_view> names, std::string_view what) {
    for (const auto name : names) {
        const auto it = std::find(t.header.begin(), t.header.end(), name);
        if (it != t.header.end()) return static_cast<std::size_t>(it - t.header.begin());
    }
    throw ParseError(std::string(what) + " header lacks column '" + std::string(*names.begin()) + "'");
}

std::optional<std::string> find_member(const zip::Archive& archive, std::string_view kind) {
    const std::regex re(std::string(kind) + R"(\d\dq[1-4]\.txt$)", std::regex::icase);
    for (const auto& e : archive.entries()) {
        const auto slash = e.name.find_last_of('/');
        const auto base = slash == std::string::npos ? e.name : e.name.substr(slash + 1);
        if (std::regex_search(base, re) && text::istarts_with(base, kind)) return archive.extract(e);
    }
    return std::nullopt;
}

}  // namespace

std::string QuarterRef::code() const { return std::to_string(year) + "Q" + std::to_string(quarter); }

std::string quarter_label(int year, int quarter) {
    if (quarter < 1 || quarter > 4) throw InvalidArgument("quarter must be 1..4");
    return std::string(kMonths[quarter - 1]) + " " + std::to_string(year);
}

std::pair<int, int> parse_quarter_code(std::string_view code) {
    static const std::regex re(R"(^\s*(\d{4})\s*[qQ]([1-4])\s*$)");
    std::cmatch m;
    if (!std::regex_match(code.begin(), code.end(), m, re))
        throw InvalidArgument("quarter must look like 2025Q1, got '" + std::string(code) + "'");
    return {std::stoi(m[1].str()), std::stoi(m[2].str())};
}

std::vector<QuarterRef> list_faers_quarters(std::string_view index_html, std::string_view page_url, int current_year) {
    if (current_year == 0) current_year = year_now();
    const auto doc = dom::Document::parse_html(index_html);
    static const std::regex re(R"(faers_ascii_(\d{4})q([1-4])\.zip)", std::regex::icase);
    std::map<std::pair<int, int>, QuarterRef> found;
    for (const auto* a : doc.select("a[href]")) {
        const auto& href = *a->attr("href");
        std::smatch m;
        if (!std::regex_search(href, m, re)) continue;
        const int year = std::stoi(m[1].str());
        const int q = std::stoi(m[2].str());
        if (year < 2004 || year > current_year) continue;
        const auto key = std::make_pair(year, q);
        if (found.count(key)) continue;
        found.emplace(key, QuarterRef{year, q, resolve_url(page_url, href), quarter_label(year, q)});
    }
    if (found.empty()) throw DomDrift("a[href*=faers_ascii_]", "no quarterly archive links on FAERS index page");
    std::vector<QuarterRef> out;
    for (auto it = found.rbegin(); it != found.rend(); ++it) out.push_back(it->second);
    return out;
}

FaersParse<FaersDrugRow> parse_faers_drug_file(std::string_view content) {
    const auto t = read_table(content, "DRUG");
    const auto id = column(t, {"primaryid", "isr"}, "DRUG");
    const auto name = column(t, {"drugname"}, "DRUG");
    const auto role = column(t, {"role_cod"}, "DRUG");
    FaersParse<FaersDrugRow> out;
    out.skipped = t.skipped;
    out.rows.reserve(t.rows.size());
    for (const auto& r : t.rows) out.rows.push_back({r[id], r[name], r[role]});
    return out;
}

FaersParse<FaersReacRow> parse_faers_reac_file(std::string_view content) {
    const auto t = read_table(content, "REAC");
    const auto id = column(t, {"primaryid", "isr"}, "REAC");
    const auto pt = column(t, {"pt"}, "REAC");
    FaersParse<FaersReacRow> out;
    out.skipped = t.skipped;
    out.rows.reserve(t.rows.size());
    for (const auto& r : t.rows) out.rows.push_back({r[id], r[pt]});
    return out;
}

std::vector<CountRecord> join_faers(const std::vector<FaersDrugRow>& drugs, const std::vector<FaersReacRow>& reactions,
                                    const JoinOptions& options) {
    // report id -> drug keys on that report
    std::map<std::string, std::set<std::string>> drugs_by_report;
    std::map<std::string, std::string> raw_by_key;
    for (const auto& d : drugs) {
        if (d.drug_name.empty()) continue;
        if (!options.roles.empty() && !options.roles.count(d.role)) continue;
        const auto key = text::label_key(d.drug_name);
        drugs_by_report[d.primaryid].insert(key);
        auto [it, inserted] = raw_by_key.emplace(key, d.drug_name);
        if (!inserted && d.drug_name < it->second) it->second = d.drug_name;
    }

    struct Cell {
        std::string pt;
        std::set<std::string> reports;
    };
    std::map<std::pair<std::string, std::string>, Cell> cells;
    for (const auto& r : reactions) {
        const auto pt = text::collapse_whitespace(r.pt);
        if (pt.empty()) continue;
        const auto found = drugs_by_report.find(r.primaryid);
        if (found == drugs_by_report.end()) continue;
        for (const auto& drug_key : found->second) {
            auto& cell = cells[{drug_key, text::label_key(pt)}];
            if (cell.pt.empty() || pt < cell.pt) cell.pt = pt;
            cell.reports.insert(r.primaryid);
        }
    }

    std::vector<CountRecord> out;
    out.reserve(cells.size());
    for (const auto& [key, cell] : cells) {
        CountRecord rec;
        rec.source = SourceId::Faers;
        rec.raw_drug = raw_by_key.at(key.first);
        rec.drug = text::normalize_drug_label(rec.raw_drug);
        rec.reaction = cell.pt;
        rec.count = cell.reports.size();
        rec.retrieved_at = options.retrieved_at;
        rec.adapter_version = options.adapter_version;
        out.push_back(std::move(rec));
    }
    return out;
}

std::vector<CountRecord> join_faers_archive(std::string_view zip_bytes, const JoinOptions& options) {
    if (!zip::looks_like_zip(zip_bytes)) throw NotAZip("FAERS quarter is not a zip archive");
    const zip::Archive archive(zip_bytes);
    const auto drug = find_member(archive, "drug");
    const auto reac = find_member(archive, "reac");
    if (!drug || !reac) throw MalformedExport("FAERS archive lacks a DRUGyyQq.txt or REACyyQq.txt member");
    return join_faers(parse_faers_drug_file(*drug).rows, parse_faers_reac_file(*reac).rows, options);
}

ManifestEntry download_archive(const QuarterRef& ref, store::Layout& layout, fetch::Fetcher& fetcher) {
    const auto code = ref.code();
    if (const auto existing = layout.find(SourceId::Faers, code)) {
        const auto path = layout.resolve(*existing);
        std::error_code ec;
        if (std::filesystem::is_regular_file(path, ec) && sha256_file(path) == existing->checksum)
            return *existing;
    }
    auto result = fetcher.fetch(ref.archive_url);
    if (!zip::looks_like_zip(result.body))
        throw NotAZip(ref.archive_url + " did not return a zip archive (" + result.content_type + ")");
    return layout.write_blob(SourceId::Faers, code, result.body, FileFormat::Zip, store::BlobNaming::Fixed,
                             result.finished_at, result.url);
}

}  // namespace pharmaharvest::adapters
