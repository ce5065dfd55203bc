#include "pharmaharvest/search.hpp"

#include "pharmaharvest/errors.hpp"
#include "pharmaharvest/sources.hpp"
#include "pharmaharvest/text.hpp"
#include "pharmaharvest/xlsx.hpp"

#include <cctype>
#include <map>
#include <tuple>

namespace pharmaharvest::adapters {
namespace {

const dom::Node& require(const Page& page, std::string_view selector) {
    const auto* node = page.document.select_one(selector);
    if (!node) throw DomDrift(std::string(selector), page.url);
    return *node;
}

const dom::Node& require_in(const dom::Node& scope, std::string_view selector, const Page& page) {
    const auto* node = dom::select_one(scope, selector);
    if (!node) throw DomDrift(std::string(selector), page.url);
    return *node;
}

// Accepts "1,234", "1.234", "(56)", "1 234"; anything else is drift.
std::uint64_t parse_count(std::string_view text, std::string_view selector, const std::string& where) {
    std::uint64_t value = 0;
    bool any_digit = false;
    for (char c : text) {
        if (c >= '0' && c <= '9') {
            value = value * 10 + static_cast<std::uint64_t>(c - '0');
            any_digit = true;
        } else if (c == ',' || c == '.' || c == '(' || c == ')' || c == ' ') {
            continue;
        } else {
            throw DomDrift(std::string(selector), "unparseable count '" + std::string(text) + "' at " + where);
        }
    }
    if (!any_digit) throw DomDrift(std::string(selector), "empty count at " + where);
    return value;
}

// Finds the listed product whose name matches the query; returns the
// value of `id_attr` on it.
struct Product {
    std::string id;
    std::string raw_name;
};

Product find_product(const Page& page, std::string_view container, std::string_view item, std::string_view id_attr,
                     const DrugQuery& query) {
    const auto& list = require(page, container);
    const auto wanted = text::label_key(query.term);
    for (const auto* node : dom::select(list, item)) {
        const auto name = node->text_content();
        if (text::label_key(name) != wanted) continue;
        const auto* id = node->attr(std::string(id_attr));
        if (!id) throw DomDrift(std::string(item) + "[" + std::string(id_attr) + "]", page.url);
        return Product{*id, name};
    }
    throw DrugNotFound("'" + query.term + "' is not listed by " + std::string(to_string(query.source)));
}

std::string attr_selector(std::string_view base, std::string_view attr, std::string_view value) {
    return std::string(base) + "[" + std::string(attr) + "=\"" + std::string(value) + "\"]";
}

void require_source(const DrugQuery& q, SourceId expected) {
    if (q.source != expected)
        throw InvalidArgument("query for " + std::string(to_string(q.source)) + " passed to the " +
                              std::string(to_string(expected)) + " adapter");
}

class RecordSink {
public:
    RecordSink(SourceId source, std::string raw_drug, Timestamp at)
        : source_(source), raw_drug_(std::move(raw_drug)), drug_(text::normalize_drug_label(raw_drug_)), at_(at) {}

    void add(std::optional<std::string> soc, std::string_view reaction, std::uint64_t count) {
        auto pt = text::collapse_whitespace(reaction);
        if (pt.empty()) return;
        if (soc) {
            *soc = text::collapse_whitespace(*soc);
            if (soc->empty()) soc.reset();
        }
        auto key = std::make_pair(soc.value_or(""), pt);
        if (const auto it = index_.find(key); it != index_.end()) {
            records_[it->second].count += count;
            return;
        }
        index_.emplace(std::move(key), records_.size());
        CountRecord r;
        r.source = source_;
        r.drug = drug_;
        r.raw_drug = raw_drug_;
        r.soc = std::move(soc);
        r.reaction = std::move(pt);
        r.count = count;
        r.retrieved_at = at_;
        r.adapter_version = adapter_version(source_);
        records_.push_back(std::move(r));
    }

    std::vector<CountRecord> take() { return std::move(records_); }

private:
    SourceId source_;
    std::string raw_drug_;
    std::string drug_;
    Timestamp at_;
    std::vector<CountRecord> records_;
    std::map<std::pair<std::string, std::string>, std::size_t> index_;
};

}  // namespace

std::string adapter_version(SourceId id) { return std::string(to_string(id)) + "/1.0"; }

std::string lareb_search_url(std::string_view term, LarebProduct product) {
    const auto q = percent_encode(term);
    return product == LarebProduct::Vaccine ? "https://www.lareb.nl/en/search-vaccine?q=" + q
                                            : "https://www.lareb.nl/en/search-drug?q=" + q;
}

// VigiAccess: search -> pick ingredient -> expand every SOC group by hand.
std::vector<CountRecord> search_vigiaccess(const DrugQuery& query, DocumentDriver& driver) {
    require_source(query, SourceId::VigiAccess);
    const auto results = driver.load(search_url(SourceId::VigiAccess, query.term));
    const auto product = find_product(results, "#search-results", "a.result", "data-index", query);

    auto overview = driver.click(attr_selector("#search-results a.result", "data-index", product.id));
    const auto& reactions = require(overview, "#reactions");
    std::vector<std::string> group_ids;
    for (const auto* g : dom::select(reactions, "div.soc-group")) {
        const auto* idx = g->attr("data-soc-index");
        if (!idx) throw DomDrift("div.soc-group[data-soc-index]", overview.url);
        group_ids.push_back(*idx);
    }

    RecordSink sink(SourceId::VigiAccess, product.raw_name, driver.snapshot_time());
    for (const auto& id : group_ids) {
        const auto group_sel = attr_selector("div.soc-group", "data-soc-index", id);
        const auto expanded = driver.click(group_sel + " button.soc-toggle");
        const auto& group = require(expanded, group_sel);
        const auto soc = require_in(group, "span.soc-name", expanded).text_content();
        require_in(group, "ul.pt-list", expanded);
        for (const auto* li : dom::select(group, "ul.pt-list li")) {
            const auto& name = require_in(*li, "span.pt-name", expanded);
            const auto& count = require_in(*li, "span.pt-count", expanded);
            sink.add(soc, name.text_content(), parse_count(count.text_content(), "span.pt-count", expanded.url));
        }
    }
    return sink.take();
}

// DMA: search -> drug overview -> single expand-all -> SOC/PT table.
std::vector<CountRecord> search_dma(const DrugQuery& query, DocumentDriver& driver) {
    require_source(query, SourceId::Dma);
    const auto results = driver.load(search_url(SourceId::Dma, query.term));
    const auto product = find_product(results, "#search-results", "a.drug-link", "data-drug-id", query);

    const auto overview = driver.click(attr_selector("a.drug-link", "data-drug-id", product.id));
    require(overview, "#expand-all");
    const auto expanded = driver.click("#expand-all");
    const auto& table = require(expanded, "table#adr-table");

    RecordSink sink(SourceId::Dma, product.raw_name, driver.snapshot_time());
    std::optional<std::string> soc;
    std::size_t soc_rows = 0, pt_rows = 0;
    for (const auto* row : dom::select(table, "tr")) {
        if (row->has_class("soc")) {
            ++soc_rows;
            const auto* label = row->attr("data-soc");
            soc = label ? *label : row->text_content();
        } else if (row->has_class("pt")) {
            ++pt_rows;
            const auto& name = require_in(*row, "td.pt-name", expanded);
            const auto& count = require_in(*row, "td.pt-count", expanded);
            sink.add(soc, name.text_content(), parse_count(count.text_content(), "td.pt-count", expanded.url));
        }
    }
    // Group headings without any rows means the expansion did not happen.
    if (soc_rows > 0 && pt_rows == 0) throw DomDrift("table#adr-table tr.pt", expanded.url);
    return sink.take();
}

// Lareb: search -> wait for results pane -> product -> expand each group.
std::vector<CountRecord> search_lareb(const DrugQuery& query, DocumentDriver& driver, LarebProduct product_kind) {
    require_source(query, SourceId::Lareb);
    driver.load(lareb_search_url(query.term, product_kind));
    const auto results = driver.wait_for("#results-pane");
    const auto product = find_product(results, "#results-pane", "a.product", "data-product-id", query);

    const auto overview = driver.click(attr_selector("a.product", "data-product-id", product.id));
    const auto& report = require(overview, "#report-overview");
    RecordSink sink(SourceId::Lareb, product.raw_name, driver.snapshot_time());
    if (dom::select_one(report, "p.no-reports")) return sink.take();

    std::vector<std::string> group_ids;
    for (const auto* g : dom::select(report, "section.reaction-group")) {
        const auto* id = g->attr("data-group");
        if (!id) throw DomDrift("section.reaction-group[data-group]", overview.url);
        group_ids.push_back(*id);
    }
    if (group_ids.empty()) throw DomDrift("section.reaction-group", overview.url);

    for (const auto& id : group_ids) {
        const auto group_sel = attr_selector("section.reaction-group", "data-group", id);
        const auto expanded = driver.click(group_sel + " button.group-toggle");
        const auto& group = require(expanded, group_sel);
        const auto soc = require_in(group, "h3.group-name", expanded).text_content();
        const auto& table = require_in(group, "table.group-reactions", expanded);
        for (const auto* row : dom::select(table, "tr")) {
            const auto* name = dom::select_one(*row, "td.reaction");
            if (!name) continue;  // header row
            const auto& count = require_in(*row, "td.reports", expanded);
            sink.add(soc, name->text_content(), parse_count(count.text_content(), "td.reports", expanded.url));
        }
    }
    return sink.take();
}

// Medsafe: search -> ingredient -> plain summary table.
std::vector<CountRecord> search_medsafe(const DrugQuery& query, DocumentDriver& driver) {
    require_source(query, SourceId::Medsafe);
    const auto results = driver.load(search_url(SourceId::Medsafe, query.term));
    const auto product = find_product(results, "table#ingredient-results", "a.ingredient", "data-ingredient-id", query);

    const auto summary = driver.click(attr_selector("a.ingredient", "data-ingredient-id", product.id));
    const auto& table = require(summary, "table#reaction-summary");
    RecordSink sink(SourceId::Medsafe, product.raw_name, driver.snapshot_time());
    const auto* body = dom::select_one(table, "tbody");
    if (!body) return sink.take();
    for (const auto* row : body->children_named("tr")) {
        const auto cells = row->children_named("td");
        if (cells.size() < 2) throw DomDrift("table#reaction-summary tbody tr td", summary.url);
        sink.add(std::nullopt, cells[0]->text_content(),
                 parse_count(cells[1]->text_content(), "table#reaction-summary td", summary.url));
    }
    return sink.take();
}

// DAEN: search -> medicine -> prepare export -> wait for link -> download.
DaenResult search_daen(const DrugQuery& query, DocumentDriver& driver) {
    require_source(query, SourceId::Daen);
    const auto results = driver.load(search_url(SourceId::Daen, query.term));
    const auto product = find_product(results, "ul#medicine-results", "a.medicine", "data-medicine-id", query);

    const auto summary = driver.click(attr_selector("a.medicine", "data-medicine-id", product.id));
    require(summary, "#prepare-export");
    driver.click("#prepare-export");
    const auto ready = driver.wait_for("a#download-export");
    if (!ready.document.select_one("a#download-export"))
        throw ExportTimeout("DAEN export for '" + query.term + "' was not prepared in time");

    DaenResult out;
    out.export_bytes = driver.export_file("a#download-export");
    out.records = parse_daen_export(out.export_bytes, product.raw_name, driver.snapshot_time());
    return out;
}

std::vector<CountRecord> parse_daen_export(std::string_view xlsx_bytes, const std::string& raw_drug,
                                           Timestamp retrieved_at) {
    std::vector<xlsx::Sheet> sheets;
    try {
        sheets = xlsx::read_workbook(xlsx_bytes);
    } catch (const ParseError& e) {
        throw MalformedExport(std::string("DAEN export is not a readable workbook: ") + e.what());
    }

    for (const auto& sheet : sheets) {
        if (sheet.rows.empty()) continue;
        const auto& header = sheet.rows.front();
        std::optional<std::size_t> soc_col, pt_col, count_col;
        for (std::size_t c = 0; c < header.size(); ++c) {
            const auto h = text::label_key(header[c]);
            if (h == "system organ class" || h == "meddra system organ class") soc_col = c;
            else if (h == "meddra reaction term" || h == "reaction") pt_col = c;
            else if (h == "number of cases" || h == "number of reports") count_col = c;
        }
        if (!pt_col || !count_col) continue;

        RecordSink sink(SourceId::Daen, raw_drug, retrieved_at);
        for (std::size_t r = 1; r < sheet.rows.size(); ++r) {
            const auto& row = sheet.rows[r];
            auto cell = [&](std::optional<std::size_t> c) -> std::string {
                return c && *c < row.size() ? std::string(text::trim(row[*c])) : std::string{};
            };
            const auto pt = cell(pt_col);
            const auto count_text = cell(count_col);
            if (pt.empty() && count_text.empty()) continue;
            std::uint64_t count = 0;
            try {
                std::size_t used = 0;
                const double v = std::stod(count_text, &used);
                if (used != count_text.size() || v < 0 || v != static_cast<double>(static_cast<std::uint64_t>(v)))
                    throw std::invalid_argument("not a count");
                count = static_cast<std::uint64_t>(v);
            } catch (const std::exception&) {
                throw MalformedExport("DAEN export row " + std::to_string(r + 1) + " has bad count '" + count_text +
                                      "'");
            }
            const auto soc = cell(soc_col);
            sink.add(soc.empty() ? std::nullopt : std::optional<std::string>(soc), pt, count);
        }
        return sink.take();
    }
    throw MalformedExport("DAEN export has no sheet with reaction term and case count columns");
}

SearchOutcome run_search(const DrugQuery& query, DocumentDriver& driver) {
    SearchOutcome out;
    switch (query.source) {
        case SourceId::VigiAccess: out.records = search_vigiaccess(query, driver); break;
        case SourceId::Dma: out.records = search_dma(query, driver); break;
        case SourceId::Lareb: out.records = search_lareb(query, driver); break;
        case SourceId::Medsafe: out.records = search_medsafe(query, driver); break;
        case SourceId::Daen: {
            auto r = search_daen(query, driver);
            out.records = std::move(r.records);
            out.export_bytes = std::move(r.export_bytes);
            break;
        }
        case SourceId::Faers:
        case SourceId::Vaers:
            throw InvalidArgument(std::string(to_string(query.source)) + " is a bulk-download source, not searchable");
    }
    out.source_url = query.source == SourceId::Lareb ? lareb_search_url(query.term, LarebProduct::Drug)
                                                     : search_url(query.source, query.term);
    return out;
}

}  // namespace pharmaharvest::adapters
